#ifndef MFG_FIELD_IO_HPP
#define MFG_FIELD_IO_HPP

#include <string>
#include <vector>

#include "grid.hpp"

namespace mfg {

// Binary dump format (.fld), little-endian:
//   u32 dim, u32 n, u64 count, then count doubles (row-major node order).
// Space-time dumps append a second u64 holding the number of time slices
// directly after the 16-byte header; count is then slices * n^d.
void save_field(const std::string& path, const ScalarField& f);
ScalarField load_field(const std::string& path);

void save_spacetime(const std::string& path, const std::vector<ScalarField>& path_fields);
std::vector<ScalarField> load_spacetime(const std::string& path);

// One node per row: coordinates then value.
void save_field_csv(const std::string& path, const ScalarField& f);

}  // namespace mfg

#endif
