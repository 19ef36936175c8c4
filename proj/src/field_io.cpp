#include "field_io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>

namespace mfg {

namespace {

void write_header(std::ofstream& os, const TorusGrid& g, uint64_t count) {
    uint32_t dim = static_cast<uint32_t>(g.dim);
    uint32_t n = static_cast<uint32_t>(g.n);
    os.write(reinterpret_cast<const char*>(&dim), 4);
    os.write(reinterpret_cast<const char*>(&n), 4);
    os.write(reinterpret_cast<const char*>(&count), 8);
}

struct Header {
    TorusGrid grid;
    uint64_t count;
};

Header read_header(std::ifstream& is, const std::string& path) {
    uint32_t dim = 0, n = 0;
    uint64_t count = 0;
    is.read(reinterpret_cast<char*>(&dim), 4);
    is.read(reinterpret_cast<char*>(&n), 4);
    is.read(reinterpret_cast<char*>(&count), 8);
    if (!is) throw ValidationError("field dump truncated header: " + path);
    Header h;
    h.grid = make_grid(static_cast<int>(dim), static_cast<int>(n));
    h.count = count;
    return h;
}

}  // namespace

void save_field(const std::string& path, const ScalarField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot open for write: " + path);
    write_header(os, f.grid, f.v.size());
    os.write(reinterpret_cast<const char*>(f.v.data()),
             static_cast<std::streamsize>(f.v.size() * sizeof(double)));
    if (!os) throw NumericError("write failed: " + path);
}

ScalarField load_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("cannot open: " + path);
    Header h = read_header(is, path);
    if (h.count != static_cast<uint64_t>(h.grid.size()))
        throw ValidationError("field dump count mismatch: " + path);
    ScalarField f(h.grid);
    is.read(reinterpret_cast<char*>(f.v.data()),
            static_cast<std::streamsize>(f.v.size() * sizeof(double)));
    if (!is) throw ValidationError("field dump truncated data: " + path);
    return f;
}

void save_spacetime(const std::string& path, const std::vector<ScalarField>& slices) {
    if (slices.empty()) throw ValidationError("save_spacetime: empty path");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot open for write: " + path);
    const TorusGrid& g = slices.front().grid;
    uint64_t nslices = slices.size();
    write_header(os, g, nslices * static_cast<uint64_t>(g.size()));
    os.write(reinterpret_cast<const char*>(&nslices), 8);
    for (const auto& f : slices) {
        if (!(f.grid == g)) throw ValidationError("save_spacetime: mixed grids");
        os.write(reinterpret_cast<const char*>(f.v.data()),
                 static_cast<std::streamsize>(f.v.size() * sizeof(double)));
    }
    if (!os) throw NumericError("write failed: " + path);
}

std::vector<ScalarField> load_spacetime(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("cannot open: " + path);
    Header h = read_header(is, path);
    uint64_t nslices = 0;
    is.read(reinterpret_cast<char*>(&nslices), 8);
    if (!is || nslices == 0 ||
        h.count != nslices * static_cast<uint64_t>(h.grid.size()))
        throw ValidationError("space-time dump header mismatch: " + path);
    std::vector<ScalarField> out;
    out.reserve(nslices);
    for (uint64_t k = 0; k < nslices; ++k) {
        ScalarField f(h.grid);
        is.read(reinterpret_cast<char*>(f.v.data()),
                static_cast<std::streamsize>(f.v.size() * sizeof(double)));
        if (!is) throw ValidationError("space-time dump truncated: " + path);
        out.push_back(std::move(f));
    }
    return out;
}

void save_field_csv(const std::string& path, const ScalarField& f) {
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot open for write: " + path);
    char buf[96];
    for (int id = 0; id < f.size(); ++id) {
        Pt x = f.grid.coord(id);
        if (f.grid.dim == 1)
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", x[0], f.v[id]);
        else
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x[0], x[1], f.v[id]);
        os << buf;
    }
}

}  // namespace mfg
