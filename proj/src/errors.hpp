#ifndef MFG_ERRORS_HPP
#define MFG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mfg {

// Exit-code mapping used at the C API boundary:
//   ValidationError -> 2, ConvergenceError -> 3, SingularityError -> 4,
//   anything else -> 1.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mfg

#endif
