#include "almgp/error.hpp"

namespace almgp {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::shape: return "shape";
    case ErrorKind::invalid_spec: return "invalid_spec";
    case ErrorKind::invalid_kernel: return "invalid_kernel";
    case ErrorKind::unsupported_grid: return "unsupported_grid";
    case ErrorKind::ill_conditioned: return "ill_conditioned";
    case ErrorKind::domain: return "domain";
    case ErrorKind::fit_failure: return "fit_failure";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::io: return "io";
    case ErrorKind::oracle_failure: return "oracle_failure";
    }
    return "unknown";
}

} // namespace almgp
