#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace almgp {

enum class ErrorKind {
    shape,
    invalid_spec,
    invalid_kernel,
    unsupported_grid,
    ill_conditioned,
    domain,
    fit_failure,
    divergence,
    io,
    oracle_failure,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Base exception for every failure raised by the library. The kind is stable
/// and is what the CLI prints in its machine-readable error line.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace almgp
