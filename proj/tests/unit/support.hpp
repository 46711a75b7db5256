#pragma once

#include <optional>

#include "almgp/error.hpp"

// Kind of the almgp::Error thrown by f, or empty when nothing is thrown.
template <class F>
std::optional<almgp::ErrorKind> thrown_kind(F&& f) {
    try {
        f();
    } catch (const almgp::Error& e) {
        return e.kind();
    }
    return std::nullopt;
}
