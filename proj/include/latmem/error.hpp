#pragma once

#include <stdexcept>
#include <string>

namespace latmem {

/// Failure categories reported by the solver stack.
enum class ErrorKind {
    invalid_input,
    integration_failure,
    band_edge_degeneracy,
    mode_orthogonality,
    total_reflection,
    walk_off_too_large,
    numerical_failure,
    step_size,
    schema,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace latmem
