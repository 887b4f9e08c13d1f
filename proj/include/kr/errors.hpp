#pragma once

#include <stdexcept>
#include <string>

namespace kr {

enum class ErrorKind {
    config,
    numerical,
    resolution,
    branch_cut,
    gauge,
    continuity,
    regrid,
    degenerate_line,
    consistency,
    invalid_patch,
    not_topological,
    truncation,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

const char* error_name(ErrorKind kind);

// process exit code used by the command line tool
int exit_code(ErrorKind kind);

} // namespace kr
