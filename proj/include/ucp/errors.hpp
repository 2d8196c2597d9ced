#pragma once

#include <stdexcept>
#include <string>

namespace ucp {

// Error taxonomy shared by all modules. Every failure mode that callers are
// expected to handle gets its own type; plain std::runtime_error is reserved
// for internal bugs.

struct invalid_params : std::runtime_error {
    explicit invalid_params(const std::string& what) : std::runtime_error(what) {}
};

struct unbounded_domain : std::runtime_error {
    explicit unbounded_domain(const std::string& what) : std::runtime_error(what) {}
};

struct empty_interior : std::runtime_error {
    explicit empty_interior(const std::string& what) : std::runtime_error(what) {}
};

struct ellipticity_violation : std::runtime_error {
    explicit ellipticity_violation(const std::string& what) : std::runtime_error(what) {}
};

struct gap_unresolved : std::runtime_error {
    explicit gap_unresolved(const std::string& what) : std::runtime_error(what) {}
};

struct degenerate_log : std::runtime_error {
    explicit degenerate_log(const std::string& what) : std::runtime_error(what) {}
};

struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

struct denseness_not_certified : std::runtime_error {
    explicit denseness_not_certified(const std::string& what) : std::runtime_error(what) {}
};

struct unsupported_reflection : std::runtime_error {
    explicit unsupported_reflection(const std::string& what) : std::runtime_error(what) {}
};

struct io_error : std::runtime_error {
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ucp
