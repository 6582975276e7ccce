#pragma once

#include <stdexcept>
#include <string>

namespace kinshock {

// Invalid arguments or violated preconditions (bad grid size, s <= 2, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Configuration parse or validation failure. Carries the offending line when known.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::string const& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what)
        , line_(line)
    {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

// Blow-up, non-finite values, or a numerical guard tripping inside a solver.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool cond, char const* msg)
{
    if (!cond) throw InvalidArgument(msg);
}
inline void require(bool cond, std::string const& msg)
{
    if (!cond) throw InvalidArgument(msg);
}
} // namespace detail

} // namespace kinshock
