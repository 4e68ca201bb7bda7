#ifndef IAP_ERROR_HPP
#define IAP_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iap {

/// Raised when an operation receives arguments that violate its preconditions.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// CSV / schema / schedule-file parse failure. `line()` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// The variable-incremental generator could not satisfy its constraints.
class ScheduleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace iap

#endif  // IAP_ERROR_HPP
