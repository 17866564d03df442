#ifndef MASKEM_ERRORS_HPP
#define MASKEM_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace maskem {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Domain violations: bad parameters, shape mismatches, singular inputs.
class InvariantError : public Error {
public:
    using Error::Error;
};

class DimensionError : public InvariantError {
public:
    using InvariantError::InvariantError;
};

class NotInvertibleError : public InvariantError {
public:
    using InvariantError::InvariantError;
};

// Key generation exhausted its resample budget.
class KeygenError : public InvariantError {
public:
    using InvariantError::InvariantError;
};

// A feasibility guard refused a run that would not terminate at desk scale.
class GuardError : public InvariantError {
public:
    using InvariantError::InvariantError;
};

// Malformed serialized data. offset() is the byte position of the first
// inconsistency in the input buffer.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace maskem

#endif
