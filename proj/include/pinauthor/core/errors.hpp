#pragma once

#include <stdexcept>
#include <string>

namespace pinauthor {

// Root of every error the library raises. Each module derives its own
// kinds so callers can dispatch on type rather than message text.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BoundsError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class InvalidStateError : public Error {
public:
    using Error::Error;
};

// Model output that does not fit the expected schema; keeps the raw text
// so it can be shown verbatim in an error console.
class SchemaError : public Error {
public:
    SchemaError(const std::string& message, std::string rawText) : Error(message), raw(std::move(rawText)) {}
    std::string raw;
};

} // namespace pinauthor
