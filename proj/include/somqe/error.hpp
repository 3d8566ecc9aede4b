#pragma once

#include <stdexcept>
#include <string>

namespace somqe {

// Base for every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user input: a spec field, config value or CLI argument. `field` names the offender.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& what)
        : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// A precondition on data (not config) failed, e.g. too few pixels or samples.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Random placement ran out of room.
class CapacityError : public Error {
public:
    using Error::Error;
};

enum class ImageErrorKind { not_found, not_png, unsupported_format, decode, io };

class ImageError : public Error {
public:
    ImageError(ImageErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
    ImageErrorKind kind() const noexcept { return kind_; }

private:
    ImageErrorKind kind_;
};

}  // namespace somqe
