#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gpae {

enum class ErrorKind {
    invalid_input,
    unsupported_rate,
    invalid_config,
    model_integrity,
    numeric_failure,
    format,
    io,
    invalid_task,
    configuration,
    structural,
};

std::string_view to_string(ErrorKind kind);

// Base of every error the library throws. Callers switch on kind() to map
// failures onto exit codes or retries.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Malformed bytes in a model or embedding file; offset points at the first
// byte that could not be interpreted.
class FormatError : public Error {
public:
    FormatError(std::size_t offset, const std::string& message);

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// A weight tensor that is missing, unexpected or has the wrong shape.
class IntegrityError : public Error {
public:
    IntegrityError(std::string tensor, const std::string& message);

    const std::string& tensor() const noexcept { return tensor_; }

private:
    std::string tensor_;
};

}  // namespace gpae
