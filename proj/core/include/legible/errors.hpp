#pragma once

#include <stdexcept>
#include <string>

namespace legible {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidModel : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class InvalidSpec : public Error {
public:
    using Error::Error;
};

class InfeasibleSampling : public Error {
public:
    using Error::Error;
};

class ImpossibleTransition : public Error {
public:
    using Error::Error;
};

class EmptyTrajectory : public Error {
public:
    EmptyTrajectory() : Error("trajectory has no steps") {}
};

class TimeoutError : public Error {
public:
    using Error::Error;
};

class DivergenceError : public Error {
public:
    using Error::Error;
};

class InsufficientSamples : public Error {
public:
    InsufficientSamples(const std::string& what, std::size_t achievable)
        : Error(what), achievable_(achievable) {}

    // Largest quota every configuration could have satisfied.
    std::size_t achievable_quota() const noexcept { return achievable_; }

private:
    std::size_t achievable_;
};

class FixtureMissing : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    SchemaError(const std::string& file, const std::string& field_path, const std::string& what)
        : Error(file + ": " + field_path + ": " + what), file_(file), field_path_(field_path) {}

    const std::string& file() const noexcept { return file_; }
    const std::string& field_path() const noexcept { return field_path_; }

private:
    std::string file_;
    std::string field_path_;
};

}  // namespace legible
