#pragma once

#include <stdexcept>
#include <string>

namespace newer {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Malformed or inconsistent input data.
class InputError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    IoError(const std::string& path, const std::string& what)
        : Error(path + ": " + what), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

// The optimizer produced a non-finite value for a specific user.
class NumericalError : public Error {
public:
    NumericalError(const std::string& user, const std::string& what)
        : Error("user '" + user + "': " + what), user_(user) {}

    const std::string& user() const noexcept { return user_; }

private:
    std::string user_;
};

}  // namespace newer
