#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace simlmc {

// Root of everything the library throws on bad input or numerical failure.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GeometryError : public Error {
public:
    using Error::Error;
};

// Mesh invariants violated (bad connectivity, inverted element, overlapping boundary sets).
class MeshError : public Error {
public:
    using Error::Error;
};

class MeshFormatError : public Error {
public:
    MeshFormatError(const std::string& file, std::size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class NestingError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

class MaterialError : public Error {
public:
    using Error::Error;
};

class KleError : public Error {
public:
    using Error::Error;
};

// Evaluation point outside the reference mesh.
class ExtrapolationError : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    using Error::Error;
};

class ModelDomainError : public Error {
public:
    using Error::Error;
};

class InsufficientSamplesError : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    using Error::Error;
};

class NormalizationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace simlmc
