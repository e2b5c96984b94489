#pragma once

#include <stdexcept>
#include <string>

namespace dproj {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

class HermitianViolation : public Error {
public:
    using Error::Error;
};

class DegenerateSignal : public Error {
public:
    using Error::Error;
};

class EmptyDataset : public Error {
public:
    using Error::Error;
};

class KindError : public Error {
public:
    using Error::Error;
};

/// Raised when on-disk data does not satisfy what a command needs
/// (e.g. known poses requested from a pose-free dataset).
class DataContractError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace dproj
