#pragma once

#include <stdexcept>
#include <string>

namespace fastlight {

// Raised for any argument outside an operation's domain (negative width,
// efficiency outside (0,1], band beyond Nyquist, ...).
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class IncompatibleSpectra : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IncompatibleTraces : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// No unique correlation maximum.
class DegeneratePeak : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace fastlight
