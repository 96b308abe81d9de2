#pragma once

#include <stdexcept>
#include <string>

namespace uconv {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OrderTooLarge : public Error { public: using Error::Error; };
class DimMismatch : public Error { public: using Error::Error; };
class DepthTooLarge : public Error { public: using Error::Error; };
class RangeError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };

class AliasGuardFailed : public Error {
public:
    AliasGuardFailed(const std::string& what, double tail)
        : Error(what), tail_mass(tail) {}
    double tail_mass;
};

class QuadratureFailed : public Error {
public:
    QuadratureFailed(const std::string& what, double res)
        : Error(what), residual(res) {}
    double residual;
};

} // namespace uconv
