#pragma once

#include <stdexcept>
#include <string>

namespace calabi {

// Error taxonomy shared by the library and the CLI exit-code contract:
// DomainError -> 2, numerical failures (ConvergenceError) -> 3,
// verification failures -> 1.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DomainError : public Error {
  public:
    explicit DomainError(const std::string& msg) : Error("domain error: " + msg) {}
};

class RangeError : public Error {
  public:
    explicit RangeError(const std::string& msg) : Error("range error: " + msg) {}
};

class RegimeError : public Error {
  public:
    explicit RegimeError(const std::string& msg) : Error("regime error: " + msg) {}
};

class ConvergenceError : public Error {
  public:
    explicit ConvergenceError(const std::string& msg) : Error("convergence error: " + msg) {}
};

class WindowError : public Error {
  public:
    explicit WindowError(const std::string& msg) : Error("window error: " + msg) {}
};

class ThetaError : public Error {
  public:
    explicit ThetaError(const std::string& msg) : Error("theta error: " + msg) {}
};

class FitError : public Error {
  public:
    explicit FitError(const std::string& msg) : Error("fit error: " + msg) {}
};

class BarrierError : public Error {
  public:
    explicit BarrierError(const std::string& msg) : Error("barrier error: " + msg) {}
};

class NoRootError : public Error {
  public:
    explicit NoRootError(const std::string& msg) : Error("no root: " + msg) {}
};

class NoSignChangeError : public Error {
  public:
    explicit NoSignChangeError(const std::string& msg) : Error("no sign change: " + msg) {}
};

}  // namespace calabi
