#pragma once

#include <stdexcept>
#include <string>

namespace gaugelab {

/// Categories map onto the lab CLI exit codes.
enum class ErrorKind { invalid_input, instability, horizon, pole, compatibility, domain, io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct InvalidInput : Error {
  explicit InvalidInput(const std::string& w) : Error(ErrorKind::invalid_input, w) {}
};
struct InstabilityError : Error {
  explicit InstabilityError(const std::string& w) : Error(ErrorKind::instability, w) {}
};
struct HorizonError : Error {
  explicit HorizonError(const std::string& w) : Error(ErrorKind::horizon, w) {}
};
struct PoleError : Error {
  explicit PoleError(const std::string& w) : Error(ErrorKind::pole, w) {}
};
struct CompatibilityError : Error {
  explicit CompatibilityError(const std::string& w) : Error(ErrorKind::compatibility, w) {}
};
struct DomainCoverageError : Error {
  explicit DomainCoverageError(const std::string& w) : Error(ErrorKind::domain, w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorKind::io, w) {}
};

}  // namespace gaugelab
