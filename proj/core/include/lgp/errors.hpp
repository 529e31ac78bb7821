#pragma once

#include <stdexcept>
#include <string>

namespace lgp {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A detector adapter failed; the message carries the adapter name.
class DetectorError : public Error {
 public:
  DetectorError(const std::string& adapter, const std::string& what)
      : Error("detector '" + adapter + "': " + what), adapter_(adapter) {}
  const std::string& adapter() const noexcept { return adapter_; }

 private:
  std::string adapter_;
};

/// A loss produced a non-finite value while differentiating.
class GradientError : public Error {
 public:
  explicit GradientError(double value)
      : Error("non-finite loss value: " + std::to_string(value)), value_(value) {}
  double value() const noexcept { return value_; }

 private:
  double value_;
};

class TrackingError : public Error {
 public:
  using Error::Error;
};

class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class NoTargetsError : public Error {
 public:
  using Error::Error;
};

class IngestionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lgp
