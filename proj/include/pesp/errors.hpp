#pragma once

#include <stdexcept>
#include <string>

namespace pesp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InfeasibleFirstStage : public Error {
 public:
  using Error::Error;
};

class ObservationOutOfSupport : public Error {
 public:
  using Error::Error;
};

class InfiniteSupport : public Error {
 public:
  using Error::Error;
};

class SizeLimitExceeded : public Error {
 public:
  using Error::Error;
};

class BackendUnavailable : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, std::string diagnostics)
      : Error(what), diagnostics_(std::move(diagnostics)) {}
  explicit SolverFailure(const std::string& what) : Error(what) {}
  const std::string& diagnostics() const { return diagnostics_; }

 private:
  std::string diagnostics_;
};

class SupportTooLarge : public Error {
 public:
  using Error::Error;
};

class ContinuousUnsupported : public Error {
 public:
  using Error::Error;
};

}  // namespace pesp
