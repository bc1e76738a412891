#pragma once

#include <stdexcept>
#include <string>

namespace avcons {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument passed to a numeric operation (negative distance, dt <= 0, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration document: zone layout, geometry, run config.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input file does not provide the columns the schema mapping asks for.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class EmptyDatasetError : public Error {
 public:
  using Error::Error;
};

/// Track too short for the requested resampling step.
class SingleSampleTrackError : public Error {
 public:
  using Error::Error;
};

/// Tracks do not cover the requested analysis window.
class WindowCoverageError : public Error {
 public:
  using Error::Error;
};

/// Scenario description with unsupported primitive or invalid parameters.
class SpecError : public Error {
 public:
  using Error::Error;
};

class EmptySummaryError : public Error {
 public:
  using Error::Error;
};

/// A pipeline stage needs an upstream artifact that is missing or stale.
class MissingDependencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace avcons
