#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace wma {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// --- parsing -----------------------------------------------------------------

class MalformedLine : public Error {
 public:
  MalformedLine(std::size_t line_number, const std::string& detail)
      : Error("line " + std::to_string(line_number) + ": " + detail), line_number_(line_number) {}

  /// 1-based line number in the source text.
  std::size_t line_number() const noexcept { return line_number_; }

 private:
  std::size_t line_number_;
};

class UnparseableAction : public Error {
 public:
  using Error::Error;
};

// --- matching ----------------------------------------------------------------

class EmptyObservation : public Error {
 public:
  using Error::Error;
};

class NonFiniteCost : public Error {
 public:
  using Error::Error;
};

// --- model backends ----------------------------------------------------------

class BackendError : public Error {
 public:
  using Error::Error;
};

/// The backend could not produce a response (connection refused, timeouts,
/// HTTP failures). Callers with a deterministic fallback may recover from it.
class BackendUnavailable : public BackendError {
 public:
  using BackendError::BackendError;
};

class Timeout : public BackendUnavailable {
 public:
  using BackendUnavailable::BackendUnavailable;
};

class HttpError : public BackendUnavailable {
 public:
  HttpError(int status, const std::string& body)
      : BackendUnavailable("HTTP " + std::to_string(status) + ": " + body), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

/// Raised when a network call is attempted while the process forbids it.
class NetworkForbidden : public BackendError {
 public:
  using BackendError::BackendError;
};

class CassetteMiss : public BackendError {
 public:
  using BackendError::BackendError;
};

class ScriptMiss : public BackendError {
 public:
  using BackendError::BackendError;
};

class EmptyResponse : public BackendError {
 public:
  using BackendError::BackendError;
};

// --- environment -------------------------------------------------------------

class SchemaError : public Error {
 public:
  SchemaError(std::string pointer, const std::string& detail)
      : Error(pointer + ": " + detail), pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

class DanglingReference : public Error {
 public:
  using Error::Error;
};

class EpisodeAlreadyTerminated : public Error {
 public:
  using Error::Error;
};

class StaleSnapshot : public Error {
 public:
  using Error::Error;
};

class SnapshotUnsupported : public Error {
 public:
  using Error::Error;
};

// --- agent / data ------------------------------------------------------------

class EmptyActionList : public Error {
 public:
  using Error::Error;
};

class EmptyCandidates : public Error {
 public:
  using Error::Error;
};

class EmptyTrajectory : public Error {
 public:
  using Error::Error;
};

class InsufficientStates : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string key_path, const std::string& detail)
      : Error(key_path + ": " + detail), key_path_(std::move(key_path)) {}
  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

}  // namespace wma
