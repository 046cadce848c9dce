#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace clinkg {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `line` is 1-based, 0 when not line-oriented.
class InputError : public Error {
 public:
  InputError(std::string path, std::size_t line, const std::string& what);

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

/// A configuration value is out of range or of the wrong type.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what);

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// An embedding, alias or NER provider failed.
class ProviderError : public Error {
 public:
  ProviderError(std::string provider, const std::string& what);

  const std::string& provider() const noexcept { return provider_; }

 private:
  std::string provider_;
};

/// Retryable failure of a model backend call (timeout, connection reset, 5xx).
class TransportError : public Error {
 public:
  using Error::Error;
};

/// A backend call that failed for good, either because it is not retryable or
/// because the retry budget ran out.
class BackendError : public Error {
 public:
  BackendError(std::string backend, std::string prompt_id, const std::string& what);

  const std::string& backend() const noexcept { return backend_; }
  const std::string& prompt_id() const noexcept { return prompt_id_; }

 private:
  std::string backend_;
  std::string prompt_id_;
};

}  // namespace clinkg
