#include "clinkg/errors.hpp"

#include <utility>

namespace clinkg {

namespace {

std::string located(const std::string& path, std::size_t line, const std::string& what) {
  if (line == 0) return path + ": " + what;
  return path + ":" + std::to_string(line) + ": " + what;
}

}  // namespace

InputError::InputError(std::string path, std::size_t line, const std::string& what)
    : Error(located(path, line, what)), path_(std::move(path)), line_(line) {}

ValidationError::ValidationError(std::string field, const std::string& what)
    : Error(field + ": " + what), field_(std::move(field)) {}

ProviderError::ProviderError(std::string provider, const std::string& what)
    : Error(provider + ": " + what), provider_(std::move(provider)) {}

BackendError::BackendError(std::string backend, std::string prompt_id, const std::string& what)
    : Error(backend + " [" + prompt_id + "]: " + what),
      backend_(std::move(backend)),
      prompt_id_(std::move(prompt_id)) {}

}  // namespace clinkg
