#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace asrkit {

enum class ErrorKind {
  Io,
  Format,
  UnsupportedCodec,
  Write,
  Parameter,
  DegenerateInput,
  Charset,
  FeatureLookup,
  UndefinedMetric,
  Hygiene,
  Schema,
  Pairing,
  Validation,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the toolkit; the kind selects the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace asrkit
