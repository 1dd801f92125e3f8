#include "asrkit/error.hpp"

namespace asrkit {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "io";
    case ErrorKind::Format: return "format";
    case ErrorKind::UnsupportedCodec: return "unsupported-codec";
    case ErrorKind::Write: return "write";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::DegenerateInput: return "degenerate-input";
    case ErrorKind::Charset: return "charset";
    case ErrorKind::FeatureLookup: return "feature-lookup";
    case ErrorKind::UndefinedMetric: return "undefined-metric";
    case ErrorKind::Hygiene: return "hygiene";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Pairing: return "pairing";
    case ErrorKind::Validation: return "validation";
  }
  return "unknown";
}

}  // namespace asrkit
