#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "asrkit/error.hpp"

namespace asrkit {

// Process exit codes; one per error family.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitIo = 3,
  kExitFormat = 4,
  kExitCharset = 5,
  kExitHygiene = 6,
  kExitPairing = 7,
  kExitValidation = 8,
  kExitUndefinedMetric = 9,
  kExitParameter = 10,
  kExitSchema = 11,
  kExitFeatureLookup = 12,
};

int exit_code_for(ErrorKind kind);

// args excludes the program name. Subcommands: ingest, split, augment, eval,
// taxonomy, validate.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace asrkit
