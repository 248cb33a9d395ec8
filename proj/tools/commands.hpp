#pragma once

#include <optional>
#include <string>

#include "json.hpp"

namespace exiffi::cli {

using Json = nlohmann::json;

// Executes one subcommand from its fully resolved configuration and writes
// every output file, plus a run manifest, into cfg["out_dir"].  Exceptions
// propagate to the caller, which owns the exit-code mapping.
void run(const std::string& subcommand, const Json& cfg);

// Re-runs the subcommand recorded in a manifest.  Inputs are re-hashed and
// must match the recorded digests.  out_dir overrides the recorded output
// directory (empty selects a "replay" directory next to the manifest);
// threads, when given, overrides the recorded worker count.  Numeric outputs
// are bitwise identical to the original run's.
void replay(const std::string& manifest_path, std::string out_dir,
            std::optional<unsigned> threads);

}  // namespace exiffi::cli
