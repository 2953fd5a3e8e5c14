#pragma once

#include <string>
#include <vector>

namespace pat::cli {

// Full command-line entry point (subcommands gen / train / eval / recon);
// main() forwards here so tests can drive the exact CLI path in-process.
// Returns the process exit code: 0 only when every requested output was
// written.
int dispatch(const std::vector<std::string>& args);

}  // namespace pat::cli
