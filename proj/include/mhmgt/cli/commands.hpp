#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mhmgt::cli {

/// Flags shared by every verb. A seed must come from here or the config.
struct CommonOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = ".";
  bool quick = false;
};

struct CommandOutcome {
  std::vector<std::filesystem::path> files;
  bool ok = true;  // false when the run finished but a checked property failed
  std::string summary;
};

// Files whose name contains ".timing." hold wall-clock measurements; all
// other outputs depend only on the seed and the resolved config.

CommandOutcome cmd_chain(const CommonOptions& options);
CommandOutcome cmd_benchmark(const CommonOptions& options);
CommandOutcome cmd_hb(const CommonOptions& options);
CommandOutcome cmd_theorem(const CommonOptions& options);
CommandOutcome cmd_mixing_scan(const CommonOptions& options);

}  // namespace mhmgt::cli
