#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "rlw/train.hpp"

namespace rlw {

inline constexpr int kCheckpointFormatVersion = 1;

/// Everything needed to rebuild a trained field: the resolved training
/// configuration, one parameter vector per window and the loss history.
struct Checkpoint {
  TrainConfig config;
  std::vector<NetworkWindow> windows;
  std::vector<HistoryEntry> history;
  bool aborted = false;
  std::optional<std::size_t> failed_window;

  static Checkpoint from_result(const TrainConfig& cfg, const TrainResult& result);
  SolutionField field() const;
};

/// JSON document. Parameters and input scalings are written as C99
/// hexadecimal floats, so load(save(cp)) reproduces every bit.
void checkpoint_save(const Checkpoint& cp, const std::filesystem::path& path);
/// Throws LoadError for unreadable or malformed files and
/// UnsupportedVersionError when format_version is not ours.
Checkpoint checkpoint_load(const std::filesystem::path& path);

}  // namespace rlw
