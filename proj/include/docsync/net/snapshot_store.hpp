#pragma once

// On-disk snapshots: one `<doclet-id>.dsn1` file per hub, replaced
// atomically (write to a temp file, then rename over the old one).

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "docsync/relay/relay_server.hpp"

namespace docsync::net {

/// File name for a doclet. Bytes outside [A-Za-z0-9_.-] (and a leading '.')
/// are written as %XX so any id maps to one safe name.
std::string snapshot_file_name(const std::string& doclet);

class SnapshotStore {
 public:
  /// Creates the directory if needed.
  explicit SnapshotStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }

  /// Restores every readable snapshot into `relay`. Unreadable or corrupt
  /// files are skipped and reported in `errors`.
  std::size_t load_into(relay::RelayServer& relay, std::vector<std::string>* errors = nullptr);

  /// Writes hubs whose version moved since the last save. Returns files written.
  std::size_t save_changed(const relay::RelayServer& relay);

  /// Atomic replace of one file. Throws std::runtime_error on I/O failure.
  void write_atomic(const std::string& doclet, const std::vector<std::uint8_t>& bytes);

 private:
  std::filesystem::path dir_;
  std::map<std::string, VersionVector> saved_;
};

}  // namespace docsync::net
