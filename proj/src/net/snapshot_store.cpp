#include "docsync/net/snapshot_store.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace docsync::net {

namespace fs = std::filesystem;

namespace {

constexpr const char* kExtension = ".dsn1";

bool plain(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
         c == '.';
}

}  // namespace

std::string snapshot_file_name(const std::string& doclet) {
  std::string out;
  for (std::size_t i = 0; i < doclet.size(); ++i) {
    auto c = static_cast<unsigned char>(doclet[i]);
    if (plain(c) && !(i == 0 && c == '.')) {
      out += static_cast<char>(c);
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out += buf;
    }
  }
  return out + kExtension;
}

SnapshotStore::SnapshotStore(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

std::size_t SnapshotStore::load_into(relay::RelayServer& relay, std::vector<std::string>* errors) {
  std::size_t loaded = 0;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (!entry.is_regular_file() || entry.path().extension() != kExtension) {
      continue;
    }
    std::ifstream in(entry.path(), std::ios::binary);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
      const auto& hub = relay.restore(bytes);
      saved_[hub.doclet.id().str()] = hub.doclet.doc().version();
      ++loaded;
    } catch (const std::exception& e) {
      if (errors) errors->push_back(entry.path().string() + ": " + e.what());
    }
  }
  return loaded;
}

std::size_t SnapshotStore::save_changed(const relay::RelayServer& relay) {
  std::size_t written = 0;
  for (const auto& id : relay.hub_ids()) {
    const auto& version = relay.hub(id)->doclet.doc().version();
    auto it = saved_.find(id);
    if (it != saved_.end() && it->second == version) {
      continue;
    }
    write_atomic(id, relay.snapshot(id));
    saved_[id] = version;
    ++written;
  }
  return written;
}

void SnapshotStore::write_atomic(const std::string& doclet, const std::vector<std::uint8_t>& bytes) {
  fs::path target = dir_ / snapshot_file_name(doclet);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      throw std::runtime_error("cannot write " + tmp.string());
    }
  }
  fs::rename(tmp, target);
}

}  // namespace docsync::net
