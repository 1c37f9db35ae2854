#include "muit/instance/store.hpp"

#include <unistd.h>

#include <fstream>
#include <stdexcept>
#include <system_error>

namespace muit::instance {

void MemoryStore::put(const std::string& key, const std::string& record) {
  std::lock_guard lock(mu_);
  records_[key] = record;
}

std::optional<std::string> MemoryStore::get(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = records_.find(key);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

void MemoryStore::erase(const std::string& key) {
  std::lock_guard lock(mu_);
  records_.erase(key);
}

std::vector<std::pair<std::string, std::string>> MemoryStore::load_all() const {
  std::lock_guard lock(mu_);
  return {records_.begin(), records_.end()};
}

std::size_t MemoryStore::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

namespace {

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key)
    if (c == ' ' || c == '\n' || c == '\r') return false;
  return true;
}

}  // namespace

FileStore::FileStore(std::filesystem::path path) : FileStore(std::move(path), Options{}) {}

FileStore::FileStore(std::filesystem::path path, Options options) : path_(std::move(path)), options_(options) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ifstream in(path_, std::ios::binary);
  if (in) {
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    std::size_t good_end = 0;
    while (pos < content.size()) {
      auto nl = content.find('\n', pos);
      if (nl == std::string::npos) break;  // torn tail
      std::string_view line(content.data() + pos, nl - pos);
      if (line.rfind("put ", 0) == 0) {
        auto sp = line.find(' ', 4);
        if (sp != std::string_view::npos)
          records_[std::string(line.substr(4, sp - 4))] = std::string(line.substr(sp + 1));
      } else if (line.rfind("del ", 0) == 0) {
        records_.erase(std::string(line.substr(4)));
      }
      ++lines_;
      pos = nl + 1;
      good_end = pos;
    }
    in.close();
    if (good_end < content.size()) std::filesystem::resize_file(path_, good_end);
  }
  open_for_append();
}

FileStore::~FileStore() {
  if (file_) std::fclose(file_);
}

void FileStore::open_for_append() {
  file_ = std::fopen(path_.c_str(), "ab");
  if (!file_) throw std::system_error(errno, std::generic_category(), "cannot open store " + path_.string());
}

void FileStore::append(const std::string& line) {
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fflush(file_) != 0)
    throw std::system_error(errno, std::generic_category(), "store write failed");
  if (options_.sync) ::fdatasync(::fileno(file_));
  ++lines_;
}

void FileStore::put(const std::string& key, const std::string& record) {
  if (!valid_key(key)) throw std::invalid_argument("invalid store key");
  if (record.find('\n') != std::string::npos) throw std::invalid_argument("store records are single-line");
  std::lock_guard lock(mu_);
  append("put " + key + " " + record + "\n");
  records_[key] = record;
  maybe_compact();
}

std::optional<std::string> FileStore::get(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = records_.find(key);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

void FileStore::erase(const std::string& key) {
  std::lock_guard lock(mu_);
  if (!records_.erase(key)) return;
  append("del " + key + "\n");
  maybe_compact();
}

std::vector<std::pair<std::string, std::string>> FileStore::load_all() const {
  std::lock_guard lock(mu_);
  return {records_.begin(), records_.end()};
}

std::size_t FileStore::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

std::size_t FileStore::log_lines() const {
  std::lock_guard lock(mu_);
  return lines_;
}

void FileStore::maybe_compact() {
  if (lines_ >= options_.compact_min_lines && lines_ > 2 * records_.size()) {
    std::fclose(file_);
    file_ = nullptr;
    auto tmp = path_;
    tmp += ".tmp";
    std::FILE* out = std::fopen(tmp.c_str(), "wb");
    if (!out) throw std::system_error(errno, std::generic_category(), "store compaction failed");
    bool ok = true;
    for (const auto& [k, v] : records_) {
      std::string line = "put " + k + " " + v + "\n";
      ok = ok && std::fwrite(line.data(), 1, line.size(), out) == line.size();
    }
    ok = ok && std::fflush(out) == 0;
    if (ok && options_.sync) ::fdatasync(::fileno(out));
    std::fclose(out);
    if (!ok) throw std::runtime_error("store compaction failed");
    std::filesystem::rename(tmp, path_);
    lines_ = records_.size();
    open_for_append();
  }
}

void FileStore::compact() {
  std::lock_guard lock(mu_);
  auto min = options_.compact_min_lines;
  options_.compact_min_lines = 0;
  lines_ = std::max(lines_, 2 * records_.size() + 1);
  maybe_compact();
  options_.compact_min_lines = min;
}

}  // namespace muit::instance
