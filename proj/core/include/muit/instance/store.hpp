#pragma once

#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace muit::instance {

// Durable map from key to serialized record. Implementations are thread-safe.
class InstanceStore {
 public:
  virtual ~InstanceStore() = default;
  virtual void put(const std::string& key, const std::string& record) = 0;
  virtual std::optional<std::string> get(const std::string& key) const = 0;
  virtual void erase(const std::string& key) = 0;
  virtual std::vector<std::pair<std::string, std::string>> load_all() const = 0;
  virtual std::size_t size() const = 0;
};

class MemoryStore final : public InstanceStore {
 public:
  void put(const std::string& key, const std::string& record) override;
  std::optional<std::string> get(const std::string& key) const override;
  void erase(const std::string& key) override;
  std::vector<std::pair<std::string, std::string>> load_all() const override;
  std::size_t size() const override;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::string> records_;
};

// Single-file append log: one `put <key> <record>` or `del <key>` line per
// write. A torn final line (crash mid-write) is ignored on open. The log is
// rewritten once dead lines outnumber live records.
class FileStore final : public InstanceStore {
 public:
  struct Options {
    bool sync = true;  // fdatasync after every append
    std::size_t compact_min_lines = 64;
  };

  explicit FileStore(std::filesystem::path path);
  FileStore(std::filesystem::path path, Options options);
  ~FileStore() override;
  FileStore(const FileStore&) = delete;
  FileStore& operator=(const FileStore&) = delete;

  void put(const std::string& key, const std::string& record) override;
  std::optional<std::string> get(const std::string& key) const override;
  void erase(const std::string& key) override;
  std::vector<std::pair<std::string, std::string>> load_all() const override;
  std::size_t size() const override;

  void compact();
  std::size_t log_lines() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  void append(const std::string& line);
  void maybe_compact();
  void open_for_append();

  std::filesystem::path path_;
  Options options_;
  mutable std::mutex mu_;
  std::map<std::string, std::string> records_;
  std::FILE* file_ = nullptr;
  std::size_t lines_ = 0;
};

}  // namespace muit::instance
