#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace muit::test {

inline std::filesystem::path data_dir() { return MUIT_TEST_DATA; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string corpus(const std::string& name) {
  return read_file(data_dir() / "corpus" / name);
}

}  // namespace muit::test

#include <cstdio>

namespace muit::test {

// Runs a command and returns its standard output; empty if it failed.
inline std::string run_command(const std::string& cmd) {
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return out;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  if (pclose(p) != 0) out.clear();
  return out;
}

inline bool have_python() { return std::string(MUIT_PYTHON).size() > 0; }
inline bool have_node() { return std::string(MUIT_NODE).size() > 0; }

}  // namespace muit::test
