#include <doctest.h>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string data(const std::string& rel) { return std::string(MUIT_TEST_DATA) + "/" + rel; }

struct ScratchCleanup {
  ~ScratchCleanup() {
    std::error_code ec;
    fs::remove_all(fs::temp_directory_path() / ("muit-cli-" + std::to_string(::getpid())), ec);
  }
} cleanup;

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("muit-cli-" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Runs the CLI with stdout and stderr captured to files.
Run muit(const std::vector<std::string>& args) {
  auto dir = scratch("io");
  auto out = dir / "out", err = dir / "err";
  pid_t pid = ::fork();
  REQUIRE(pid >= 0);
  if (pid == 0) {
    int o = ::open(out.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    int e = ::open(err.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    ::dup2(o, 1);
    ::dup2(e, 2);
    std::vector<char*> argv{const_cast<char*>(MUIT_CLI)};
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    ::execv(MUIT_CLI, argv.data());
    ::_exit(127);
  }
  int status = 0;
  ::waitpid(pid, &status, 0);
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

// Long options (--name) documented by a help text.
std::vector<std::string> long_options(const std::string& help) {
  std::vector<std::string> names;
  std::regex re(R"(--([a-z][a-z0-9-]*))");
  for (std::sregex_iterator it(help.begin(), help.end(), re), end; it != end; ++it) names.push_back((*it)[1]);
  return names;
}

}  // namespace

TEST_CASE("help documents every subcommand and flag") {
  auto top = muit({"--help"});
  CHECK(top.code == 0);
  for (const char* sub : {"compile", "import-wsdl", "serve", "simulate", "version"})
    CHECK_MESSAGE(top.out.find(sub) != std::string::npos, sub);
  CHECK(top.out.find("--log-level") != std::string::npos);

  std::map<std::string, std::vector<std::string>> flags = {
      {"compile", {"out", "entry"}},
      {"import-wsdl", {"out"}},
      {"serve", {"config", "host", "port", "threads", "public-url", "store"}},
      {"simulate", {"spec", "out", "json", "n", "passivation", "seed", "requests-per-client"}},
  };
  for (const auto& [sub, expected] : flags) {
    auto h = muit({sub, "--help"});
    CHECK(h.code == 0);
    auto documented = long_options(h.out);
    std::vector<std::string> lines;
    std::istringstream in(h.out);
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    for (const auto& f : expected) {
      CAPTURE(sub);
      CAPTURE(f);
      CHECK(std::find(documented.begin(), documented.end(), f) != documented.end());
      // The flag carries a description, on its own line or wrapped below it.
      std::regex flag_re("--" + f + R"(\b)");
      bool described = false;
      for (std::size_t k = 0; k < lines.size(); ++k)
        if (std::regex_search(lines[k], flag_re))
          described = std::regex_search(lines[k], std::regex(R"(\S\s{2,}[A-Z])")) ||
                      (k + 1 < lines.size() && std::regex_match(lines[k + 1], std::regex(R"(\s{10,}[A-Z].*)")));
      CHECK(described);
    }
  }
}

TEST_CASE("version") {
  auto v = muit({"version"});
  CHECK(v.code == 0);
  CHECK(std::regex_match(v.out, std::regex(R"(muit \d+\.\d+\.\d+\n)")));
}

TEST_CASE("usage errors exit with 2") {
  CHECK(muit({}).code == 2);
  CHECK(muit({"frobnicate"}).code == 2);
  CHECK(muit({"compile"}).code == 2);
  CHECK(muit({"simulate", "--passivation", "sometimes"}).code == 2);
  CHECK(muit({"--log-level", "loud", "version"}).code == 2);
}

TEST_CASE("compile writes a bundle for every corpus module") {
  for (const char* name : {"approve_task", "coverage", "delay_task", "device_type", "screen_estate",
                           "touch_swipe"}) {
    auto out = scratch(std::string("bundle-") + name);
    auto r = muit({"compile", data(std::string("corpus/") + name + ".muit"), "--out", out.string()});
    CAPTURE(name);
    CAPTURE(r.err);
    CHECK(r.code == 0);
    CHECK(r.err.empty());
    REQUIRE(fs::exists(out / "manifest.json"));
    auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(manifest.contains("entry"));
    CHECK(fs::exists(out / "app.js"));
  }
}

TEST_CASE("compile reports diagnostics with exit 1") {
  auto screenless = muit({"compile", data("corpus/data_model.muit"), "-o", scratch("screenless").string()});
  CHECK(screenless.code == 1);
  CHECK(screenless.err.find("no screens") != std::string::npos);

  auto dir = scratch("bad");
  std::ofstream(dir / "typo.muit") << "var x = 1;\nvar y = x + ;\n";
  auto r = muit({"compile", (dir / "typo.muit").string(), "-o", (dir / "out").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("typo.muit:2:") != std::string::npos);
  CHECK(r.err.find("error") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out" / "manifest.json"));

  auto missing = muit({"compile", (dir / "absent.muit").string(), "-o", (dir / "out").string()});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("cannot read") != std::string::npos);
}

TEST_CASE("import-wsdl emits a module that compiles") {
  auto dir = scratch("import");
  for (const char* w : {"task_approval", "reimbursement_task", "void_output"}) {
    auto src = dir / (std::string(w) + ".muit");
    auto r = muit({"import-wsdl", data(std::string("wsdl/") + w + ".wsdl"), "--out", src.string()});
    CAPTURE(w);
    CAPTURE(r.err);
    REQUIRE(r.code == 0);
    CHECK(muit({"compile", src.string(), "--out", (dir / w).string()}).code == 0);
  }
  auto to_stdout = muit({"import-wsdl", data("wsdl/task_approval.wsdl")});
  CHECK(to_stdout.code == 0);
  CHECK(to_stdout.out == slurp(dir / "task_approval.muit"));
}

TEST_CASE("import-wsdl failures") {
  auto rpc = muit({"import-wsdl", data("wsdl/rpc_encoded.wsdl")});
  CHECK(rpc.code == 1);
  CHECK(rpc.err.find("unsupported style") != std::string::npos);
  CHECK(rpc.out.empty());
  CHECK(muit({"import-wsdl", data("wsdl/no_such.wsdl")}).code == 2);
  // Nothing listens on port 9 of the loopback interface.
  CHECK(muit({"import-wsdl", "http://127.0.0.1:9/service?wsdl"}).code == 2);
}

TEST_CASE("simulate writes one CSV row per N and passivation setting") {
  auto dir = scratch("sim");
  std::ofstream(dir / "plan.toml") << "[workload]\nn_values = 20, 40, 60\npassivation = on\nseed = 3\n";
  auto csv = dir / "report.csv";
  auto r = muit({"simulate", "--spec", (dir / "plan.toml").string(), "--out", csv.string(), "--json",
                 (dir / "report.json").string()});
  CHECK(r.code == 0);
  std::istringstream in(slurp(csv));
  std::vector<std::string> rows;
  for (std::string line; std::getline(in, line);) rows.push_back(line);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "N,mode,passivation,ART_s,p95_s,peak_live");
  CHECK(rows[1].rfind("20,async,on,", 0) == 0);
  CHECK(rows[3].rfind("60,async,on,", 0) == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "report.json")).size() == 3);

  auto both = muit({"simulate", "-n", "10", "--passivation", "both", "--requests-per-client", "2"});
  CHECK(both.code == 0);
  CHECK(both.out.find("10,async,off,") != std::string::npos);
  CHECK(both.out.find("10,async,on,") != std::string::npos);

  std::ofstream(dir / "bad.toml") << "[workload]\ndelayed_fraction = 3\n";
  auto bad = muit({"simulate", "--spec", (dir / "bad.toml").string()});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("delayed_fraction") != std::string::npos);
}

TEST_CASE("serve announces its address and stops on SIGTERM") {
  auto dir = scratch("serve");
  {
    std::ofstream cfg(dir / "muit.toml");
    cfg << "[server]\nport = 0\n[notify]\nmanager = log\n[deploy.taskApproval]\nsource = "
        << data("engine/task_service.muit") << "\nwsdl = " << data("engine/task_service.wsdl")
        << "\nrecipient = manager\n";
  }
  int pipefd[2];
  REQUIRE(::pipe(pipefd) == 0);
  pid_t pid = ::fork();
  REQUIRE(pid >= 0);
  if (pid == 0) {
    ::dup2(pipefd[1], 1);
    ::close(pipefd[0]);
    std::string cfg = (dir / "muit.toml").string();
    std::string store = (dir / "instances.log").string();
    ::execl(MUIT_CLI, MUIT_CLI, "serve", "--config", cfg.c_str(), "--store", store.c_str(), nullptr);
    ::_exit(127);
  }
  ::close(pipefd[1]);
  std::string out;
  auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(2);
  while (out.find('\n') == std::string::npos && std::chrono::steady_clock::now() < deadline) {
    pollfd p{pipefd[0], POLLIN, 0};
    if (::poll(&p, 1, 50) > 0) {
      char buf[256];
      auto n = ::read(pipefd[0], buf, sizeof buf);
      if (n <= 0) break;
      out.append(buf, static_cast<std::size_t>(n));
    }
  }
  CHECK(std::regex_search(out, std::regex(R"(^listening on http://127\.0\.0\.1:\d+\n)")));
  ::kill(pid, SIGTERM);
  int status = 0;
  ::waitpid(pid, &status, 0);
  ::close(pipefd[0]);
  CHECK(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 0);
}

TEST_CASE("serve configuration errors") {
  auto dir = scratch("serve-bad");
  std::ofstream(dir / "unknown.toml") << "[server]\nport = 0\nbogus = 1\n";
  auto unknown = muit({"serve", "--config", (dir / "unknown.toml").string()});
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("bogus") != std::string::npos);
  CHECK(muit({"serve", "--config", (dir / "absent.toml").string()}).code == 2);
  CHECK(muit({"serve", "--port", "70000"}).code == 2);
}
