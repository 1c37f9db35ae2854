#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <spdlog/spdlog.h>

#include "muit/codegen/bundle.hpp"
#include "muit/dsl/checker.hpp"
#include "muit/dsl/diagnostic.hpp"
#include "muit/dsl/parser.hpp"
#include "muit/engine/config.hpp"
#include "muit/engine/server.hpp"
#include "muit/instance/store.hpp"
#include "muit/sim/sim.hpp"
#include "muit/util/log.hpp"
#include "muit/wsdl/wsdl.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kDomainError = 1;
constexpr int kEnvError = 2;

// Failure with an exit code and a message for standard error.
struct Exit {
  int code;
  std::string message;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Exit{kEnvError, "cannot read " + path.string()};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text) || !out.flush()) throw Exit{kEnvError, "cannot write " + path.string()};
}

// Parses and checks `source`, printing diagnostics; nullopt on errors.
std::optional<muit::dsl::DslModule> load_module(const std::string& source, const std::string& file) {
  auto parsed = muit::dsl::parse_source(source, fs::path(file).stem().string());
  auto diags = parsed.diagnostics;
  if (!muit::dsl::has_errors(diags)) {
    auto more = muit::dsl::check(parsed.module);
    diags.insert(diags.end(), more.begin(), more.end());
  }
  for (const auto& d : diags) std::cerr << muit::dsl::format(d, file) << '\n';
  if (muit::dsl::has_errors(diags)) return std::nullopt;
  return std::move(parsed.module);
}

struct CompileArgs {
  std::string source;
  std::string out;
  std::string entry;
};

int cmd_compile(const CompileArgs& a) {
  auto module = load_module(read_file(a.source), a.source);
  if (!module) return kDomainError;
  muit::codegen::CompileOptions options;
  options.entry = a.entry;
  muit::codegen::PageBundle bundle;
  try {
    bundle = muit::codegen::compile(*module, options);
  } catch (const muit::codegen::CompileError& e) {
    std::cerr << a.source << ": error: " << e.what() << '\n';
    return kDomainError;
  }
  try {
    bundle.write(a.out);
  } catch (const std::exception& e) {
    throw Exit{kEnvError, e.what()};
  }
  std::cout << "wrote " << bundle.assets.size() + 1 << " files to " << a.out << " (entry screen " << bundle.entry
            << ")\n";
  return kOk;
}

struct ImportArgs {
  std::string wsdl;
  std::string out;
};

int cmd_import(const ImportArgs& a) {
  std::string document;
  if (a.wsdl.find("://") != std::string::npos) {
    std::pair<int, std::string> res;
    try {
      res = muit::engine::BeastHttpClient(std::chrono::seconds(10)).get(a.wsdl);
    } catch (const std::exception& e) {
      throw Exit{kEnvError, "cannot fetch " + a.wsdl + ": " + e.what()};
    }
    if (res.first != 200) throw Exit{kEnvError, "cannot fetch " + a.wsdl + ": HTTP " + std::to_string(res.first)};
    document = std::move(res.second);
  } else {
    document = read_file(a.wsdl);
  }
  std::string source;
  try {
    auto model = muit::wsdl::generate_default_views(muit::wsdl::transform(muit::wsdl::parse_wsdl(document)));
    source = muit::wsdl::emit_intermediate_dsl(model);
  } catch (const muit::wsdl::WsdlError& e) {
    std::string kind = e.code() == muit::wsdl::WsdlErrc::UnsupportedStyle ? "unsupported style" : "invalid WSDL";
    std::cerr << a.wsdl << ": error: " << kind << ": " << e.what() << '\n';
    return kDomainError;
  }
  std::string name = a.out.empty() ? "imported.muit" : a.out;
  if (!load_module(source, name)) return kDomainError;
  if (a.out.empty())
    std::cout << source;
  else
    write_file(a.out, source);
  return kOk;
}

struct ServeArgs {
  std::string config;
  std::string host;
  std::optional<int> port;
  std::optional<int> threads;
  std::string public_url;
  std::string store;
};

int cmd_serve(const ServeArgs& a) {
  namespace eng = muit::engine;
  eng::AppConfig cfg;
  try {
    cfg = a.config.empty() ? eng::parse_config("") : eng::parse_config(read_file(a.config), fs::path(a.config).parent_path());
  } catch (const eng::ConfigError& e) {
    throw Exit{kDomainError, a.config + ": " + e.what()};
  }
  bool derived_url = cfg.engine.public_url == eng::default_public_url(cfg.server.host, cfg.server.port);
  if (!a.host.empty()) cfg.server.host = a.host;
  if (a.port) cfg.server.port = static_cast<std::uint16_t>(*a.port);
  if (a.threads) cfg.server.threads = *a.threads;
  if (!a.store.empty()) cfg.store_path = a.store;
  if (!a.public_url.empty())
    cfg.engine.public_url = a.public_url;
  else if (derived_url)
    cfg.engine.public_url = eng::default_public_url(cfg.server.host, cfg.server.port);

  std::vector<eng::Deployment> deployments;
  try {
    deployments = eng::load_deployments(cfg);
  } catch (const eng::ConfigError& e) {
    throw Exit{std::string(e.what()).find("cannot read") != std::string::npos ? kEnvError : kDomainError, e.what()};
  }

  std::shared_ptr<muit::instance::InstanceStore> store;
  try {
    if (cfg.store_path.empty())
      store = std::make_shared<muit::instance::MemoryStore>();
    else
      store = std::make_shared<muit::instance::FileStore>(cfg.store_path);
  } catch (const std::exception& e) {
    throw Exit{kEnvError, "cannot open store " + cfg.store_path.string() + ": " + e.what()};
  }

  // Signals are taken synchronously by this thread; every other thread
  // inherits the blocked mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  muit::instance::SystemClock clock;
  auto client = std::make_shared<eng::BeastHttpClient>();
  eng::Engine engine(cfg.engine, store, clock, client);
  for (auto& d : deployments) engine.deploy(std::move(d));
  auto recovered = engine.recover();

  eng::Server server(engine, cfg.server);
  try {
    server.start();
  } catch (const std::system_error& e) {
    throw Exit{kEnvError, e.what()};
  }
  std::cout << "listening on " << server.address() << std::endl;
  if (derived_url && cfg.server.port == 0)
    spdlog::warn("port 0 with no public_url: task links use {}", engine.config().public_url);
  if (recovered) std::cout << "recovered " << recovered << " instances" << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  std::cout << "shutting down" << std::endl;
  server.stop();
  return kOk;
}

struct SimulateArgs {
  std::string spec;
  std::string out;
  std::string json;
  std::vector<int> ns;
  std::string passivation;
  std::optional<std::uint64_t> seed;
  std::optional<int> requests;
};

int cmd_simulate(const SimulateArgs& a) {
  namespace sim = muit::sim;
  sim::SimulationPlan plan;
  try {
    if (!a.spec.empty()) plan = sim::parse_plan(read_file(a.spec));
    if (!a.ns.empty()) plan.ns = a.ns;
    if (a.passivation == "on") plan.passivation = {true};
    if (a.passivation == "off") plan.passivation = {false};
    if (a.passivation == "both") plan.passivation = {false, true};
    if (a.seed) plan.spec.seed = *a.seed;
    if (a.requests) plan.spec.requests_per_client = *a.requests;
    plan.spec.validate();
  } catch (const sim::SpecError& e) {
    throw Exit{kDomainError, (a.spec.empty() ? std::string("simulate") : a.spec) + ": " + e.what()};
  }
  std::vector<sim::RunReport> reports;
  for (bool p : plan.passivation) {
    auto s = plan.spec;
    s.passivation = p;
    try {
      for (auto& r : sim::sweep(s, plan.ns)) reports.push_back(std::move(r));
    } catch (const sim::SpecError& e) {
      throw Exit{kDomainError, e.what()};
    }
  }
  std::ostringstream csv;
  sim::write_csv(csv, reports);
  if (a.out.empty())
    std::cout << csv.str();
  else
    write_file(a.out, csv.str());
  if (!a.json.empty()) {
    auto j = nlohmann::json::array();
    for (const auto& r : reports) j.push_back(r.to_json());
    write_file(a.json, j.dump(2) + "\n");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  muit::log::init_from_env("warn");

  CLI::App app{"muit: compile task UIs, import WSDL services, run the task engine and its load simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", MUIT_VERSION);
  std::string log_level;
  app.add_option("--log-level", log_level, "Log level: trace, debug, info, warn, error or off (default: $MUIT_LOG, else warn)")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  CompileArgs compile;
  auto* c = app.add_subcommand("compile", "Compile a .muit module into a page bundle");
  c->add_option("source", compile.source, "Module source file (.muit)")->required();
  c->add_option("-o,--out", compile.out, "Directory the bundle is written to")->required();
  c->add_option("--entry", compile.entry, "Entry screen (default: first screen without parameters)");

  ImportArgs import;
  auto* i = app.add_subcommand("import-wsdl", "Derive an intermediate .muit module from a WSDL document");
  i->add_option("wsdl", import.wsdl, "WSDL file path or http:// URL")->required();
  i->add_option("-o,--out", import.out, "Output .muit file (default: standard output)");

  ServeArgs serve;
  auto* s = app.add_subcommand("serve", "Run the task engine HTTP service until SIGINT or SIGTERM");
  s->add_option("-c,--config", serve.config, "Engine config file (TOML-style key = value sections)");
  s->add_option("--host", serve.host, "Listen address (overrides [server] host)");
  s->add_option("-p,--port", serve.port, "Listen port, 0 for any free port (overrides [server] port)")
      ->check(CLI::Range(0, 65535));
  s->add_option("--threads", serve.threads, "I/O threads (overrides [server] threads)")->check(CLI::Range(1, 256));
  s->add_option("--public-url", serve.public_url, "Base URL used in task links (overrides [server] public_url)");
  s->add_option("--store", serve.store, "Instance store file (overrides [instances] store_path)");

  SimulateArgs simulate;
  auto* m = app.add_subcommand("simulate", "Run the passivation load simulation and write a CSV report");
  m->add_option("-s,--spec", simulate.spec, "Workload file with a [workload] section");
  m->add_option("-o,--out", simulate.out, "CSV report file (default: standard output)");
  m->add_option("--json", simulate.json, "Also write the full reports as JSON to this file");
  m->add_option("-n,--n", simulate.ns, "Concurrent request counts, e.g. -n 100 500 1000 (overrides n_values)")
      ->check(CLI::PositiveNumber);
  m->add_option("--passivation", simulate.passivation, "Passivation setting: on, off or both (overrides the workload file)")
      ->check(CLI::IsMember({"on", "off", "both"}));
  m->add_option("--seed", simulate.seed, "Random seed (overrides the workload file)");
  m->add_option("--requests-per-client", simulate.requests, "Requests each caller issues (overrides the workload file)")
      ->check(CLI::PositiveNumber);

  auto* v = app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kEnvError;
  }
  if (!log_level.empty()) muit::log::set_level(log_level);

  try {
    if (c->parsed()) return cmd_compile(compile);
    if (i->parsed()) return cmd_import(import);
    if (s->parsed()) return cmd_serve(serve);
    if (m->parsed()) return cmd_simulate(simulate);
    if (v->parsed()) {
      std::cout << "muit " << MUIT_VERSION << '\n';
      return kOk;
    }
  } catch (const Exit& e) {
    std::cerr << "muit: " << e.message << '\n';
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "muit: " << e.what() << '\n';
    return kEnvError;
  }
  return kOk;
}
