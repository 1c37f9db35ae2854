#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace muit::sim {

class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// One load run: N callers, each issuing `requests_per_client` task requests
// back to back. A request is created, waits for its human (no wait, or
// `delay_s` for the delayed share), then needs `service_time_s` of
// processing. Processing is shared: every unit of engine overhead slows all
// in-progress requests alike.
struct WorkloadSpec {
  int n = 100;
  int requests_per_client = 10;
  double sync_fraction = 0.0;
  double service_time_s = 2.0;
  double delayed_fraction = 0.2;
  double delay_s = 60.0;
  bool passivation = true;
  double idle_threshold_s = 0.0;
  int workers = 1000;  // live instances each hold one worker
  std::uint64_t seed = 42;

  // Overhead per live idle instance, per passivated record and per parked
  // sync connection, relative to one request's own processing.
  double idle_cost = 0.0125;
  double passivated_cost = 0.0002;
  double parked_cost = 0.0005;

  // Throws SpecError naming the offending field.
  void validate() const;
  std::string mode() const;  // "async", "sync" or "mixed"
  nlohmann::json to_json() const;
};

struct RequestRecord {
  std::uint64_t index = 0;
  int client = 0;
  bool delayed = false;
  bool sync = false;
  bool faulted = false;
  double issued_at = 0;
  double latency_s = 0;  // issue to completion
};

struct RunReport {
  WorkloadSpec spec;
  std::uint64_t issued = 0;
  std::uint64_t completed = 0;
  std::uint64_t faulted = 0;
  std::uint64_t delivered = 0;  // callbacks posted plus parked answers
  double art_s = 0;             // mean latency of completed non-delayed requests
  double p95_s = 0;
  std::uint64_t art_samples = 0;
  std::size_t peak_live = 0;  // instances holding a worker
  std::size_t peak_processing = 0;
  std::size_t peak_passivated = 0;
  double live_instance_seconds = 0;
  double duration_s = 0;
  std::vector<RequestRecord> requests;

  nlohmann::json to_json(bool with_requests = false) const;
};

// Runs the workload against an in-process engine on a virtual clock.
// Deterministic: the same spec yields the same report.
RunReport run(const WorkloadSpec& spec);

// run() once per N.
std::vector<RunReport> sweep(const WorkloadSpec& base, const std::vector<int>& ns);

inline const std::vector<int> kDefaultSweep = {100, 500, 1000};

// N,mode,passivation,ART_s,p95_s,peak_live
void write_csv(std::ostream& out, const std::vector<RunReport>& reports);
std::string csv_row(const RunReport& report);

// Workload file: a [workload] section with the WorkloadSpec field names plus
// `n_values` (comma separated) and `passivation` = on | off | both.
struct SimulationPlan {
  WorkloadSpec spec;
  std::vector<int> ns = kDefaultSweep;
  std::vector<bool> passivation = {true};
};
SimulationPlan parse_plan(std::string_view text);

}  // namespace muit::sim
