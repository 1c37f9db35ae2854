#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "muit/bridge/bridge.hpp"
#include "muit/wsdl/wsdl.hpp"

using namespace muit;

namespace {

std::string slurp(const std::string& rel) {
  std::ifstream in(std::string(MUIT_TEST_DATA) + "/" + rel, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const bridge::ServiceSchema& schema() {
  static const bridge::ServiceSchema s(wsdl::parse_wsdl(slurp("wsdl/task_approval.wsdl")));
  return s;
}

const std::string& soap_text() {
  static const std::string s = slurp("soap/approve_task_request.xml");
  return s;
}

const std::string& json_text() {
  static const std::string s =
      bridge::canonical_to_json(bridge::soap_to_canonical(bridge::parse_soap(soap_text()), &schema()));
  return s;
}

void BM_SoapDecode(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(bridge::soap_to_canonical(bridge::parse_soap(soap_text()), &schema()));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * soap_text().size()));
}

void BM_JsonDecode(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(bridge::json_to_canonical(json_text(), bridge::Direction::Request));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * json_text().size()));
}

void BM_SoapEncode(benchmark::State& state) {
  auto t = bridge::soap_to_canonical(bridge::parse_soap(soap_text()), &schema());
  for (auto _ : state) benchmark::DoNotOptimize(bridge::serialize_soap(bridge::canonical_to_soap(t, &schema())));
}

void BM_JsonEncode(benchmark::State& state) {
  auto t = bridge::json_to_canonical(json_text(), bridge::Direction::Request);
  for (auto _ : state) benchmark::DoNotOptimize(bridge::canonical_to_json(t));
}

}  // namespace

BENCHMARK(BM_SoapDecode);
BENCHMARK(BM_JsonDecode);
BENCHMARK(BM_SoapEncode);
BENCHMARK(BM_JsonEncode);
