#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "muit/codegen/bundle.hpp"
#include "muit/dsl/checker.hpp"
#include "muit/dsl/parser.hpp"

using namespace muit;

namespace {

std::string corpus(const std::string& name) {
  std::ifstream in(std::string(MUIT_TEST_DATA) + "/corpus/" + name, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void BM_ParseAndCheck(benchmark::State& state) {
  auto src = corpus("coverage.muit");
  for (auto _ : state) {
    auto r = dsl::parse_source(src);
    benchmark::DoNotOptimize(dsl::check(r.module));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * src.size()));
}

void BM_Compile(benchmark::State& state) {
  auto r = dsl::parse_source(corpus("coverage.muit"));
  dsl::check(r.module);
  for (auto _ : state) benchmark::DoNotOptimize(codegen::compile(r.module, {}));
}

}  // namespace

BENCHMARK(BM_ParseAndCheck);
BENCHMARK(BM_Compile);

BENCHMARK_MAIN();
