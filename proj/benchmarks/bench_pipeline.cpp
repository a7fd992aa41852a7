#include <benchmark/benchmark.h>

#include "rtlmend/agent.hpp"
#include "rtlmend/bench.hpp"
#include "rtlmend/errgen.hpp"
#include "rtlmend/orchestrator.hpp"

namespace {

const std::vector<rtlmend::CorpusEntry>& corpus() {
  static const auto c = rtlmend::load_corpus(RTLMEND_CORPUS_DIR);
  return c;
}

void BM_BuildBenchmark(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(rtlmend::build_benchmark(corpus(), rtlmend::BenchmarkPlan::uniform(1), 1, 1));
}
BENCHMARK(BM_BuildBenchmark)->Unit(benchmark::kMillisecond);

void BM_DiffAndApply(benchmark::State& state) {
  const auto& e = corpus().front();
  std::string mutated = e.text;
  auto pos = mutated.find(';');
  mutated.insert(pos, " ");
  for (auto _ : state) {
    rtlmend::PatchSet ps{rtlmend::diff_pairs(mutated, e.text), {}};
    benchmark::DoNotOptimize(rtlmend::apply_patchset(mutated, ps));
  }
}
BENCHMARK(BM_DiffAndApply);

void BM_OracleSession(benchmark::State& state) {
  static const auto set = rtlmend::build_benchmark(corpus(), rtlmend::BenchmarkPlan::uniform(1), 1, 1);
  const auto& m = set.mutants.front();
  const auto* g = set.golden(m.module);
  rtlmend::SessionConfig cfg;
  for (auto _ : state) {
    rtlmend::OracleBackend backend(g->text);
    benchmark::DoNotOptimize(rtlmend::run_session(rtlmend::SourceFile("dut.v", m.mutated),
                                                  rtlmend::SourceFile("golden.v", g->text), g->spec, backend, cfg));
  }
}
BENCHMARK(BM_OracleSession)->Unit(benchmark::kMillisecond);

}  // namespace
