#include <benchmark/benchmark.h>

#include "rtlmend/elaborate.hpp"
#include "rtlmend/errgen.hpp"
#include "rtlmend/frontend.hpp"
#include "rtlmend/lint.hpp"

namespace {

const std::vector<rtlmend::CorpusEntry>& corpus() {
  static const auto c = rtlmend::load_corpus(RTLMEND_CORPUS_DIR);
  return c;
}

void BM_ParseCorpus(benchmark::State& state) {
  std::size_t bytes = 0;
  for (auto _ : state) {
    for (const auto& e : corpus()) {
      auto r = rtlmend::parse_text(e.text, e.path);
      benchmark::DoNotOptimize(r);
      bytes += e.text.size();
    }
  }
  state.SetBytesProcessed(static_cast<int64_t>(bytes));
}
BENCHMARK(BM_ParseCorpus);

void BM_RoundTripCorpus(benchmark::State& state) {
  for (auto _ : state) {
    for (const auto& e : corpus()) {
      auto r = rtlmend::parse_text(e.text, e.path);
      auto again = rtlmend::parse_text(rtlmend::print(*r.design));
      benchmark::DoNotOptimize(rtlmend::structurally_equal(*r.design, *again.design));
    }
  }
}
BENCHMARK(BM_RoundTripCorpus);

void BM_ElaborateAndLint(benchmark::State& state) {
  std::vector<rtlmend::Design> designs;
  for (const auto& e : corpus()) designs.push_back(*rtlmend::parse_text(e.text, e.path).design);
  for (auto _ : state) {
    for (const auto& d : designs) {
      auto el = rtlmend::elaborate(d);
      benchmark::DoNotOptimize(el);
      benchmark::DoNotOptimize(rtlmend::lint(d));
    }
  }
}
BENCHMARK(BM_ElaborateAndLint);

}  // namespace
