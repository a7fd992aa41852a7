#include <benchmark/benchmark.h>

#include "rtlmend/elaborate.hpp"
#include "rtlmend/sim.hpp"
#include "rtlmend/testbench.hpp"

namespace {

constexpr const char* kCounter = R"(module counter8(clk, rst_n, en, count);
  input clk;
  input rst_n;
  input en;
  output reg [7:0] count;
  always @(posedge clk or negedge rst_n) begin
    if (!rst_n) count <= 8'd0;
    else if (en) count <= count + 8'd1;
  end
endmodule
)";

constexpr const char* kMult = R"(module mult4(a, b, p);
  input [3:0] a;
  input [3:0] b;
  output reg [7:0] p;
  integer i;
  always @(*) begin
    p = 8'd0;
    for (i = 0; i < 4; i = i + 1)
      if (b[i]) p = p + (a << i);
  end
endmodule
)";

void BM_SimulateCounter(benchmark::State& state) {
  auto d = rtlmend::compile_text(kCounter);
  auto prog = rtlmend::SimProgram::build(*d.design);
  auto cycles = static_cast<std::size_t>(state.range(0));
  auto stim = rtlmend::make_stimulus(*d.design, rtlmend::StimulusMode::kRandom, 1, cycles);
  for (auto _ : state) benchmark::DoNotOptimize(rtlmend::simulate(*prog, stim, cycles));
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_SimulateCounter)->Arg(256)->Arg(4096);

void BM_ExhaustiveMultiplier(benchmark::State& state) {
  auto d = rtlmend::compile_text(kMult);
  auto prog = rtlmend::SimProgram::build(*d.design);
  auto stim = rtlmend::make_stimulus(*d.design, rtlmend::StimulusMode::kExhaustive, 0, 0);
  for (auto _ : state) benchmark::DoNotOptimize(rtlmend::simulate(*prog, stim, stim.cycles(), false));
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * stim.cycles()));
}
BENCHMARK(BM_ExhaustiveMultiplier);

void BM_VerifyAgainstGolden(benchmark::State& state) {
  auto g = rtlmend::compile_text(kMult);
  rtlmend::Verifier v(*g.design, rtlmend::default_suite(*g.design));
  for (auto _ : state) benchmark::DoNotOptimize(v.verify(*g.design, state.range(0) != 0));
}
BENCHMARK(BM_VerifyAgainstGolden)->Arg(0)->Arg(1);

}  // namespace
