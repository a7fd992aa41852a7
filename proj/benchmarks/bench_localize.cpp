#include <benchmark/benchmark.h>

#include "rtlmend/elaborate.hpp"
#include "rtlmend/localize.hpp"
#include "rtlmend/testbench.hpp"

namespace {

constexpr const char* kGolden = R"(module alu(clk, rst_n, a, b, op, y);
  input clk;
  input rst_n;
  input [3:0] a;
  input [3:0] b;
  input [1:0] op;
  output reg [3:0] y;
  reg [3:0] tmp;
  always @(*) begin
    case (op)
      2'd0: tmp = a + b;
      2'd1: tmp = a - b;
      2'd2: tmp = a & b;
      default: tmp = a | b;
    endcase
  end
  always @(posedge clk or negedge rst_n) begin
    if (!rst_n) y <= 4'd0;
    else y <= tmp;
  end
endmodule
)";

std::string mutant() {
  std::string s = kGolden;
  s.replace(s.find("a - b"), 5, "a + b");
  return s;
}

struct Fixture {
  rtlmend::ElaboratedDesign dut;
  rtlmend::VerifyReport report;

  Fixture() : dut(*rtlmend::compile_text(mutant()).design) {
    auto g = rtlmend::compile_text(kGolden);
    rtlmend::Verifier v(*g.design, rtlmend::default_suite(*g.design));
    report = v.verify(dut, true);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_BuildDfg(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(rtlmend::build_dfg(fixture().dut, "y"));
}
BENCHMARK(BM_BuildDfg);

void BM_DynamicSlice(benchmark::State& state) {
  const auto& f = fixture();
  auto dfg = rtlmend::build_dfg(f.dut, "y");
  auto prog = rtlmend::SimProgram::build(f.dut);
  std::vector<std::size_t> times;
  for (const auto& m : f.report.mismatches)
    if (times.size() < static_cast<std::size_t>(state.range(0)) && (times.empty() || times.back() != m.time))
      times.push_back(m.time);
  for (auto _ : state) benchmark::DoNotOptimize(rtlmend::dynamic_slice(*prog, dfg, times, f.report.trace));
}
BENCHMARK(BM_DynamicSlice)->Arg(1)->Arg(16);

void BM_FetchErrInfo(benchmark::State& state) {
  const auto& f = fixture();
  auto iter = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rtlmend::fetch_err_info(f.dut, f.report, iter, 2));
}
BENCHMARK(BM_FetchErrInfo)->Arg(1)->Arg(2);

}  // namespace
