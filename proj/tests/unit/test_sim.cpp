#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "fixtures.hpp"
#include "rtlmend/elaborate.hpp"
#include "rtlmend/error.hpp"
#include "rtlmend/sim.hpp"
#include "rtlmend/testbench.hpp"
#include "tree_eval.hpp"
#include "vcd_reader.hpp"

using namespace rtlmend;

namespace {

ElaboratedDesign elab(const std::string& text) {
  auto r = compile_text(text);
  REQUIRE(r.ok());
  return std::move(*r.design);
}

Stimulus manual(std::vector<std::string> names, std::vector<int> widths,
                std::vector<std::vector<std::uint64_t>> rows) {
  Stimulus s;
  s.mode = StimulusMode::kDirected;
  s.inputs = std::move(names);
  s.widths = std::move(widths);
  s.vectors = std::move(rows);
  s.in_reset.assign(s.vectors.size(), 0);
  return s;
}

std::uint64_t bits_at(const Trace& t, const std::string& sig, std::size_t time) {
  Value v = t.query(sig, time);
  REQUIRE(v.is_known());
  return v.bits;
}

const char* kSwap = R"(module swap(input clk, input load, input ia, input ib, output reg a, output reg b);
  always @(posedge clk) begin
    if (load) begin
      a <= ia;
      b <= ib;
    end else begin
      a <= b;
      b <= a;
    end
  end
endmodule
)";

}  // namespace

TEST_CASE("4-bit adder settles in the same cycle") {
  auto d = elab("module add(input [3:0] a, input [3:0] b, output [4:0] sum);\n  assign sum = a + b;\nendmodule\n");
  auto t = simulate(d, manual({"a", "b"}, {4, 4}, {{3, 5}}), 1);
  CHECK(bits_at(t, "sum", 0) == 8);
}

TEST_CASE("nonblocking swap") {
  auto d = elab(kSwap);
  auto t = simulate(d, manual({"load", "ia", "ib"}, {1, 1, 1}, {{1, 1, 0}, {0, 0, 0}, {0, 0, 0}}), 3);
  // Loaded a=1, b=0 at cycle 0; each later edge exchanges them.
  CHECK(bits_at(t, "a", 0) == 1);
  CHECK(bits_at(t, "b", 0) == 0);
  CHECK(bits_at(t, "a", 1) == 0);
  CHECK(bits_at(t, "b", 1) == 1);
  CHECK(bits_at(t, "a", 2) == 1);
  CHECK(bits_at(t, "b", 2) == 0);
}

TEST_CASE("8-bit counter wraps 255 to 0 at cycle 256") {
  auto d = elab(R"(module cnt(input clk, input rst, output reg [7:0] count);
  always @(posedge clk)
    if (rst) count <= 8'd0;
    else count <= count + 8'd1;
endmodule
)");
  std::vector<std::vector<std::uint64_t>> rows(258, {0});
  rows[0] = {1};
  auto t = simulate(d, manual({"rst"}, {1}, rows), rows.size());
  CHECK(bits_at(t, "count", 0) == 0);
  CHECK(bits_at(t, "count", 1) == 1);
  CHECK(bits_at(t, "count", 255) == 255);
  CHECK(bits_at(t, "count", 256) == 0);
  CHECK(bits_at(t, "count", 257) == 1);
}

TEST_CASE("uninitialized registers start all-X") {
  auto d = elab("module r(input clk, input d, output reg [3:0] q);\n  always @(posedge clk) q <= q + 4'd1;\nendmodule\n");
  auto t = simulate(d, manual({"d"}, {1}, {{0}, {1}}), 2);
  CHECK(t.query("q", 0) == Value::all_x(4));
  CHECK(t.query("q", 1) == Value::all_x(4));
}

TEST_CASE("query semantics") {
  auto d = elab(R"(module h(input clk, input en, input [3:0] d, output reg [3:0] q);
  always @(posedge clk) if (en) q <= d;
endmodule
)");
  auto t = simulate(d, manual({"en", "d"}, {1, 4}, {{1, 2}, {0, 9}, {0, 9}, {1, 7}, {0, 1}}), 5);
  SUBCASE("hold") { CHECK(bits_at(t, "q", 4) == 7); }
  SUBCASE("exact change cycle") {
    CHECK(bits_at(t, "q", 3) == 7);
    CHECK(bits_at(t, "q", 2) == 2);
  }
  SUBCASE("change list") {
    auto ch = t.changes(t.slot("q"));
    REQUIRE(ch.size() == 2);
    CHECK(ch[0].first == 0);
    CHECK(ch[1].first == 3);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(t.query("nosuch", 0), UnknownSignal);
    CHECK_THROWS_AS(t.query("q", 5), TimeBeyondHorizon);
    CHECK(t.horizon() == 4);
  }
}

TEST_CASE("combinational loop is detected") {
  auto d = elab(R"(module loop(input a, output y);
  wire p;
  wire q;
  assign p = ~q;
  assign q = p & a;
  assign y = q;
endmodule
)");
  CHECK_THROWS_AS(simulate(d, manual({"a"}, {1}, {{0}, {1}, {0}}), 3), CombLoopDetected);
}

TEST_CASE("simulate is deterministic") {
  auto d = elab(testsupport::corpus_entry("fifo4").text);
  auto st = default_suite(d);
  auto a = simulate(d, st, st.cycles());
  auto b = simulate(d, st, st.cycles());
  CHECK(a.post == b.post);
  CHECK(a.pre == b.pre);
}

TEST_CASE("NBA atomicity: disjoint nonblocking order does not matter") {
  auto a = elab(R"(module p(input clk, input [3:0] d, output reg [3:0] x, output reg [3:0] y, output reg [3:0] z);
  always @(posedge clk) begin
    x <= d;
    y <= x + 4'd1;
    z <= y ^ x;
  end
endmodule
)");
  auto b = elab(R"(module p(input clk, input [3:0] d, output reg [3:0] x, output reg [3:0] y, output reg [3:0] z);
  always @(posedge clk) begin
    z <= y ^ x;
    x <= d;
    y <= x + 4'd1;
  end
endmodule
)");
  auto st = make_stimulus(a, StimulusMode::kRandom, 5, 40, 0);
  auto ta = simulate(a, st, st.cycles());
  auto tb = simulate(b, st, st.cycles());
  for (std::size_t t = 0; t < st.cycles(); ++t)
    for (const char* s : {"x", "y", "z"}) CHECK(ta.query(s, t) == tb.query(s, t));
}

TEST_CASE("X-monotonicity of compiled expressions") {
  std::mt19937_64 rng(11);
  std::vector<std::string> texts = {
      "module e(input [7:0] a, input [7:0] b, input [7:0] c, output [7:0] y);\n"
      "  assign y = (a & b) | (c ^ ~a);\nendmodule\n",
      "module e(input [7:0] a, input [7:0] b, input [7:0] c, output [7:0] y);\n"
      "  assign y = (a == b) ? c : (a < c ? a + b : b - c);\nendmodule\n",
      "module e(input [7:0] a, input [7:0] b, input [7:0] c, output [7:0] y);\n"
      "  assign y = {a[3:0], b[7:4]} >> c[2:0];\nendmodule\n",
      "module e(input [7:0] a, input [7:0] b, input [7:0] c, output [7:0] y);\n"
      "  assign y = {7'd0, (&a) | (^b) || !c};\nendmodule\n",
  };
  for (const auto& text : texts) {
    auto d = elab(text);
    auto prog = SimProgram::build(d);
    const auto& m = d.design->top_module();
    const auto& as = std::get<ContinuousAssign>(m.items[0]);
    CompiledExpr ce = prog->compile(as.rhs, 0, 8);
    std::vector<Value> slots(prog->slots().size(), Value::known(1, 0));
    for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = Value::known(prog->slots()[i].width, 0);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<Value> partial = slots;
      std::vector<Value> refined = slots;
      for (const char* name : {"a", "b", "c"}) {
        int s = prog->slot_of(d.find_signal(name));
        std::uint64_t v = rng() & 0xFF;
        std::uint64_t x = rng() & rng() & 0xFF;
        partial[s] = Value{8, v & ~x, x};
        refined[s] = Value::known(8, (v & ~x) | (rng() & x));
      }
      Value p = ce.eval(partial.data());
      Value r = ce.eval(refined.data());
      REQUIRE(r.is_known());
      std::uint64_t known = ~p.xmask & width_mask(p.width);
      CHECK((p.bits & known) == (r.bits & known));
    }
  }
}

TEST_CASE("exhaustive simulation agrees with the tree evaluator") {
  for (const auto& e : testsupport::corpus()) {
    auto r = compile_text(e.text, e.path);
    REQUIRE(r.ok());
    const auto& d = *r.design;
    if (d.sequential() || data_input_bits(d) > kExhaustiveBitLimit) continue;
    CAPTURE(e.name);
    auto st = make_stimulus(d, StimulusMode::kExhaustive, 0, 0, 0);
    CHECK(st.cycles() == (std::size_t{1} << data_input_bits(d)));
    auto trace = simulate(d, st, st.cycles());
    testsupport::TreeEval ref(*d.design);
    for (std::size_t t = 0; t < st.cycles(); ++t) {
      std::map<std::string, std::uint64_t> in;
      for (std::size_t i = 0; i < st.inputs.size(); ++i) in[st.inputs[i]] = st.vectors[t][i];
      auto expect = ref.run(in);
      for (const auto& [name, v] : expect) {
        Value got = trace.query(name, t);
        REQUIRE(got.is_known());
        CHECK(got.bits == v);
      }
    }
  }
}

TEST_CASE("VCD export") {
  SUBCASE("single signal toggling") {
    auto d = elab("module t(input a, output y);\n  assign y = a;\nendmodule\n");
    auto tr = simulate(d, manual({"a"}, {1}, {{0}, {1}}), 2);
    std::string vcd = tr.to_vcd();
    CHECK(vcd.find("$timescale 1ns $end") != std::string::npos);
    auto f = testsupport::VcdFile::parse(vcd);
    CHECK(f.value_at("y", 0) == "0");
    CHECK(f.value_at("y", 1) == "1");
    CHECK(vcd.find("#1\n") != std::string::npos);
  }
  SUBCASE("adder trace read back by an independent parser") {
    auto d = elab(testsupport::corpus_entry("ripple_adder4").text);
    auto st = make_stimulus(d, StimulusMode::kRandom, 3, 30, 0);
    auto tr = simulate(d, st, st.cycles());
    auto f = testsupport::VcdFile::parse(tr.to_vcd());
    CHECK(f.vars.size() == tr.signals.size());
    for (const auto& s : tr.signals) {
      REQUIRE(f.vars.count(s.path));
      CHECK(f.vars.at(s.path).width == s.width);
      for (std::size_t t = 0; t < tr.cycles; ++t) CHECK(f.value_at(s.path, t) == tr.query(s.path, t).to_binstring());
    }
  }
  SUBCASE("all-X register at time zero") {
    auto d = elab("module r(input clk, input d, output reg q);\n  always @(posedge clk) q <= q;\nendmodule\n");
    auto tr = simulate(d, manual({"d"}, {1}, {{0}}), 1);
    auto f = testsupport::VcdFile::parse(tr.to_vcd());
    CHECK(f.value_at("q", 0) == "x");
  }
  SUBCASE("file output") {
    auto d = elab("module t(input a, output y);\n  assign y = a;\nendmodule\n");
    auto tr = simulate(d, manual({"a"}, {1}, {{1}}), 1);
    auto path = std::filesystem::temp_directory_path() / "rtlmend_test_sim.vcd";
    tr.export_vcd(path.string());
    CHECK(testsupport::read_file(path.string()) == tr.to_vcd());
    std::filesystem::remove(path);
    CHECK_THROWS_AS(tr.export_vcd("/nonexistent/dir/x.vcd"), IoError);
  }
}

TEST_CASE("trace JSON round trip") {
  auto d = elab(kSwap);
  auto tr = simulate(d, manual({"load", "ia", "ib"}, {1, 1, 1}, {{1, 1, 0}, {0, 0, 0}, {0, 1, 1}}), 3);
  auto back = Trace::from_json(tr.to_json());
  for (const auto& s : tr.signals)
    for (std::size_t t = 0; t < tr.cycles; ++t) CHECK(back.query(s.path, t) == tr.query(s.path, t));
}

TEST_CASE("value helpers") {
  CHECK(Value::known(4, 0b1010).to_binstring() == "1010");
  CHECK(Value::from_binstring("1x0")->xmask == 0b010);
  CHECK(scoreboard_match(Value::known(2, 1), Value::known(2, 1)));
  CHECK_FALSE(scoreboard_match(Value::known(2, 1), Value{2, 0, 1}));
  CHECK(scoreboard_match(Value::all_x(2), Value::all_x(2)));
}
