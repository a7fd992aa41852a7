#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "rtlmend/elaborate.hpp"
#include "rtlmend/error.hpp"
#include "rtlmend/testbench.hpp"

using namespace rtlmend;

namespace {

ElaboratedDesign elab(const std::string& text) {
  auto r = compile_text(text);
  REQUIRE(r.ok());
  return std::move(*r.design);
}

const char* kAdder = "module add(input [7:0] a, input [7:0] b, output [7:0] sum);\n  assign sum = a + b;\nendmodule\n";

}  // namespace

TEST_CASE("self comparison passes") {
  auto g = elab(testsupport::corpus_entry("alu_reg").text);
  auto st = default_suite(g);
  auto rep = run_verify(g, g, st, st.cycles());
  CHECK(rep.pass_rate == 1.0);
  CHECK(rep.mismatches.empty());
  CHECK(rep.total_checks > 0);
}

TEST_CASE("operator misuse on an adder is caught") {
  auto g = elab(kAdder);
  std::string bad = kAdder;
  bad.replace(bad.find("a + b"), 5, "a - b");
  auto d = elab(bad);
  auto st = make_stimulus(g, StimulusMode::kRandom, 1, 100);
  auto rep = run_verify(d, g, st, 100);
  CHECK(rep.pass_rate < 1.0);
  REQUIRE_FALSE(rep.mismatches.empty());
  CHECK(rep.mismatches[0].signal == "sum");
}

TEST_CASE("XOR against AND over the truth table") {
  auto g = elab("module g(input a, input b, output y);\n  assign y = a & b;\nendmodule\n");
  auto d = elab("module g(input a, input b, output y);\n  assign y = a ^ b;\nendmodule\n");
  auto st = make_stimulus(g, StimulusMode::kExhaustive, 0, 0);
  auto rep = run_verify(d, g, st, st.cycles());
  // Truth table: (0,0) 0/0, (0,1) 0/1, (1,0) 0/1, (1,1) 1/0.
  int expected_fail = 0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) expected_fail += ((a & b) != (a ^ b));
  CHECK(rep.total_checks == 4);
  CHECK(rep.total_checks - rep.passed_checks == static_cast<std::size_t>(expected_fail));
  CHECK(rep.pass_rate == doctest::Approx((4.0 - expected_fail) / 4.0));
}

TEST_CASE("make_stimulus") {
  SUBCASE("exhaustive over two input bits") {
    auto d = elab("module g(input a, input b, output y);\n  assign y = a | b;\nendmodule\n");
    auto st = make_stimulus(d, StimulusMode::kExhaustive, 0, 0);
    std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
    for (std::size_t t = 0; t < st.cycles(); ++t)
      if (!st.in_reset[t]) seen.insert({st.vectors[t][0], st.vectors[t][1]});
    CHECK(seen.size() == 4);
  }
  SUBCASE("equal seeds give identical stimulus") {
    auto d = elab(kAdder);
    CHECK(make_stimulus(d, StimulusMode::kRandom, 9, 64) == make_stimulus(d, StimulusMode::kRandom, 9, 64));
    CHECK_FALSE(make_stimulus(d, StimulusMode::kRandom, 9, 64) == make_stimulus(d, StimulusMode::kRandom, 10, 64));
  }
  SUBCASE("exhaustive refuses twenty input bits") {
    auto d = elab("module w(input [9:0] a, input [9:0] b, output [9:0] y);\n  assign y = a & b;\nendmodule\n");
    CHECK(data_input_bits(d) == 20);
    CHECK_THROWS_AS(make_stimulus(d, StimulusMode::kExhaustive, 0, 0), ExhaustiveTooLarge);
  }
  SUBCASE("clock is never driven and reset follows the protocol") {
    auto d = elab(testsupport::corpus_entry("counter8").text);
    auto st = make_stimulus(d, StimulusMode::kRandom, 4, 50, 3);
    for (const auto& n : st.inputs) CHECK_FALSE(is_clock_name(n));
    CHECK(st.reset_cycles == 3);
    std::size_t reset_col = 0;
    for (std::size_t i = 0; i < st.inputs.size(); ++i)
      if (is_reset_name(st.inputs[i])) reset_col = i;
    for (std::size_t t = 0; t < st.cycles(); ++t) {
      bool asserted = d.reset_active_low ? st.vectors[t][reset_col] == 0 : st.vectors[t][reset_col] == 1;
      CHECK(asserted == (t < 3));
      CHECK(static_cast<bool>(st.in_reset[t]) == (t < 3));
    }
  }
  SUBCASE("directed vectors from a file") {
    auto d = elab(kAdder);
    auto path = std::filesystem::temp_directory_path() / "rtlmend_directed.json";
    {
      std::ofstream out(path);
      out << nlohmann::json{{"reset_cycles", 0}, {"vectors", {{{"a", 3}, {"b", 4}}, {{"a", 250}, {"b", 10}}}}}.dump();
    }
    auto st = make_stimulus(d, StimulusMode::kDirected, 0, 0, 0, path.string());
    std::filesystem::remove(path);
    REQUIRE(st.cycles() == 2);
    CHECK(st.vectors[1][0] == 250);
    CHECK(st.vectors[1][1] == 10);
  }
}

TEST_CASE("default and extended suites") {
  auto comb = elab("module g(input [3:0] a, input [3:0] b, output [3:0] y);\n  assign y = a ^ b;\nendmodule\n");
  CHECK(default_suite(comb).mode == StimulusMode::kExhaustive);
  auto wide = elab(kAdder);
  auto ds = default_suite(wide);
  CHECK(ds.mode == StimulusMode::kRandom);
  CHECK(ds.cycles() == 8 * 256);
  auto ext = extended_suite(wide);
  CHECK(ext.cycles() == 32 * 1024);
  CHECK_FALSE(ext.seed == ds.seed);
}

TEST_CASE("no check is scored during reset") {
  auto g = elab(testsupport::corpus_entry("counter8").text);
  auto st = make_stimulus(g, StimulusMode::kRandom, 2, 40, 2);
  auto rep = run_verify(g, g, st, st.cycles());
  CHECK(rep.total_checks == (st.cycles() - 2) * rep.outputs.size());
  for (const auto& c : rep.checks) CHECK(c.time >= 2);
}

TEST_CASE("score ordering follows mismatch set inclusion") {
  const char* golden = "module g(input [3:0] a, input [3:0] b, output [3:0] y, output [3:0] z);\n"
                       "  assign y = a & b;\n  assign z = a | b;\nendmodule\n";
  const char* one = "module g(input [3:0] a, input [3:0] b, output [3:0] y, output [3:0] z);\n"
                    "  assign y = a ^ b;\n  assign z = a | b;\nendmodule\n";
  const char* both = "module g(input [3:0] a, input [3:0] b, output [3:0] y, output [3:0] z);\n"
                     "  assign y = a ^ b;\n  assign z = a + b;\nendmodule\n";
  auto g = elab(golden);
  auto st = default_suite(g);
  auto ra = run_verify(elab(one), g, st, st.cycles());
  auto rb = run_verify(elab(both), g, st, st.cycles());
  std::set<std::pair<std::uint32_t, std::string>> sa, sb;
  for (const auto& m : ra.mismatches) sa.insert({m.time, m.signal});
  for (const auto& m : rb.mismatches) sb.insert({m.time, m.signal});
  REQUIRE(std::includes(sb.begin(), sb.end(), sa.begin(), sa.end()));
  REQUIRE(sa.size() < sb.size());
  CHECK(ra.pass_rate >= rb.pass_rate);
}

TEST_CASE("X on the DUT side against a known golden bit fails") {
  auto g = elab("module r(input clk, input rst, output reg q);\n  always @(posedge clk) if (rst) q <= 1'b0; else q <= ~q;\nendmodule\n");
  auto d = elab("module r(input clk, input rst, output reg q);\n  always @(posedge clk) q <= ~q;\nendmodule\n");
  auto st = make_stimulus(g, StimulusMode::kRandom, 1, 10, 2);
  auto rep = run_verify(d, g, st, st.cycles());
  CHECK(rep.pass_rate == 0.0);
}

TEST_CASE("port contract") {
  auto g = elab(kAdder);
  auto d = elab("module add(input [7:0] a, input [7:0] b, output [8:0] sum);\n  assign sum = a + b;\nendmodule\n");
  CHECK_THROWS_AS(check_port_contract(d, g), PortContractViolation);
  auto st = default_suite(g);
  CHECK_THROWS_AS(run_verify(d, g, st, st.cycles()), PortContractViolation);
}

TEST_CASE("verifier reuse and log format") {
  auto g = elab(kAdder);
  std::string bad = kAdder;
  bad.replace(bad.find("a + b"), 5, "a | b");
  auto d = elab(bad);
  auto st = make_stimulus(g, StimulusMode::kRandom, 1, 20, 0);
  Verifier v(g, st);
  auto r1 = v.verify(d);
  auto r2 = run_verify(d, g, st, st.cycles());
  CHECK(r1.passed_checks == r2.passed_checks);
  auto lines = r1.log_lines();
  REQUIRE(lines.size() == r1.total_checks + 1);
  std::size_t fails = 0;
  for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
    auto j = nlohmann::json::parse(lines[i]);
    CHECK(j.contains("time"));
    CHECK(j.contains("signal"));
    if (j.contains("pass") && !j["pass"].get<bool>()) ++fails;
  }
  CHECK(fails == r1.mismatches.size());
}
