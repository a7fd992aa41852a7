#include <doctest.h>

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "rtlmend/elaborate.hpp"
#include "rtlmend/errgen.hpp"
#include "rtlmend/error.hpp"
#include "rtlmend/frontend.hpp"
#include "rtlmend/localize.hpp"
#include "rtlmend/testbench.hpp"

using namespace rtlmend;

namespace {

ElaboratedDesign elab(const std::string& text, const std::string& path = "dut.v") {
  auto r = compile_text(text, path);
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

std::string check_line(std::size_t t, const std::string& sig, bool pass) {
  nlohmann::json j = {{"kind", "check"}, {"time", t}, {"signal", sig}, {"expected", "0"}, {"actual", pass ? "0" : "1"},
                      {"pass", pass}};
  return j.dump();
}

std::set<std::uint32_t> line_set(const std::vector<SourceLine>& ls) {
  std::set<std::uint32_t> s;
  for (const auto& l : ls) s.insert(l.line);
  return s;
}

std::vector<std::string> input_names(const ElaboratedDesign& d) {
  std::vector<std::string> n;
  for (int i : d.inputs)
    if (i != d.clock) n.push_back(d.signals[static_cast<std::size_t>(i)].path);
  return n;
}

const char* kAdder = "module add(input [3:0] a, input [3:0] b, output [3:0] sum);\n  assign sum = a + b;\nendmodule\n";

const char* kShift = R"(module sh(input clk, input d, output reg q);
  reg m;
  always @(posedge clk) begin
    m <= d;
    q <= m;
  end
endmodule
)";

}  // namespace

TEST_CASE("err_chk") {
  auto d = elab(kAdder);
  std::vector<std::vector<std::uint64_t>> rows;
  for (std::uint64_t i = 0; i < 10; ++i) rows.push_back({i, 15 - i});
  auto trace = simulate(d, manual({"a", "b"}, {4, 4}, rows), rows.size());

  SUBCASE("clean log") {
    std::vector<std::string> log = {check_line(0, "sum", true), check_line(1, "sum", true),
                                    R"({"kind":"summary","pass_rate":1.0,"total":2,"passed":2})"};
    auto f = err_chk(log, trace, {"a", "b"});
    CHECK(f.empty());
    CHECK(f.signals.empty());
    CHECK(f.inputs.empty());
  }
  SUBCASE("failures on sum at 3 and 7") {
    std::vector<std::string> log;
    for (std::size_t t = 0; t < 10; ++t) log.push_back(check_line(t, "sum", t != 3 && t != 7));
    auto f = err_chk(log, trace, {"a", "b"});
    CHECK(f.times == std::vector<std::size_t>{3, 7});
    CHECK(f.signals == std::vector<std::string>{"sum"});
    REQUIRE(f.inputs.size() == 2);
    CHECK(f.inputs.at(3).at("a") == Value::known(4, 3));
    CHECK(f.inputs.at(3).at("b") == Value::known(4, 12));
    CHECK(f.inputs.at(7).at("a") == trace.query("a", 7));
    CHECK(f.inputs.at(7).at("b") == trace.query("b", 7));
  }
  SUBCASE("two signals at one cycle") {
    std::vector<std::string> log = {check_line(4, "sum", false), check_line(4, "carry", false)};
    auto f = err_chk(log, trace, {"a"});
    CHECK(f.signals.size() == 2);
    CHECK(f.times.size() == 1);
  }
  SUBCASE("malformed") {
    CHECK_THROWS_AS(err_chk({"not json"}, trace, {}), MalformedLog);
    CHECK_THROWS_AS(err_chk({R"({"kind":"check","time":1})"}, trace, {}), MalformedLog);
  }
}

TEST_CASE("build_dfg") {
  SUBCASE("single assign") {
    auto d = elab("module g(input a, input b, output y);\n  assign y = a & b;\nendmodule\n");
    auto g = build_dfg(d, "y");
    std::set<std::string> nodes;
    for (int n : g.nodes) nodes.insert(d.signals[static_cast<std::size_t>(n)].path);
    CHECK(nodes == std::set<std::string>{"y", "a", "b"});
    REQUIRE(g.edges.size() == 2);
    for (const auto& e : g.edges) {
      CHECK_FALSE(e.guard);
      CHECK(e.line == 2);
    }
  }
  SUBCASE("if/else mux") {
    auto d = elab(testsupport::mux_module());
    auto g = build_dfg(d, "y");
    int a = d.find_signal("a"), b = d.find_signal("b"), sel = d.find_signal("sel");
    std::multiset<std::pair<int, std::uint32_t>> data, guard;
    for (const auto& e : g.edges) (e.guard ? guard : data).insert({e.from, e.line});
    CHECK(data == std::multiset<std::pair<int, std::uint32_t>>{{a, 4}, {b, 6}});
    CHECK(guard == std::multiset<std::pair<int, std::uint32_t>>{{sel, 4}, {sel, 6}});
  }
  SUBCASE("register chain of depth two") {
    auto d = elab(kShift);
    auto g = build_dfg(d, "q");
    int seq = 0;
    for (const auto& e : g.edges) seq += e.sequential;
    CHECK(seq == 2);
    CHECK(g.combinational_acyclic());
  }
  SUBCASE("crosses instance boundaries") {
    auto d = elab(testsupport::corpus_entry("ripple_adder4").text);
    auto g = build_dfg(d, d.signals[static_cast<std::size_t>(d.outputs[0])].path);
    bool nested = false;
    for (int n : g.nodes) nested |= d.signals[static_cast<std::size_t>(n)].path.find('.') != std::string::npos;
    CHECK(nested);
  }
  SUBCASE("unknown signal") {
    auto d = elab(kAdder);
    CHECK_THROWS_AS(build_dfg(d, "nosuch"), UnknownSignal);
  }
}

TEST_CASE("dynamic_slice") {
  SUBCASE("executed branch only") {
    auto d = elab(testsupport::mux_module());
    auto trace = simulate(d, manual({"sel", "a", "b"}, {1, 1, 1}, {{1, 1, 0}, {0, 1, 0}}), 2);
    auto g = build_dfg(d, "y");
    auto s = line_set(dynamic_slice(d, g, {0}, trace).lines);
    CHECK(s.count(3));
    CHECK(s.count(4));
    CHECK_FALSE(s.count(6));
    auto s1 = line_set(dynamic_slice(d, g, {1}, trace).lines);
    CHECK(s1.count(6));
    CHECK_FALSE(s1.count(4));
  }
  SUBCASE("guard-free adder equals the static slice") {
    auto d = elab(kAdder);
    auto trace = simulate(d, manual({"a", "b"}, {4, 4}, {{1, 2}, {3, 4}}), 2);
    auto g = build_dfg(d, "sum");
    CHECK(line_set(dynamic_slice(d, g, {1}, trace).lines) == line_set(static_slice(d, g)));
  }
  SUBCASE("frequency ordering") {
    auto d = elab(testsupport::mux_module());
    auto trace = simulate(d, manual({"sel", "a", "b"}, {1, 1, 1}, {{1, 1, 0}, {1, 0, 0}, {0, 1, 0}}), 3);
    auto r = dynamic_slice(d, build_dfg(d, "y"), {0, 1, 2}, trace);
    REQUIRE(r.lines.size() == r.counts.size());
    for (std::size_t i = 1; i < r.lines.size(); ++i) {
      bool ordered = r.counts[i - 1] > r.counts[i] ||
                     (r.counts[i - 1] == r.counts[i] && r.lines[i - 1].line < r.lines[i].line);
      CHECK(ordered);
    }
    auto count_of = [&](std::uint32_t line) -> std::size_t {
      for (std::size_t i = 0; i < r.lines.size(); ++i)
        if (r.lines[i].line == line) return r.counts[i];
      return 0;
    };
    CHECK(count_of(3) == 3);
    CHECK(count_of(4) == 2);
    CHECK(count_of(6) == 1);
    CHECK(r.counts.front() == 3);
  }
  SUBCASE("register edges step back one cycle") {
    auto d = elab(kShift);
    auto trace = simulate(d, manual({"d"}, {1}, {{1}, {0}, {1}, {0}}), 4);
    auto r = dynamic_slice(d, build_dfg(d, "q"), {3}, trace);
    auto s = line_set(r.lines);
    CHECK(s.count(4));
    CHECK(s.count(5));
    CHECK(std::find(r.signals.begin(), r.signals.end(), "m") != r.signals.end());
  }
  SUBCASE("beyond the horizon") {
    auto d = elab(kAdder);
    auto trace = simulate(d, manual({"a", "b"}, {4, 4}, {{1, 2}}), 1);
    CHECK_THROWS_AS(dynamic_slice(d, build_dfg(d, "sum"), {5}, trace), TimeBeyondHorizon);
  }
}

TEST_CASE("operator misuse on the ALU lands in the slice") {
  const auto& entry = testsupport::corpus_entry("alu4");
  auto g = elab(entry.text, "golden.v");
  auto base = parse_text(entry.text);
  REQUIRE(base.ok());
  auto ops = enumerate_sites(*base.design, MutationKind::kOperatorMisuse);
  REQUIRE_FALSE(ops.empty());
  int checked = 0;
  for (const auto& op : ops) {
    Mutant m;
    try {
      m = inject(*base.design, op);
    } catch (const EquivalentMutant&) {
      continue;
    }
    if (m.cls != MutantClass::kFunctional) continue;
    auto d = elab(m.mutated);
    Verifier v(g, default_suite(g));
    auto rep = v.verify(d);
    auto info = fetch_err_info(d, rep, 2);
    CHECK(info.mode == ErrInfo::Mode::kSL);
    CAPTURE(m.id);
    CHECK(line_set(info.lines).count(m.line));
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("fetch_err_info") {
  std::string golden = testsupport::alu_golden();
  std::string bad = golden;
  bad.replace(bad.find("2'd0: tmp = a + b"), 17, "2'd0: tmp = a - b");
  auto g = elab(golden, "golden.v");
  auto d = elab(bad);
  Verifier v(g, default_suite(g));
  auto rep = v.verify(d);
  REQUIRE(rep.pass_rate < 1.0);

  auto ms = fetch_err_info(d, rep, 1, 2);
  auto sl = fetch_err_info(d, rep, 2, 2);
  SUBCASE("threshold") {
    CHECK(ms.mode == ErrInfo::Mode::kMS);
    CHECK(ms.lines.empty());
    CHECK(sl.mode == ErrInfo::Mode::kSL);
    CHECK_FALSE(sl.lines.empty());
  }
  SUBCASE("signal expansion through tmp") {
    CHECK(ms.signals == std::vector<std::string>{"y"});
    CHECK(std::find(sl.signals.begin(), sl.signals.end(), "y") != sl.signals.end());
    CHECK(std::find(sl.signals.begin(), sl.signals.end(), "tmp") != sl.signals.end());
  }
  SUBCASE("monotone escalation") {
    for (const auto& s : ms.signals) CHECK(std::find(sl.signals.begin(), sl.signals.end(), s) != sl.signals.end());
  }
  SUBCASE("determinism") {
    CHECK(fetch_err_info(d, rep, 2, 2).to_string() == sl.to_string());
  }
  SUBCASE("mismatch times are capped") {
    CHECK(sl.times.size() <= kMaxMismatchTimes);
    CHECK(std::is_sorted(sl.times.begin(), sl.times.end()));
  }
  SUBCASE("JSON shape and round trip") {
    auto j = sl.to_json();
    for (const char* k : {"mode", "signals", "times", "inputs", "lines"}) CHECK(j.contains(k));
    CHECK(j["lines"][0].is_array());
    CHECK(j["lines"][0][0] == "dut.v");
    auto back = ErrInfo::from_json(j);
    CHECK(back.to_string() == sl.to_string());
  }
  SUBCASE("the faulty line is suspicious") {
    CHECK(line_set(sl.lines).count(5));
  }
}

TEST_CASE("dynamic slice is a subset of the static slice on corpus mutants") {
  std::size_t n = 0;
  for (const char* name : {"alu_flags", "fifo4", "traffic_light", "mux_tree4", "regfile4x8"}) {
    const auto& entry = testsupport::corpus_entry(name);
    auto base = parse_text(entry.text);
    REQUIRE(base.ok());
    auto g = elab(entry.text, "golden.v");
    Verifier v(g, default_suite(g));
    for (auto kind : {MutationKind::kOperatorMisuse, MutationKind::kValueMisuse, MutationKind::kVariableNameMisuse}) {
      for (const auto& op : enumerate_sites(*base.design, kind)) {
        Mutant m;
        try {
          m = inject(*base.design, op);
        } catch (const Error&) {
          continue;
        }
        if (m.cls != MutantClass::kFunctional) continue;
        auto d = elab(m.mutated);
        auto rep = v.verify(d);
        auto facts = err_chk(rep.log_lines(), rep.trace, input_names(d));
        std::vector<std::size_t> times(facts.times.begin(),
                                       facts.times.begin() + std::min(facts.times.size(), kMaxMismatchTimes));
        for (const auto& sig : facts.signals) {
          auto dfg = build_dfg(d, sig);
          auto dyn = line_set(dynamic_slice(d, dfg, times, rep.trace).lines);
          auto st = line_set(static_slice(d, dfg));
          CAPTURE(m.id);
          CHECK(std::includes(st.begin(), st.end(), dyn.begin(), dyn.end()));
          ++n;
        }
      }
    }
  }
  CHECK(n > 20);
}
