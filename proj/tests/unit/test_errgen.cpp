#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "rtlmend/agent.hpp"
#include "rtlmend/elaborate.hpp"
#include "rtlmend/errgen.hpp"
#include "rtlmend/error.hpp"
#include "rtlmend/frontend.hpp"
#include "rtlmend/preprocess.hpp"
#include "rtlmend/testbench.hpp"

using namespace rtlmend;
namespace fs = std::filesystem;

namespace {

Design parsed(const std::string& text, const std::string& path = "m.v") {
  auto r = parse_text(text, path);
  REQUIRE(r.ok());
  return *r.design;
}

const MutationOp* find_op(const std::vector<MutationOp>& ops, const std::string& before, const std::string& after) {
  for (const auto& op : ops)
    if (op.before == before && op.after == after) return &op;
  return nullptr;
}

const char* kLoop = R"(module clr(input clk, input [2:0] addr, input [3:0] din, input we, input clear, output [3:0] dout);
  reg [3:0] mem [0:15];
  integer i;
  assign dout = mem[{1'b0, addr}];
  always @(posedge clk) begin
    if (clear) begin
      for (i = 0; i < 7; i = i + 1)
        mem[i] <= 4'd0;
    end else if (we) begin
      mem[{1'b0, addr}] <= din;
    end
  end
endmodule
)";

}  // namespace

TEST_CASE("enumerate_sites") {
  SUBCASE("combinational module has no sensitivity sites") {
    auto d = parsed(testsupport::corpus_entry("alu4").text);
    CHECK(enumerate_sites(d, MutationKind::kWrongSensitivity).empty());
  }
  SUBCASE("operator swap on an adder") {
    auto d = parsed("module a(input [3:0] a, input [3:0] b, output [3:0] result);\n  assign result = a + b;\nendmodule\n");
    auto ops = enumerate_sites(d, MutationKind::kOperatorMisuse);
    REQUIRE(ops.size() == 1);
    CHECK(ops[0].before == "+");
    CHECK(ops[0].after == "-");
    CHECK(ops[0].site.line == 2);
  }
  SUBCASE("declared range narrowed") {
    auto d = parsed(R"(module c(input clk, output [8:0] q);
  reg [8:0] count;
  assign q = count;
  always @(posedge clk) count <= count + 9'd1;
endmodule
)");
    auto ops = enumerate_sites(d, MutationKind::kBitwidthMisuse);
    REQUIRE(ops.size() == 1);
    CHECK(ops[0].before == "[8:0]");
    CHECK(ops[0].after == "[7:0]");
  }
  SUBCASE("sensitivity edge dropped") {
    auto d = parsed(testsupport::corpus_entry("counter8").text);
    auto ops = enumerate_sites(d, MutationKind::kWrongSensitivity);
    REQUIRE(ops.size() == 2);
    for (const auto& op : ops) CHECK(op.after.empty());
  }
  SUBCASE("port swap on same-width connections") {
    auto d = parsed(testsupport::corpus_entry("sort2").text);
    CHECK_FALSE(enumerate_sites(d, MutationKind::kPortMismatch).empty());
  }
  SUBCASE("every site matches its text") {
    for (const auto& e : testsupport::corpus()) {
      auto d = parsed(e.text, e.path);
      for (auto kind : kAllMutationKinds)
        for (const auto& op : enumerate_sites(d, kind)) {
          CHECK(e.text.compare(op.site.begin, op.site.end - op.site.begin, op.before) == 0);
          CHECK(op.kind == kind);
        }
    }
  }
}

TEST_CASE("inject") {
  SUBCASE("dropping reg from a procedural output is a syntax mutant") {
    auto d = parsed(testsupport::corpus_entry("counter8").text);
    auto ops = enumerate_sites(d, MutationKind::kTypeMisuse);
    auto it = std::find_if(ops.begin(), ops.end(), [](const MutationOp& o) { return o.before.rfind("reg", 0) == 0; });
    REQUIRE(it != ops.end());
    auto m = inject(d, *it);
    CHECK(m.cls == MutantClass::kSyntax);
    CHECK_FALSE(compile_text(m.mutated).ok());
  }
  SUBCASE("loop bound 7 to 15 is functional") {
    auto d = parsed(kLoop);
    auto ops = enumerate_sites(d, MutationKind::kWrongJudgmentValue);
    const auto* op = find_op(ops, "7", "15");
    REQUIRE(op);
    auto m = inject(d, *op);
    CHECK(m.cls == MutantClass::kFunctional);
    CHECK(m.pass_rate < 1.0);
    CHECK(m.mutated.find("i < 15") != std::string::npos);
  }
  SUBCASE("a swap inside dead code is an equivalent mutant") {
    auto d = parsed(testsupport::dead_code_module());
    auto ops = enumerate_sites(d, MutationKind::kOperatorMisuse);
    const auto* op = find_op(ops, "==", "!=");
    REQUIRE(op);
    CHECK_THROWS_AS(inject(d, *op), EquivalentMutant);
  }
}

TEST_CASE("build_benchmark") {
  std::vector<CorpusEntry> counter = {testsupport::corpus_entry("counter8")};
  SUBCASE("one per kind on the counter") {
    auto set = build_benchmark(counter, BenchmarkPlan::uniform(1), 7);
    CHECK(set.mutants.size() <= 8);
    bool sens = std::any_of(set.mutants.begin(), set.mutants.end(),
                            [](const Mutant& m) { return m.op.kind == MutationKind::kWrongSensitivity; });
    CHECK(sens);
  }
  SUBCASE("equal seeds give identical manifests") {
    std::vector<CorpusEntry> some;
    for (const char* n : {"counter8", "alu4", "fifo4", "mux_tree4"}) some.push_back(testsupport::corpus_entry(n));
    auto a = build_benchmark(some, BenchmarkPlan::uniform(2), 11);
    auto b = build_benchmark(some, BenchmarkPlan::uniform(2), 11, 3);
    CHECK(a.manifest() == b.manifest());
  }
  SUBCASE("matrix marks empty site lists") {
    std::vector<CorpusEntry> some;
    for (const char* n : {"alu4", "counter8", "sort2"}) some.push_back(testsupport::corpus_entry(n));
    auto set = build_benchmark(some, BenchmarkPlan::uniform(2), 5);
    std::map<std::string, std::map<MutationKind, std::size_t>> sites;
    for (const auto& e : some) {
      auto d = parsed(e.text, e.path);
      for (auto k : kAllMutationKinds) sites[e.family][k] += enumerate_sites(d, k).size();
    }
    for (const auto& [family, row] : sites)
      for (const auto& [kind, n] : row) {
        CAPTURE(family);
        CAPTURE(to_string(kind));
        REQUIRE(set.matrix.count(family));
        int cell = set.matrix.at(family).at(kind);
        if (n == 0)
          CHECK(cell == -1);
        else
          CHECK(cell >= 0);
      }
  }
}

TEST_CASE("mutant properties over a benchmark sample") {
  std::vector<CorpusEntry> some;
  for (const char* n : {"alu_reg", "fifo4", "traffic_light", "rotator8", "priority_enc8", "mac4"})
    some.push_back(testsupport::corpus_entry(n));
  auto set = build_benchmark(some, BenchmarkPlan::uniform(2), 7);
  REQUIRE(set.mutants.size() > 20);
  for (const auto& m : set.mutants) {
    CAPTURE(m.id);
    // Single site: the texts differ only inside the rewritten span.
    std::size_t b = m.op.site.begin;
    CHECK(m.base.compare(0, b, m.mutated, 0, b) == 0);
    std::size_t tail_base = m.base.size() - m.op.site.end;
    CHECK(m.base.substr(m.op.site.end) == m.mutated.substr(m.mutated.size() - tail_base));
    CHECK(m.mutated.substr(b, m.op.after.size()) == m.op.after);
    // Reversibility.
    auto back = apply_patchset(m.mutated, m.repair);
    CHECK(back.errors.empty());
    CHECK(back.text == m.base);
    // Class soundness.
    if (m.cls == MutantClass::kSyntax) {
      CHECK_FALSE(check_source(SourceFile("m.v", m.mutated)).clean());
    } else {
      auto g = compile_text(m.base);
      auto d = compile_text(m.mutated);
      REQUIRE(d.ok());
      auto st = default_suite(*g.design);
      CHECK(run_verify(*d.design, *g.design, st, st.cycles()).pass_rate < 1.0);
      CHECK(m.pass_rate < 1.0);
    }
    CHECK(m.line == m.op.site.line);
  }
}

TEST_CASE("benchmark persistence") {
  std::vector<CorpusEntry> some = {testsupport::corpus_entry("alu4"), testsupport::corpus_entry("counter8")};
  auto set = build_benchmark(some, BenchmarkPlan::uniform(1), 3);
  auto dir = fs::temp_directory_path() / "rtlmend_bench_set";
  fs::remove_all(dir);
  set.save(dir.string());
  CHECK(fs::exists(dir / "benchmark.json"));
  CHECK(fs::exists(dir / "matrix.json"));
  auto back = BenchmarkSet::load(dir.string());
  CHECK(back.manifest() == set.manifest());
  CHECK(back.matrix == set.matrix);
  REQUIRE(back.golden("alu4"));
  CHECK(back.golden("alu4")->text == some[0].text);
  fs::remove_all(dir);
}

TEST_CASE("plan and kind names") {
  auto plan = BenchmarkPlan::uniform(3);
  CHECK(plan.per_module.size() == 8);
  CHECK(BenchmarkPlan::from_json(plan.to_json()).per_module == plan.per_module);
  for (auto k : kAllMutationKinds) CHECK(parse_mutation_kind(to_string(k)) == k);
  CHECK_FALSE(parse_mutation_kind("Typo"));
}

TEST_CASE("corpus loading") {
  const auto& c = testsupport::corpus();
  CHECK(c.size() >= 27);
  std::set<std::string> families;
  for (const auto& e : c) {
    families.insert(e.family);
    CHECK_FALSE(e.spec.empty());
  }
  CHECK(families.size() == 10);
  CHECK_THROWS_AS(load_corpus("/nonexistent/corpus"), IoError);
}
