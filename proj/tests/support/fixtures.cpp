#include "fixtures.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "rtlmend/elaborate.hpp"
#include "rtlmend/orchestrator.hpp"
#include "rtlmend/testbench.hpp"

namespace testsupport {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string corpus_dir() { return RTLMEND_CORPUS_DIR; }
std::string fixtures_dir() { return RTLMEND_FIXTURES_DIR; }

const std::vector<rtlmend::CorpusEntry>& corpus() {
  static const std::vector<rtlmend::CorpusEntry> entries = rtlmend::load_corpus(corpus_dir());
  return entries;
}

const rtlmend::CorpusEntry& corpus_entry(const std::string& name) {
  for (const auto& e : corpus())
    if (e.name == name) return e;
  throw std::runtime_error("no corpus entry " + name);
}

std::string alu_golden() {
  return R"(module alu(input clk, input rst_n, input [1:0] op, input [3:0] a, input [3:0] b, output reg [3:0] y);
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
}

std::string alu_two_faults() {
  std::string t = alu_golden();
  t.replace(t.find("a & b"), 5, "a | b");
  t.replace(t.find("a - b"), 5, "a ^ b");
  return t;
}

nlohmann::json rollback_script() {
  return {
      {"1", R"({"correct":[{"wrong":"2'd2: tmp = a | b;","right":"2'd2: tmp = a & b;"}]})"},
      {"2", R"({"correct":[{"wrong":"2'd0: tmp = a + b;","right":"2'd0: tmp = a - b;"}]})"},
      {"default", R"({"correct":[{"wrong":"2'd3: tmp = a;","right":"2'd3: tmp = b;"}]})"},
  };
}

MissingPort missing_port() {
  MissingPort m;
  m.golden = R"(module inv(A, Y);
  input A;
  output Y;

  assign Y = ~A;
endmodule

module a(A, Y);
  input A;
  output Y;

  inv u0(.A(A), .Y(Y));
endmodule
)";
  m.dut = m.golden;
  const std::string decl = "  input A;\n";
  m.dut.erase(m.dut.rfind(decl), decl.size());
  return m;
}

Overfit overfit() {
  Overfit o;
  o.golden = R"(module adder16(input [15:0] a, input [15:0] b, output [15:0] sum);
  assign sum = a + b;
endmodule
)";
  o.dut = o.golden;
  o.dut.replace(o.dut.find("a + b"), 5, "a - b");

  auto g = rtlmend::compile_text(o.golden, "adder16.v");
  if (!g.ok()) throw std::runtime_error("overfit golden does not compile");
  auto column = [](const rtlmend::Stimulus& s) {
    for (std::size_t i = 0; i < s.inputs.size(); ++i)
      if (s.inputs[i] == "a") return i;
    throw std::runtime_error("no input a");
  };
  auto low12 = [&](const rtlmend::Stimulus& s) {
    std::set<std::uint64_t> seen;
    std::size_t c = column(s);
    for (const auto& v : s.vectors) seen.insert(v[c] & 0xFFF);
    return seen;
  };
  auto session = low12(rtlmend::session_stimulus(*g.design, rtlmend::StimulusConfig{}));
  rtlmend::FrConfig fr;
  auto extended = low12(rtlmend::extended_suite(*g.design, fr.seed_base, fr.seeds, fr.cycles));
  bool found = false;
  for (std::uint64_t k : extended) {
    if (!session.count(k)) {
      o.key = k;
      found = true;
      break;
    }
  }
  if (!found) throw std::runtime_error("no overfit key available");

  std::ostringstream hex;
  hex << std::hex << o.key;
  std::string rhs = "(a[11:0] == 12'h" + hex.str() + ") ? 16'h0 : a + b";
  o.repaired = o.golden;
  o.repaired.replace(o.repaired.find("a + b"), 5, rhs);
  nlohmann::json reply = {{"correct", {{{"wrong", "assign sum = a - b;"}, {"right", "assign sum = " + rhs + ";"}}}}};
  o.script = {{"default", reply.dump()}};
  return o;
}

std::vector<WarnCase> warning_corpus() {
  std::vector<WarnCase> out = {
      {"w1_and", R"(module w1_and(input a, input b, output reg y);
  always @(*) y <= a & b;
endmodule
)"},
      {"w1_block", R"(module w1_block(input [3:0] a, input [3:0] b, input s, output reg [3:0] y, output reg z);
  always @(*) begin
    if (s) y <= a;
    else y <= b;
    z <= ^a;
  end
endmodule
)"},
      {"w2_dff", R"(module w2_dff(input clk, input [7:0] d, output reg [7:0] q);
  always @(posedge clk) q = d;
endmodule
)"},
      {"w2_pipe", R"(module w2_pipe(input clk, input d, output reg q);
  reg m;
  always @(posedge clk) begin
    m = d;
    q <= m;
  end
endmodule
)"},
      {"w3_count", R"(module w3_count(input clk, input rst_n, output reg [3:0] count);
  always @(posedge clk) begin
    if (!rst_n) count <= 4'd0;
    else count <= count + 4'd1;
  end
endmodule
)"},
      {"w3_posrst", R"(module w3_posrst(input clk, input rst, input d, output reg q);
  always @(posedge clk)
    if (rst) q <= 1'b0;
    else q <= d;
endmodule
)"},
      {"w123", R"(module w123(input clk, input rst_n, input [1:0] a, output reg [1:0] y, output reg [1:0] q);
  always @(*) y <= ~a;
  always @(posedge clk) begin
    if (!rst_n) q = 2'd0;
    else q = y;
  end
endmodule
)"},
  };
  // Seeded variants: drop the reset edge from every corpus module that has one.
  for (const auto& e : corpus()) {
    for (const char* edge : {" or negedge rst_n", " or posedge rst"}) {
      auto pos = e.text.find(edge);
      if (pos == std::string::npos) continue;
      std::string t = e.text;
      while ((pos = t.find(edge)) != std::string::npos) t.erase(pos, std::string(edge).size());
      out.push_back({e.name + "_w3", t});
      break;
    }
  }
  return out;
}

std::string dead_code_module() {
  return R"(module dead(input [1:0] a, input b, input c, output reg y);
  always @(*) begin
    if (a > 2'd3) y = (b == c);
    else y = b & c;
  end
endmodule
)";
}

std::string mux_module() {
  return R"(module mux(input sel, input a, input b, output reg y);
  always @(*) begin
    if (sel)
      y = a;
    else
      y = b;
  end
endmodule
)";
}

std::vector<SessionRow> five_sessions() {
  return {
      {{true, true, true}, true},
      {{true, true, false}, true},
      {{true, true, true}, false},
      {{false, false, false}, false},
      {{true, true, true}, true},
  };
}

std::vector<rtlmend::MutantResult> five_session_results() {
  std::vector<rtlmend::MutantResult> out;
  int i = 0;
  for (const auto& row : five_sessions()) {
    rtlmend::MutantResult r;
    r.id = "s" + std::to_string(++i);
    r.module = "fixture";
    r.family = "fixture";
    bool all = true;
    for (bool c : row.checks) all = all && c;
    r.hr_pass = all;
    r.outcome = all ? rtlmend::Outcome::kSuccess : rtlmend::Outcome::kFailure;
    r.stage = all ? rtlmend::Stage::kMS : rtlmend::Stage::kNone;
    r.fr_pass = all && row.extended;
    out.push_back(r);
  }
  return out;
}

}  // namespace testsupport
