#include <doctest.h>

#include <cstdlib>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "rtlmend/agent.hpp"
#include "rtlmend/errgen.hpp"
#include "rtlmend/error.hpp"
#include "rtlmend/frontend.hpp"

using namespace rtlmend;

namespace {

RepairRequest request(RepairMode mode = RepairMode::kPair) {
  RepairRequest r;
  r.spec_text = "Two-input adder.";
  r.dut_text = "module add(input a, input b, output y);\n  assign y = a - b;\nendmodule\n";
  r.err_info = R"({"mode":"MS","signals":["y"],"times":[3],"inputs":{"3":{"a":"1","b":"0"}},"lines":[]})";
  r.mode = mode;
  return r;
}

std::size_t at(const std::string& s, const std::string& needle) { return s.find(needle); }

const char* kAlu = R"(module alu(input [1:0] op, input [3:0] a, input [3:0] b, output reg [3:0] result);
  always @(*) begin
    case (op)
      2'd0: result = a - b;
      2'd1: result = a & b;
      default: result = a | b;
    endcase
  end
endmodule
)";

}  // namespace

TEST_CASE("build_prompt") {
  SUBCASE("sections in order") {
    std::string p = build_prompt(request());
    CHECK(at(p, "RTL repair expert") != std::string::npos);
    auto spec = at(p, "## SPECIFICATION"), code = at(p, "## DUT CODE"), err = at(p, "## ERROR INFO"),
         out = at(p, "## OUTPUT FORMAT");
    REQUIRE(spec != std::string::npos);
    CHECK(spec < code);
    CHECK(code < err);
    CHECK(err < out);
    CHECK(at(p, "\"correct\"") != std::string::npos);
  }
  SUBCASE("no damage repairs section when empty") {
    CHECK(at(build_prompt(request()), "DAMAGE REPAIRS") == std::string::npos);
    auto r = request();
    r.damage_repairs.push_back(PatchSet{{{"assign y = a - b;", "assign y = a;"}}, {}});
    std::string p = build_prompt(r);
    auto dmg = at(p, "## DAMAGE REPAIRS");
    REQUIRE(dmg != std::string::npos);
    CHECK(at(p, "## ERROR INFO") < dmg);
    CHECK(dmg < at(p, "## OUTPUT FORMAT"));
    CHECK(at(p, "assign y = a;") != std::string::npos);
  }
  SUBCASE("MS error info carries no lines") {
    std::string p = build_prompt(request());
    CHECK(at(p, R"("signals":["y"])") != std::string::npos);
    CHECK(at(p, R"("lines":[])") != std::string::npos);
  }
  SUBCASE("DUT code is line numbered") {
    std::string p = build_prompt(request());
    CHECK(at(p, "1 | module add(") != std::string::npos);
    CHECK(at(p, "2 |   assign y = a - b;") != std::string::npos);
  }
  SUBCASE("deterministic") { CHECK(build_prompt(request()) == build_prompt(request())); }
  SUBCASE("whole-file output contract") {
    std::string p = build_prompt(request(RepairMode::kWholeFile));
    CHECK(at(p, "\"code\"") != std::string::npos);
  }
}

TEST_CASE("parse_response") {
  SUBCASE("one pair") {
    auto r = parse_response(R"({"correct":[{"wrong":"result = a - b;","right":"result = a + b;"}]})", RepairMode::kPair);
    REQUIRE(std::holds_alternative<PatchSet>(r));
    const auto& ps = std::get<PatchSet>(r);
    REQUIRE(ps.pairs.size() == 1);
    CHECK(ps.pairs[0].wrong == "result = a - b;");
    CHECK(ps.pairs[0].right == "result = a + b;");
  }
  SUBCASE("prose and fences") {
    std::string bare = R"({"correct":[{"wrong":"x","right":"y"}]})";
    auto a = parse_response(bare, RepairMode::kPair);
    auto b = parse_response("Here is the fix:\n```json\n" + bare + "\n```\nDone.", RepairMode::kPair);
    REQUIRE(std::holds_alternative<PatchSet>(b));
    CHECK(std::get<PatchSet>(a).pairs == std::get<PatchSet>(b).pairs);
  }
  SUBCASE("errors") {
    auto empty = parse_response(R"({"correct":[]})", RepairMode::kPair);
    REQUIRE(std::holds_alternative<ResponseError>(empty));
    CHECK(std::get<ResponseError>(empty).kind == ResponseError::Kind::kEmptyCorrect);
    auto none = parse_response("no json here", RepairMode::kPair);
    REQUIRE(std::holds_alternative<ResponseError>(none));
    CHECK(std::get<ResponseError>(none).kind == ResponseError::Kind::kNoJson);
    auto schema = parse_response(R"({"correct":[{"wrong":"x"}]})", RepairMode::kPair);
    REQUIRE(std::holds_alternative<ResponseError>(schema));
    CHECK(std::get<ResponseError>(schema).kind == ResponseError::Kind::kSchemaViolation);
    auto blank = parse_response(R"({"correct":[{"wrong":"","right":"y"}]})", RepairMode::kPair);
    CHECK(std::holds_alternative<ResponseError>(blank));
  }
  SUBCASE("whole file") {
    auto r = parse_response(R"({"code":"module m;\nendmodule\n"})", RepairMode::kWholeFile, "old text");
    REQUIRE(std::holds_alternative<PatchSet>(r));
    const auto& ps = std::get<PatchSet>(r);
    REQUIRE(ps.pairs.size() == 1);
    CHECK(ps.pairs[0].wrong == "old text");
    CHECK(ps.pairs[0].right == "module m;\nendmodule\n");
  }
}

TEST_CASE("apply_patchset") {
  SUBCASE("one-line diff on the ALU") {
    auto out = apply_patchset(kAlu, PatchSet{{{"result = a - b;", "result = a + b;"}}, {}});
    CHECK(out.errors.empty());
    CHECK(out.applied == 1);
    std::string expected = kAlu;
    expected.replace(expected.find("a - b"), 5, "a + b");
    CHECK(out.text == expected);
  }
  SUBCASE("no match leaves the text") {
    auto out = apply_patchset(kAlu, PatchSet{{{"result = a * b;", "result = a + b;"}}, {}});
    REQUIRE(out.errors.size() == 1);
    CHECK(out.errors[0].kind == PatchError::Kind::kNoMatch);
    CHECK(out.text == kAlu);
  }
  SUBCASE("duplicated snippet is ambiguous") {
    std::string dup = "module d(input a, output reg y, output reg z);\n  always @(*) begin\n    y = a;\n    z = a;\n"
                      "    y = a;\n  end\nendmodule\n";
    auto out = apply_patchset(dup, PatchSet{{{"y = a;", "y = ~a;"}}, {}});
    REQUIRE(out.errors.size() == 1);
    CHECK(out.errors[0].kind == PatchError::Kind::kAmbiguousMatch);
    CHECK(out.errors[0].count == 2);
    CHECK(count_matches(dup, "y = a;") == 2);
  }
  SUBCASE("failing pair is skipped and later pairs still apply") {
    auto out = apply_patchset(kAlu, PatchSet{{{"nothing here", "x"}, {"result = a & b;", "result = a ^ b;"}}, {}});
    REQUIRE(out.errors.size() == 1);
    CHECK(out.errors[0].pair == 0);
    CHECK(out.applied == 1);
    CHECK(out.text.find("result = a ^ b;") != std::string::npos);
  }
  SUBCASE("whitespace-normalized matching keeps indentation") {
    auto out = apply_patchset(kAlu, PatchSet{{{"2'd0:   result =  a - b;", "2'd0: result = a + b;"}}, {}});
    CHECK(out.errors.empty());
    CHECK(out.text.find("      2'd0: result = a + b;\n") != std::string::npos);
  }
  SUBCASE("identifier-bounded matching") {
    std::string t = "module m(input ab, input b, output y);\n  assign y = ab & b;\nendmodule\n";
    CHECK(count_matches(t, "b & b") == 0);
  }
  SUBCASE("locality: unmatched lines are byte-identical") {
    auto out = apply_patchset(kAlu, PatchSet{{{"2'd1: result = a & b;", "2'd1: result = a | b;"}}, {}});
    std::istringstream a(kAlu), b(out.text);
    std::string la, lb;
    int diff = 0;
    while (std::getline(a, la) && std::getline(b, lb)) diff += (la != lb);
    CHECK(diff == 1);
  }
  SUBCASE("whole-file mode replaces everything") {
    auto out = apply_repair(kAlu, PatchSet{{{kAlu, "module x;\nendmodule\n"}}, {}}, RepairMode::kWholeFile);
    CHECK(out.text == "module x;\nendmodule\n");
  }
}

TEST_CASE("oracle backend restores the golden design in both modes") {
  std::size_t n = 0;
  for (const char* name : {"alu4", "counter8", "fifo4", "sort2", "traffic_light"}) {
    const auto& entry = testsupport::corpus_entry(name);
    auto base = parse_text(entry.text);
    REQUIRE(base.ok());
    for (auto kind : kAllMutationKinds) {
      for (const auto& op : enumerate_sites(*base.design, kind)) {
        Mutant m;
        try {
          m = inject(*base.design, op);
        } catch (const Error&) {
          continue;
        }
        for (auto mode : {RepairMode::kPair, RepairMode::kWholeFile}) {
          OracleBackend ob(entry.text);
          RepairRequest req;
          req.dut_text = m.mutated;
          req.mode = mode;
          auto ex = query_agent(ob, req);
          REQUIRE(ex.patch);
          auto out = apply_repair(m.mutated, *ex.patch, mode);
          CAPTURE(m.id);
          CHECK(out.errors.empty());
          auto fixed = parse_text(out.text);
          REQUIRE(fixed.ok());
          CHECK(structurally_equal(*fixed.design, *base.design));
        }
        ++n;
      }
    }
  }
  CHECK(n > 30);
}

TEST_CASE("diff_pairs widens context until unique") {
  std::string from = "a;\nx = 1;\nb;\nx = 1;\nc;\n";
  std::string to = "a;\nx = 1;\nb;\nx = 2;\nc;\n";
  auto pairs = diff_pairs(from, to);
  REQUIRE(pairs.size() == 1);
  CHECK(count_matches(from, pairs[0].wrong) == 1);
  CHECK(apply_patchset(from, PatchSet{pairs, {}}).text == to);
}

TEST_CASE("scripted backend and retry") {
  nlohmann::json script = {{"1", "no json at all"}, {"2", R"({"correct":[{"wrong":"a - b","right":"a + b"}]})"},
                           {"default", R"({"correct":[]})"}};
  ScriptedBackend sb(script);
  auto ex = query_agent(sb, request());
  REQUIRE(ex.patch);
  CHECK(ex.prompts.size() == 2);
  CHECK(ex.prompts[1].find("FORMAT REMINDER") != std::string::npos);
  CHECK(sb.calls() == 2);
  auto ex2 = query_agent(sb, request());
  CHECK_FALSE(ex2.patch);
  REQUIRE(ex2.error);
  CHECK(ex2.error->kind == ResponseError::Kind::kEmptyCorrect);
  CHECK(sb.calls() == 4);
  CHECK(sb.prompts().size() == 4);
}

TEST_CASE("null backend yields no patch") {
  NullBackend nb;
  auto ex = query_agent(nb, request());
  CHECK_FALSE(ex.patch);
  CHECK(nb.calls() == 2);
}

TEST_CASE("remote backend against a local chat endpoint") {
  httplib::Server server;
  std::string seen_auth;
  nlohmann::json seen_body;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_body = nlohmann::json::parse(req.body);
    nlohmann::json reply = {
        {"choices", {{{"message", {{"role", "assistant"}, {"content", R"({"correct":[{"wrong":"a","right":"b"}]})"}}}}}}};
    res.set_content(reply.dump(), "application/json");
  });
  server.Post("/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  setenv("RTLMEND_TEST_KEY", "secret", 1);
  RemoteConfig cfg;
  cfg.url = "http://127.0.0.1:" + std::to_string(port);
  cfg.model = "m1";
  cfg.key_env = "RTLMEND_TEST_KEY";
  cfg.timeout_s = 5;
  RemoteBackend rb(cfg);
  auto ex = query_agent(rb, request());
  REQUIRE(ex.patch);
  CHECK(ex.patch->pairs[0].right == "b");
  CHECK(seen_auth == "Bearer secret");
  CHECK(seen_body["model"] == "m1");
  CHECK(seen_body["messages"][0]["content"].get<std::string>() == build_prompt(request()));

  cfg.path = "/broken";
  RemoteBackend broken(cfg);
  auto bad = query_agent(broken, request());
  CHECK(bad.transport_error);
  CHECK(bad.transport_message.find("500") != std::string::npos);

  server.stop();
  th.join();
}

TEST_CASE("patch set JSON round trip") {
  PatchSet ps{{{"a", "b"}, {"c", "d"}}, "raw text"};
  CHECK(PatchSet::from_json(ps.to_json()) == ps);
  CHECK(parse_repair_mode("whole-file") == RepairMode::kWholeFile);
  CHECK(parse_repair_mode("pair") == RepairMode::kPair);
  CHECK_FALSE(parse_repair_mode("other"));
}
