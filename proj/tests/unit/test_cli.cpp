#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  std::string cmd = std::string(RTLMEND_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("rtlmend_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string put(const std::string& name, const std::string& text) const {
    auto p = dir / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(cli("").code == 2);
  CHECK(cli("frobnicate").code == 2);
  CHECK(cli("lint /nonexistent/file.v").code == 2);
  CHECK(cli("--help").code == 0);
}

TEST_CASE("lint") {
  Scratch s("lint");
  auto good = s.put("good.v", testsupport::alu_golden());
  CHECK(cli("lint " + good).code == 0);

  auto w = testsupport::warning_corpus().front();
  auto warn = s.put("warn.v", w.text);
  auto r = cli("lint --json " + warn);
  CHECK(r.code == 1);
  REQUIRE_FALSE(r.out.empty());
  auto first = nlohmann::json::parse(r.out.substr(0, r.out.find('\n')));
  CHECK(first.contains("code"));

  auto fixed = s.path("fixed.v");
  CHECK(cli("lint --fix -o " + fixed + " " + warn).code == 0);
  CHECK(cli("lint " + fixed).code == 0);

  std::string broken = testsupport::alu_golden();
  broken.erase(broken.find(';'), 1);
  CHECK(cli("lint " + s.put("broken.v", broken)).code == 1);
}

TEST_CASE("simulate") {
  Scratch s("sim");
  auto f = s.put("c.v", testsupport::corpus_entry("counter8").text);
  auto r = cli("simulate --cycles 8 " + f);
  CHECK(r.code == 0);
  CHECK(r.out.find("$enddefinitions") != std::string::npos);
  auto json = s.path("t.json");
  CHECK(cli("simulate --stimulus random --json " + json + " " + f).code == 0);
  std::ifstream in(json);
  CHECK(nlohmann::json::parse(in).contains("count"));
  CHECK(cli("simulate --stimulus psychic " + f).code == 2);
}

TEST_CASE("verify and repair") {
  Scratch s("repair");
  auto g = s.put("golden.v", testsupport::alu_golden());
  auto d = s.put("dut.v", testsupport::alu_two_faults());
  CHECK(cli("verify " + g + " --golden " + g).code == 0);
  auto log = s.path("log.jsonl");
  auto v = cli("verify " + d + " --golden " + g + " --log " + log + " --errinfo");
  CHECK(v.code == 1);
  CHECK(v.out.find("pass_rate") == 0);
  CHECK(fs::file_size(log) > 0);

  auto out = s.path("fixed.v");
  auto r = cli("--backend oracle repair " + d + " --golden " + g + " -o " + out + " --session-dir " + s.path("sess"));
  CHECK(r.code == 0);
  CHECK(r.out.find("Success") == 0);
  CHECK(fs::exists(s.path("sess") + "/session.json"));
  CHECK(cli("verify " + out + " --golden " + g).code == 0);

  CHECK(cli("--backend null repair " + d + " --golden " + g + " --max-iter 1").code == 1);
  CHECK(cli("repair " + d + " --golden " + g + " --mode diff").code == 2);
}

TEST_CASE("inject, bench and report") {
  Scratch s("bench");
  fs::create_directories(s.dir / "corpus" / "alus");
  for (const char* n : {"alu4"}) {
    const auto& e = testsupport::corpus_entry(n);
    s.put(std::string("corpus/alus/") + n + ".v", e.text);
    s.put(std::string("corpus/alus/") + n + ".md", e.spec);
  }
  auto inj = cli("--seed 3 inject --corpus " + s.path("corpus") + " --per-kind 1 -o " + s.path("bm"));
  CHECK(inj.code == 0);
  CHECK(inj.out.find("mutants") != std::string::npos);
  CHECK(fs::exists(s.path("bm") + "/benchmark.json"));
  CHECK(cli("inject --corpus " + s.path("corpus") + " --kind Typo -o " + s.path("bm2")).code == 2);

  auto b = cli("--workers 2 --backend oracle bench " + s.path("bm") + " -o " + s.path("camp"));
  CHECK(b.code == 0);
  CHECK(b.out.find("HR") != std::string::npos);
  CHECK(fs::exists(s.path("camp") + "/heatmap.csv"));

  auto csv = cli("report --format csv " + s.path("camp"));
  CHECK(csv.code == 0);
  CHECK(csv.out.rfind("family,", 0) == 0);
  auto js = cli("report --format json " + s.path("camp") + "/campaign.json");
  CHECK(js.code == 0);
  CHECK(nlohmann::json::parse(js.out).contains("results"));
  s.put("bad.json", "{not json");
  CHECK(cli("report " + s.path("bad.json")).code == 2);
}
