#include "rtlmend/testbench.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <random>
#include <tuple>

#include <nlohmann/json.hpp>

#include "rtlmend/error.hpp"

namespace rtlmend {
namespace {

struct DrivenInput {
  std::string name;
  int width;
  bool reset;
};

std::vector<DrivenInput> driven_inputs(const ElaboratedDesign& d) {
  std::vector<DrivenInput> out;
  for (int in : d.inputs) {
    if (in == d.clock) continue;
    const auto& s = d.signals[static_cast<std::size_t>(in)];
    out.push_back({s.name, s.width, in == d.reset});
  }
  return out;
}

Stimulus skeleton(const ElaboratedDesign& d, StimulusMode mode, std::uint64_t seed, int reset_cycles,
                  const std::vector<DrivenInput>& ins) {
  Stimulus st;
  st.mode = mode;
  st.seed = seed;
  st.reset_cycles = d.reset >= 0 ? reset_cycles : 0;
  for (const auto& in : ins) {
    st.inputs.push_back(in.name);
    st.widths.push_back(in.width);
  }
  std::uint64_t asserted = d.reset_active_low ? 0 : 1;
  for (int c = 0; c < st.reset_cycles; ++c) {
    std::vector<std::uint64_t> row;
    for (const auto& in : ins) row.push_back(in.reset ? asserted : 0);
    st.vectors.push_back(std::move(row));
    st.in_reset.push_back(1);
  }
  return st;
}

std::uint64_t deasserted(const ElaboratedDesign& d) { return d.reset_active_low ? 1 : 0; }

}  // namespace

int data_input_bits(const ElaboratedDesign& design) {
  int bits = 0;
  for (const auto& in : driven_inputs(design))
    if (!in.reset) bits += in.width;
  return bits;
}

Stimulus make_stimulus(const ElaboratedDesign& design, StimulusMode mode, std::uint64_t seed,
                       std::size_t cycles, int reset_cycles, const std::string& directed_file) {
  auto ins = driven_inputs(design);
  switch (mode) {
    case StimulusMode::kExhaustive: {
      int bits = data_input_bits(design);
      if (bits > kExhaustiveBitLimit)
        throw ExhaustiveTooLarge(std::to_string(bits) + " input bits exceed the exhaustive limit of " +
                                 std::to_string(kExhaustiveBitLimit));
      Stimulus st = skeleton(design, mode, seed, reset_cycles, ins);
      for (std::uint64_t k = 0; k < (1ull << bits); ++k) {
        std::vector<std::uint64_t> row;
        int offset = 0;
        for (const auto& in : ins) {
          if (in.reset) {
            row.push_back(deasserted(design));
            continue;
          }
          row.push_back((k >> offset) & width_mask(in.width));
          offset += in.width;
        }
        st.vectors.push_back(std::move(row));
        st.in_reset.push_back(0);
      }
      return st;
    }
    case StimulusMode::kRandom: {
      Stimulus st = skeleton(design, mode, seed, reset_cycles, ins);
      std::mt19937_64 rng(seed);
      for (std::size_t c = 0; c < cycles; ++c) {
        std::vector<std::uint64_t> row;
        for (const auto& in : ins)
          row.push_back(in.reset ? deasserted(design) : rng() & width_mask(in.width));
        st.vectors.push_back(std::move(row));
        st.in_reset.push_back(0);
      }
      return st;
    }
    case StimulusMode::kDirected: {
      std::ifstream f(directed_file);
      if (!f) throw IoError("cannot read directed stimulus '" + directed_file + "'");
      nlohmann::json j;
      try {
        f >> j;
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError("directed stimulus '" + directed_file + "': " + e.what());
      }
      int rc = j.value("reset_cycles", reset_cycles);
      Stimulus st = skeleton(design, mode, seed, rc, ins);
      for (const auto& v : j.at("vectors")) {
        std::vector<std::uint64_t> row;
        for (const auto& in : ins) {
          std::uint64_t def = in.reset ? deasserted(design) : 0;
          row.push_back(v.value(in.name, def) & width_mask(in.width));
        }
        st.vectors.push_back(std::move(row));
        st.in_reset.push_back(0);
      }
      if (cycles && st.vectors.size() > cycles + static_cast<std::size_t>(st.reset_cycles)) {
        st.vectors.resize(cycles + static_cast<std::size_t>(st.reset_cycles));
        st.in_reset.resize(st.vectors.size());
      }
      return st;
    }
  }
  throw ConfigError("unknown stimulus mode");
}

Stimulus default_suite(const ElaboratedDesign& design, std::uint64_t seed_base) {
  bool exhaustive = data_input_bits(design) <= kExhaustiveBitLimit;
  std::optional<Stimulus> suite;
  if (exhaustive) suite = make_stimulus(design, StimulusMode::kExhaustive, seed_base, 0);
  if (!exhaustive || design.sequential()) {
    for (std::uint64_t s = 0; s < 8; ++s) {
      Stimulus r = make_stimulus(design, StimulusMode::kRandom, seed_base + s, 256);
      if (suite)
        suite->append(r);
      else
        suite = std::move(r);
    }
  }
  return std::move(*suite);
}

Stimulus extended_suite(const ElaboratedDesign& design, std::uint64_t seed_base, int seeds,
                        std::size_t cycles) {
  bool exhaustive = data_input_bits(design) <= kExhaustiveBitLimit;
  std::optional<Stimulus> suite;
  if (exhaustive) suite = make_stimulus(design, StimulusMode::kExhaustive, seed_base, 0);
  if (!exhaustive || design.sequential()) {
    for (int s = 0; s < seeds; ++s) {
      Stimulus r = make_stimulus(design, StimulusMode::kRandom,
                                 seed_base + static_cast<std::uint64_t>(s), cycles);
      if (suite)
        suite->append(r);
      else
        suite = std::move(r);
    }
  }
  return std::move(*suite);
}

void check_port_contract(const ElaboratedDesign& dut, const ElaboratedDesign& golden) {
  auto ports = [](const ElaboratedDesign& d) {
    std::vector<std::tuple<std::string, int, int>> out;
    for (int s : d.inputs) out.emplace_back(d.signals[static_cast<std::size_t>(s)].name, 0,
                                            d.signals[static_cast<std::size_t>(s)].width);
    for (int s : d.outputs) out.emplace_back(d.signals[static_cast<std::size_t>(s)].name, 1,
                                             d.signals[static_cast<std::size_t>(s)].width);
    std::sort(out.begin(), out.end());
    return out;
  };
  auto a = ports(dut), b = ports(golden);
  if (a == b) return;
  for (const auto& p : b)
    if (std::find(a.begin(), a.end(), p) == a.end())
      throw PortContractViolation("DUT port '" + std::get<0>(p) +
                                  "' is missing or differs in direction or width from the golden model");
  for (const auto& p : a)
    if (std::find(b.begin(), b.end(), p) == b.end())
      throw PortContractViolation("DUT port '" + std::get<0>(p) + "' does not exist in the golden model");
}

Verifier::Verifier(const ElaboratedDesign& golden, Stimulus stimulus)
    : golden_(SimProgram::build(golden)), stimulus_(std::move(stimulus)) {
  for (int o : golden.outputs) outputs_.push_back(golden.signals[static_cast<std::size_t>(o)].name);
  std::vector<int> slots;
  for (int o : golden.outputs) slots.push_back(golden_->slot_of(o));
  Simulator sim(golden_);
  sim.bind_inputs(stimulus_.inputs);
  expected_.reserve(stimulus_.cycles() * slots.size());
  for (const auto& row : stimulus_.vectors) {
    sim.cycle(row);
    for (int s : slots) expected_.push_back(sim.state()[static_cast<std::size_t>(s)]);
  }
}

VerifyReport Verifier::verify(const ElaboratedDesign& dut, bool record_trace) const {
  check_port_contract(dut, golden_->design());
  VerifyReport r;
  r.outputs = outputs_;
  auto program = SimProgram::build(dut);
  std::vector<int> slots;
  for (const auto& name : outputs_) slots.push_back(program->slot_of(dut.resolve(0, name)));
  std::size_t n_out = slots.size();
  auto score = [&](std::size_t c, const Value* state) {
    if (stimulus_.in_reset[c]) return;
    for (std::size_t o = 0; o < n_out; ++o) {
      const Value& exp = expected_[c * n_out + o];
      const Value& act = state[static_cast<std::size_t>(slots[o])];
      Check ck{static_cast<std::uint32_t>(c), static_cast<int>(o), exp, act, scoreboard_match(exp, act)};
      ++r.total_checks;
      if (ck.pass) {
        ++r.passed_checks;
      } else {
        r.mismatches.push_back({ck.time, outputs_[o], exp, act});
      }
      r.checks.push_back(ck);
    }
  };
  if (record_trace) {
    r.trace = simulate(*program, stimulus_, stimulus_.cycles());
    for (std::size_t c = 0; c < stimulus_.cycles(); ++c) score(c, r.trace.row(c));
  } else {
    Simulator sim(program);
    sim.bind_inputs(stimulus_.inputs);
    for (std::size_t c = 0; c < stimulus_.cycles(); ++c) {
      sim.cycle(stimulus_.vectors[c]);
      score(c, sim.state().data());
    }
  }
  r.pass_rate = r.total_checks ? static_cast<double>(r.passed_checks) / static_cast<double>(r.total_checks)
                               : 1.0;
  return r;
}

VerifyReport run_verify(const ElaboratedDesign& dut, const ElaboratedDesign& golden,
                        const Stimulus& stimulus, std::size_t cycles) {
  if (cycles > stimulus.cycles())
    throw StimulusMismatch("stimulus has " + std::to_string(stimulus.cycles()) + " cycles, " +
                           std::to_string(cycles) + " requested");
  Stimulus st = stimulus;
  st.vectors.resize(cycles);
  st.in_reset.resize(cycles);
  return Verifier(golden, std::move(st)).verify(dut);
}

std::vector<std::string> VerifyReport::log_lines() const {
  std::vector<std::string> out;
  out.reserve(checks.size() + 1);
  for (const auto& c : checks) {
    nlohmann::ordered_json j;
    j["kind"] = "check";
    j["time"] = c.time;
    j["signal"] = outputs[static_cast<std::size_t>(c.output)];
    j["expected"] = c.expected.to_binstring();
    j["actual"] = c.actual.to_binstring();
    j["pass"] = c.pass;
    out.push_back(j.dump());
  }
  nlohmann::ordered_json s;
  s["kind"] = "summary";
  s["pass_rate"] = pass_rate;
  s["total"] = total_checks;
  s["passed"] = passed_checks;
  out.push_back(s.dump());
  return out;
}

std::string VerifyReport::log_text() const {
  std::string text;
  for (const auto& l : log_lines()) {
    text += l;
    text += '\n';
  }
  return text;
}

}  // namespace rtlmend
