#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "rtlmend/agent.hpp"
#include "rtlmend/error.hpp"

namespace rtlmend {

ScriptedBackend::ScriptedBackend(nlohmann::json script) {
  if (!script.is_object()) throw ConfigError("scripted backend fixture must be a JSON object");
  for (auto it = script.begin(); it != script.end(); ++it) {
    if (!it.value().is_string())
      throw ConfigError("scripted backend entry '" + it.key() + "' is not a string");
    script_.emplace_back(it.key(), it.value().get<std::string>());
  }
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError(path + ": invalid JSON");
  return std::make_unique<ScriptedBackend>(std::move(j));
}

BackendReply ScriptedBackend::send(const RepairRequest&, const std::string& prompt) {
  prompts_.push_back(prompt);
  std::string key = std::to_string(++calls_);
  const std::string* fallback = nullptr;
  for (const auto& [k, v] : script_) {
    if (k == key) return {v, 0.0, false, {}};
    if (k == "default") fallback = &v;
  }
  if (fallback) return {*fallback, 0.0, false, {}};
  return {"", 0.0, true, "no scripted response for call " + key};
}

RemoteBackend::RemoteBackend(RemoteConfig cfg) : cfg_(std::move(cfg)) {}

BackendReply RemoteBackend::send(const RepairRequest&, const std::string& prompt) {
  ++calls_;
  BackendReply reply;
  const char* key = std::getenv(cfg_.key_env.c_str());
  nlohmann::json body = {{"model", cfg_.model},
                         {"temperature", cfg_.temperature},
                         {"messages", {{{"role", "user"}, {"content", prompt}}}}};
  auto t0 = std::chrono::steady_clock::now();
  try {
    httplib::Client cli(cfg_.url);
    cli.set_connection_timeout(cfg_.timeout_s, 0);
    cli.set_read_timeout(cfg_.timeout_s, 0);
    cli.set_write_timeout(cfg_.timeout_s, 0);
    httplib::Headers headers;
    if (key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);
    auto res = cli.Post(cfg_.path, headers, body.dump(), "application/json");
    reply.latency_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!res) {
      reply.transport_error = true;
      reply.error = "request failed: " + httplib::to_string(res.error());
      return reply;
    }
    if (res->status < 200 || res->status >= 300) {
      reply.transport_error = true;
      reply.error = "HTTP " + std::to_string(res->status);
      return reply;
    }
    auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("choices") || j["choices"].empty()) {
      reply.transport_error = true;
      reply.error = "unexpected response body";
      return reply;
    }
    reply.text = j["choices"][0].at("message").at("content").get<std::string>();
  } catch (const std::exception& e) {
    reply.latency_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    reply.transport_error = true;
    reply.error = e.what();
  }
  return reply;
}

OracleBackend::OracleBackend(std::string golden_text) : golden_(std::move(golden_text)) {}

BackendReply OracleBackend::send(const RepairRequest& req, const std::string&) {
  ++calls_;
  nlohmann::json j;
  if (req.mode == RepairMode::kWholeFile) {
    j["code"] = golden_;
  } else {
    j["correct"] = nlohmann::json::array();
    for (const auto& p : diff_pairs(req.dut_text, golden_))
      j["correct"].push_back({{"wrong", p.wrong}, {"right", p.right}});
  }
  return {j.dump(2), 0.0, false, {}};
}

BackendReply NullBackend::send(const RepairRequest& req, const std::string&) {
  ++calls_;
  return {req.mode == RepairMode::kWholeFile ? R"({"code": ""})" : R"({"correct": []})", 0.0, false, {}};
}

}  // namespace rtlmend
