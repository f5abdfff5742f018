#include <cstdlib>
#include <regex>

#include "httplib.h"
#include "json.hpp"
#include "mocsim/error.hpp"
#include "mocsim/pipeline.hpp"

namespace mocsim::pipeline {

RemoteGenerator::RemoteGenerator(RemoteConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.prompt_template.empty()) cfg_.prompt_template = default_prompt_template();
}

std::string RemoteGenerator::generate(const GenerationRequest& request) const {
  static const std::regex url_re(R"(^(https?)://([^/:]+)(?::(\d+))?(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(cfg_.url, m, url_re))
    throw Error(ErrorCode::GeneratorUnavailable, "remote generator needs an http(s) URL, got '" + cfg_.url + "'");
  const std::string scheme = m[1], host = m[2];
  const std::string path = m[4].matched ? m[4].str() : "/";
  const int port = m[3].matched ? std::stoi(m[3]) : (scheme == "https" ? 443 : 80);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (scheme == "https") throw Error(ErrorCode::GeneratorUnavailable, "built without TLS support; use an http URL");
#endif

  httplib::Client client(scheme + "://" + host + ":" + std::to_string(port));
  const auto secs = static_cast<time_t>(cfg_.timeout_s);
  const auto usecs = static_cast<time_t>((cfg_.timeout_s - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  httplib::Headers headers;
  if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key)
    headers.emplace("Authorization", std::string("Bearer ") + key);

  const nlohmann::json body = {
      {"model", cfg_.model},
      {"temperature", 0},
      {"messages", {{{"role", "user"}, {"content", render_prompt(cfg_.prompt_template, request)}}}},
  };
  const auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) throw Error(ErrorCode::RemoteError, "cannot reach " + cfg_.url + ": " + httplib::to_string(res.error()));
  if (res->status != 200) throw Error(ErrorCode::RemoteError, "remote endpoint returned HTTP " + std::to_string(res->status));

  try {
    const auto reply = nlohmann::json::parse(res->body);
    return extract_code(reply.at("choices").at(0).at("message").at("content").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::RemoteError, std::string("malformed completion reply: ") + e.what());
  }
}

}  // namespace mocsim::pipeline
