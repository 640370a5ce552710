#pragma once

// LLM client contract. Remote mode speaks the chat-completions shape; mock
// mode is handled by the callers with fixed deterministic rules.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hrag/error.hpp"
#include "hrag/remote.hpp"
#include "hrag/text.hpp"

namespace hrag {

struct LlmClient {
  enum class Mode { mock, remote };
  Mode mode = Mode::mock;
  std::optional<std::string> endpoint;
  std::string model_id = "mistral-7b-instruct";
  double temperature = 0.0;
  std::optional<std::string> api_key_env;

  void validate() const {
    if (temperature < 0) throw Error(Errc::bad_input, "llm temperature must be >= 0");
    if (mode == Mode::remote && !endpoint) throw Error(Errc::bad_input, "remote llm requires an endpoint");
  }
};

struct ChatMessage {
  std::string role;
  std::string content;
};

/// POST {"model", "messages", "temperature"} -> choices[0].message.content.
inline std::string chat(const LlmClient& client, const std::vector<ChatMessage>& messages) {
  client.validate();
  if (client.mode != LlmClient::Mode::remote) throw Error(Errc::invalid_state, "chat() requires a remote llm client");
  auto msgs = nlohmann::json::array();
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  nlohmann::json body{{"model", client.model_id}, {"messages", msgs}, {"temperature", client.temperature}};
  const auto res = post_json({*client.endpoint, client.api_key_env}, body);
  std::string content;
  try {
    content = res.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::upstream_unavailable, std::string("malformed chat response: ") + e.what());
  }
  if (is_blank(content)) throw Error(Errc::upstream_unavailable, "llm returned an empty completion");
  return content;
}

/// Synonym table for mock query expansion: {"term": ["synonym", ...]}.
class Lexicon {
 public:
  Lexicon() = default;

  static Lexicon from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(Errc::bad_input, "lexicon must be a JSON object");
    Lexicon lx;
    try {
      for (const auto& [term, syns] : j.items()) {
        auto& list = lx.map_[to_lower(term)];
        for (const auto& s : syns) list.push_back(to_lower(s.get<std::string>()));
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::bad_input, std::string("malformed lexicon: ") + e.what());
    }
    return lx;
  }

  static Lexicon load(const std::filesystem::path& path) {
    try {
      return from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::bad_input, "malformed lexicon " + path.string() + ": " + e.what());
    }
  }

  const std::vector<std::string>* synonyms(const std::string& term) const {
    auto it = map_.find(term);
    return it == map_.end() ? nullptr : &it->second;
  }

  void add(const std::string& term, std::vector<std::string> syns) { map_[to_lower(term)] = std::move(syns); }

 private:
  std::map<std::string, std::vector<std::string>> map_;
};

}  // namespace hrag
