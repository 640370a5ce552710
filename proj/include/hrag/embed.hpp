#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hrag/error.hpp"
#include "hrag/remote.hpp"
#include "hrag/text.hpp"

namespace hrag {

using EmbeddingVector = std::vector<float>;

inline double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

inline double l2_norm(std::span<const float> v) { return std::sqrt(dot(v, v)); }

/// Scales to unit length; a zero vector becomes e_0.
inline void normalize_in_place(std::vector<double>& acc) {
  double n = 0.0;
  for (double x : acc) n += x * x;
  n = std::sqrt(n);
  if (n == 0.0) {
    std::fill(acc.begin(), acc.end(), 0.0);
    if (!acc.empty()) acc[0] = 1.0;
    return;
  }
  for (auto& x : acc) x /= n;
}

inline EmbeddingVector normalized(std::span<const double> v) {
  std::vector<double> acc(v.begin(), v.end());
  normalize_in_place(acc);
  return EmbeddingVector(acc.begin(), acc.end());
}

/// Feature-hashing embedder: every token and every character trigram of a
/// token is hashed (FNV-1a 64) into bucket h % dims with sign -1 when bit 63
/// is set. Empty input maps to e_0.
inline EmbeddingVector local_embed(std::string_view text, std::size_t dims) {
  if (dims < 8) throw Error(Errc::bad_input, "local embedder requires dims >= 8");
  std::vector<double> acc(dims, 0.0);
  auto add = [&](std::string_view feature) {
    const auto h = fnv1a64(feature);
    acc[h % dims] += (h >> 63) ? -1.0 : 1.0;
  };
  for (const auto& tok : tokenize(text)) {
    add(tok);
    for (std::size_t i = 0; i + 3 <= tok.size(); ++i) add(std::string_view(tok).substr(i, 3));
  }
  normalize_in_place(acc);
  return EmbeddingVector(acc.begin(), acc.end());
}

struct EmbedderProfile {
  std::string name;
  std::size_t dims = 0;
  std::optional<std::string> endpoint;  // set iff remote
  std::optional<std::string> model_id;
  std::optional<std::string> api_key_env;

  bool remote() const { return endpoint.has_value(); }

  void validate() const {
    if (dims == 0) throw Error(Errc::bad_input, "embedder profile " + name + ": dims must be > 0");
    if (!remote() && dims < 8) throw Error(Errc::bad_input, "embedder profile " + name + ": local dims must be >= 8");
  }
};

inline nlohmann::json to_json(const EmbedderProfile& p) {
  nlohmann::json j{{"name", p.name}, {"dims", p.dims}};
  j["endpoint"] = p.endpoint ? nlohmann::json(*p.endpoint) : nlohmann::json(nullptr);
  j["model_id"] = p.model_id ? nlohmann::json(*p.model_id) : nlohmann::json(nullptr);
  if (p.api_key_env) j["api_key_env"] = *p.api_key_env;
  return j;
}

inline EmbedderProfile embedder_profile_from_json(const std::string& name, const nlohmann::json& j) {
  EmbedderProfile p;
  p.name = j.value("name", name);
  p.dims = j.at("dims").get<std::size_t>();
  if (j.contains("endpoint") && j["endpoint"].is_string()) p.endpoint = j["endpoint"].get<std::string>();
  if (j.contains("model_id") && j["model_id"].is_string()) p.model_id = j["model_id"].get<std::string>();
  if (j.contains("api_key_env") && j["api_key_env"].is_string()) p.api_key_env = j["api_key_env"].get<std::string>();
  p.validate();
  return p;
}

/// high_precision and lightweight expect a served sentence-embedding model;
/// local_test is the in-process hashed embedder.
inline std::map<std::string, EmbedderProfile> default_embedder_profiles() {
  return {
      {"high_precision", {"high_precision", 768, "http://127.0.0.1:8081/v1/embeddings", "all-mpnet-base-v2", {}}},
      {"lightweight", {"lightweight", 384, "http://127.0.0.1:8081/v1/embeddings", "paraphrase-MiniLM-L3-v2", {}}},
      {"local_test", {"local_test", 1024, {}, {}, {}}},
  };
}

/// Embeds a batch. Remote wire format: POST {"model", "input": [str]} ->
/// {"data": [{"embedding": [float]}]}. A batch either fully succeeds or throws.
inline std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts, const EmbedderProfile& profile) {
  if (texts.empty()) throw Error(Errc::bad_input, "embed_texts requires at least one text");
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  if (!profile.remote()) {
    for (const auto& t : texts) out.push_back(local_embed(t, profile.dims));
    return out;
  }
  nlohmann::json body{{"model", profile.model_id.value_or(profile.name)}, {"input", texts}};
  const auto res = post_json({*profile.endpoint, profile.api_key_env}, body);
  try {
    const auto& data = res.at("data");
    if (data.size() != texts.size())
      throw Error(Errc::upstream_unavailable, "embedding endpoint returned " + std::to_string(data.size()) +
                                                  " vectors for " + std::to_string(texts.size()) + " inputs");
    for (const auto& item : data) {
      const auto v = item.at("embedding").get<std::vector<double>>();
      if (v.size() != profile.dims)
        throw Error(Errc::dimension_mismatch, "embedding endpoint returned dims " + std::to_string(v.size()) +
                                                  ", profile " + profile.name + " expects " +
                                                  std::to_string(profile.dims));
      out.push_back(normalized(v));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::upstream_unavailable, std::string("malformed embedding response: ") + e.what());
  }
  return out;
}

inline EmbeddingVector embed_one(const std::string& text, const EmbedderProfile& profile) {
  return embed_texts({text}, profile).front();
}

}  // namespace hrag
