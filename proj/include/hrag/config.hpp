#pragma once

// Engine configuration file (JSON). Every key is optional; missing keys keep
// the defaults below. Relative file paths resolve against the config file.

#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "hrag/error.hpp"
#include "hrag/index_store.hpp"
#include "hrag/llm.hpp"
#include "hrag/orchestrate.hpp"
#include "hrag/rerank.hpp"
#include "hrag/retrieve.hpp"

#ifndef HRAG_DATA_DIR
#define HRAG_DATA_DIR "data"
#endif

namespace hrag {

struct EngineConfig {
  IndexBuildConfig build;
  std::map<Profile, RetrievalConfig> profiles = default_retrieval_profiles();
  RerankerProfile reranker;
  LlmClient llm;
  Lexicon lexicon;
  std::string addr = "127.0.0.1:8080";

  static std::filesystem::path data_dir() { return HRAG_DATA_DIR; }

  /// Defaults plus the bundled gazetteer and lexicon when present.
  static EngineConfig defaults() {
    EngineConfig c;
    if (std::filesystem::exists(data_dir() / "gazetteer.json")) c.build.gazetteer = Gazetteer::load(data_dir() / "gazetteer.json");
    if (std::filesystem::exists(data_dir() / "expansion_lexicon.json"))
      c.lexicon = Lexicon::load(data_dir() / "expansion_lexicon.json");
    return c;
  }

  static EngineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base = ".");

  static EngineConfig load(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::bad_input, "malformed config " + path.string() + ": " + e.what());
    }
    return from_json(j, path.has_parent_path() ? path.parent_path() : ".");
  }

  Components components(const IndexBundle* index, SessionStore* store) const {
    Components c;
    c.index = index;
    c.profiles = profiles;
    c.reranker = reranker;
    c.llm = llm;
    c.lexicon = lexicon;
    c.store = store;
    return c;
  }
};

namespace detail {

inline std::optional<std::string> opt_string(const nlohmann::json& j, const char* key) {
  if (j.contains(key) && j[key].is_string()) return j[key].get<std::string>();
  return std::nullopt;
}

inline void read_chunking(const nlohmann::json& j, ChunkingConfig& c) {
  c.chunk_size = j.value("chunk_size", c.chunk_size);
  c.overlap = j.value("overlap", c.overlap);
  if (j.contains("separators")) c.separators = j["separators"].get<std::vector<std::string>>();
  c.validate();
}

inline void read_profile(const nlohmann::json& j, RetrievalConfig& r) {
  r.w_dense = j.value("w_dense", r.w_dense);
  r.w_sparse = j.value("w_sparse", r.w_sparse);
  r.k_dense = j.value("k_dense", r.k_dense);
  r.k_sparse = j.value("k_sparse", r.k_sparse);
  r.pool_size = j.value("pool_size", r.pool_size);
  r.final_k = j.value("final_k", r.final_k);
  r.embedder = j.value("embedder", r.embedder);
  r.ef_search = j.value("ef_search", r.ef_search);
  if (j.contains("filter")) {
    if (j["filter"].is_null()) {
      r.filter.reset();
    } else {
      MetadataFilter f;
      f.exact = j["filter"].value("exact", std::map<std::string, std::string>{});
      f.require_entity_overlap = j["filter"].value("require_entity_overlap", false);
      r.filter = f;
    }
  }
  if (r.profile == Profile::naive) {
    r.w_dense = 1.0;
    r.w_sparse = 0.0;
  }
  r.validate();
}

template <class T, class F>
T inline_or_file(const nlohmann::json& v, const std::filesystem::path& base, F from_json, T (*load)(const std::filesystem::path&)) {
  if (v.is_string()) {
    std::filesystem::path p = v.get<std::string>();
    return load(p.is_absolute() ? p : base / p);
  }
  return from_json(v);
}

}  // namespace detail

inline EngineConfig EngineConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base) {
  if (!j.is_object()) throw Error(Errc::bad_input, "config must be a JSON object");
  auto c = defaults();
  try {
    if (j.contains("chunking")) detail::read_chunking(j["chunking"], c.build.chunking);
    if (j.contains("naive_chunking")) detail::read_chunking(j["naive_chunking"], c.build.naive_chunking);
    if (j.contains("dense")) {
      const auto& d = j["dense"];
      auto& p = c.build.dense;
      p.M = d.value("M", p.M);
      p.ef_construction = d.value("ef_construction", p.ef_construction);
      p.ef_search = d.value("ef_search", p.ef_search);
      p.quantized = d.value("quantized", p.quantized);
      p.seed = d.value("seed", p.seed);
      p.validate();
    }
    if (j.contains("sparse")) {
      c.build.sparse.k1 = j["sparse"].value("k1", c.build.sparse.k1);
      c.build.sparse.b = j["sparse"].value("b", c.build.sparse.b);
    }
    if (j.contains("embedders"))
      for (const auto& [name, p] : j["embedders"].items()) c.build.embedders[name] = embedder_profile_from_json(name, p);
    if (j.contains("index")) c.build.build_embedders = j["index"].value("embedders", c.build.build_embedders);
    for (const auto& e : c.build.build_embedders)
      if (!c.build.embedders.contains(e)) throw Error(Errc::bad_input, "index.embedders names unknown profile: " + e);
    if (j.contains("reranker")) {
      const auto& r = j["reranker"];
      const auto kind = r.value("kind", std::string("local_lexical"));
      if (kind != "local_lexical" && kind != "remote") throw Error(Errc::bad_input, "reranker.kind must be local_lexical or remote");
      c.reranker.kind = kind == "remote" ? RerankerProfile::Kind::remote : RerankerProfile::Kind::local_lexical;
      c.reranker.endpoint = detail::opt_string(r, "endpoint");
      c.reranker.model_id = detail::opt_string(r, "model_id");
      c.reranker.api_key_env = detail::opt_string(r, "api_key_env");
      c.reranker.top_n = r.value("top_n", c.reranker.top_n);
      if (c.reranker.kind == RerankerProfile::Kind::local_lexical) c.reranker.endpoint.reset();
      c.reranker.validate();
    }
    if (j.contains("llm")) {
      const auto& l = j["llm"];
      const auto mode = l.value("mode", std::string("mock"));
      if (mode != "mock" && mode != "remote") throw Error(Errc::bad_input, "llm.mode must be mock or remote");
      c.llm.mode = mode == "remote" ? LlmClient::Mode::remote : LlmClient::Mode::mock;
      c.llm.endpoint = detail::opt_string(l, "endpoint");
      c.llm.model_id = l.value("model_id", c.llm.model_id);
      c.llm.temperature = l.value("temperature", c.llm.temperature);
      c.llm.api_key_env = detail::opt_string(l, "api_key_env");
      c.llm.validate();
    }
    if (j.contains("profiles"))
      for (const auto& [name, p] : j["profiles"].items()) {
        const auto prof = profile_from_string(name);
        detail::read_profile(p, c.profiles[prof]);
        c.profiles[prof].profile = prof;
      }
    if (j.contains("gazetteer"))
      c.build.gazetteer = detail::inline_or_file<Gazetteer>(j["gazetteer"], base, Gazetteer::from_json, &Gazetteer::load);
    if (j.contains("lexicon"))
      c.lexicon = detail::inline_or_file<Lexicon>(j["lexicon"], base, Lexicon::from_json, &Lexicon::load);
    if (j.contains("service")) c.addr = j["service"].value("addr", c.addr);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_input, std::string("config: ") + e.what());
  }
  return c;
}

}  // namespace hrag
