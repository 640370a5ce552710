#pragma once

// Hybrid retrieval: dense and sparse search, min-max normalization, weighted
// fusion, then a hard metadata / entity filter.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "hrag/error.hpp"
#include "hrag/index_store.hpp"

namespace hrag {

enum class Profile { direct_llm, naive, advanced };

inline std::string_view to_string(Profile p) {
  switch (p) {
    case Profile::direct_llm: return "direct_llm";
    case Profile::naive: return "naive";
    case Profile::advanced: return "advanced";
  }
  return "advanced";
}

inline Profile profile_from_string(std::string_view s) {
  if (s == "direct_llm") return Profile::direct_llm;
  if (s == "naive") return Profile::naive;
  if (s == "advanced") return Profile::advanced;
  throw Error(Errc::bad_input, "unknown profile: " + std::string(s));
}

struct MetadataFilter {
  std::map<std::string, std::string> exact;
  bool require_entity_overlap = false;

  bool empty() const { return exact.empty() && !require_entity_overlap; }
};

struct RetrievalConfig {
  Profile profile = Profile::advanced;
  double w_dense = 0.6;
  double w_sparse = 0.4;
  std::size_t k_dense = 50;
  std::size_t k_sparse = 50;
  std::size_t pool_size = 50;
  std::size_t final_k = 5;
  std::optional<MetadataFilter> filter;
  std::string embedder = "local_test";
  std::size_t ef_search = 0;  // 0 keeps the index default

  void validate() const {
    if (w_dense < 0 || w_sparse < 0 || std::abs(w_dense + w_sparse - 1.0) > 1e-9)
      throw Error(Errc::bad_input, "fusion weights must be non-negative and sum to 1");
    if (k_dense == 0 || k_sparse == 0 || final_k == 0) throw Error(Errc::bad_input, "k values must be >= 1");
    if (pool_size < final_k) throw Error(Errc::bad_input, "pool_size must be >= final_k");
    if (filter && filter->empty()) throw Error(Errc::bad_input, "metadata filter has no criterion");
  }
};

struct ScoredCandidate {
  std::string chunk_id;
  std::optional<double> dense_raw;
  std::optional<double> sparse_raw;
  double dense_norm = 0.0;
  double sparse_norm = 0.0;
  double fused = 0.0;
  std::optional<double> rerank;

  bool operator==(const ScoredCandidate&) const = default;
};

inline nlohmann::json to_json(const ScoredCandidate& c) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"chunk_id", c.chunk_id},     {"dense_raw", opt(c.dense_raw)}, {"sparse_raw", opt(c.sparse_raw)},
          {"dense_norm", c.dense_norm}, {"sparse_norm", c.sparse_norm},  {"fused", c.fused},
          {"rerank", opt(c.rerank)}};
}

/// Min-max over the given list. A constant list maps to 1.0 so a single hit
/// still carries its weight.
inline std::vector<SearchHit> normalize_scores(const std::vector<SearchHit>& raw) {
  if (raw.empty()) return {};
  auto [lo, hi] = std::minmax_element(raw.begin(), raw.end(),
                                      [](const SearchHit& a, const SearchHit& b) { return a.score < b.score; });
  const double min = lo->score, max = hi->score;
  std::vector<SearchHit> out;
  out.reserve(raw.size());
  for (const auto& h : raw) out.push_back({h.chunk_id, max == min ? 1.0 : (h.score - min) / (max - min)});
  return out;
}

/// fused = w_dense * dense_norm + w_sparse * sparse_norm over the union of
/// both lists; a missing side contributes 0. Sorted by fused desc, then id.
inline std::vector<ScoredCandidate> fuse(const std::vector<SearchHit>& dense, const std::vector<SearchHit>& sparse,
                                         double w_dense, double w_sparse) {
  if (w_dense < 0 || w_sparse < 0 || std::abs(w_dense + w_sparse - 1.0) > 1e-9)
    throw Error(Errc::bad_input, "fusion weights must be non-negative and sum to 1");
  std::unordered_map<std::string, std::size_t> pos;
  std::vector<ScoredCandidate> out;
  auto slot = [&](const std::string& id) -> ScoredCandidate& {
    auto [it, fresh] = pos.emplace(id, out.size());
    if (fresh) {
      out.emplace_back();
      out.back().chunk_id = id;
    }
    return out[it->second];
  };
  for (const auto& h : dense) slot(h.chunk_id).dense_norm = h.score;
  for (const auto& h : sparse) slot(h.chunk_id).sparse_norm = h.score;
  for (auto& c : out) c.fused = w_dense * c.dense_norm + w_sparse * c.sparse_norm;
  std::sort(out.begin(), out.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
    if (a.fused != b.fused) return a.fused > b.fused;
    return a.chunk_id < b.chunk_id;
  });
  return out;
}

inline bool entity_overlap(const std::vector<Entity>& a, const std::vector<Entity>& b) {
  for (const auto& x : a)
    for (const auto& y : b)
      if (x.same_as(y)) return true;
  return false;
}

/// Hard filter; survivors keep their order. With no query entities the
/// overlap criterion is vacuously met.
inline std::vector<ScoredCandidate> apply_filter(const std::vector<ScoredCandidate>& cands, const MetadataFilter& filter,
                                                 const std::vector<Entity>& query_entities, const IndexVariant& lookup) {
  std::vector<ScoredCandidate> out;
  for (const auto& c : cands) {
    const auto& chunk = lookup.chunk(c.chunk_id);
    bool keep = true;
    for (const auto& [k, v] : filter.exact) {
      auto it = chunk.metadata.find(k);
      if (it == chunk.metadata.end() || it->second != v) {
        keep = false;
        break;
      }
    }
    if (keep && filter.require_entity_overlap && !query_entities.empty())
      keep = entity_overlap(query_entities, chunk.entities);
    if (keep) out.push_back(c);
  }
  return out;
}

/// The index variant a profile reads from.
inline const IndexVariant& variant_for(const IndexBundle& b, Profile p) {
  return p == Profile::naive ? b.naive : b.advanced;
}

/// naive: dense only over the naive variant, weight forced to 1, no filter.
/// advanced: dense + sparse, fused, filtered. direct_llm: nothing.
inline std::vector<ScoredCandidate> retrieve(const std::string& query, const RetrievalConfig& cfg,
                                             const IndexBundle& bundle) {
  cfg.validate();
  if (cfg.profile == Profile::direct_llm) return {};
  const auto& v = variant_for(bundle, cfg.profile);
  const auto& dense_index = v.dense_for(cfg.embedder);
  if (dense_index.tag() != v.sparse.tag() || dense_index.tag() != bundle.version)
    throw Error(Errc::version_mismatch, "dense and sparse indices were built from different corpus versions");
  if (v.chunks.empty()) return {};

  const auto qvec = embed_one(query, bundle.embedder(cfg.embedder));
  const auto ef = cfg.ef_search ? cfg.ef_search : dense_index.params().ef_search;
  const auto dense_raw = dense_index.search(qvec, std::min(cfg.k_dense, dense_index.size()), ef);

  std::vector<SearchHit> sparse_raw;
  const bool naive = cfg.profile == Profile::naive;
  if (!naive) sparse_raw = v.sparse.search(query, cfg.k_sparse);

  auto fused = naive ? fuse(normalize_scores(dense_raw), {}, 1.0, 0.0)
                     : fuse(normalize_scores(dense_raw), normalize_scores(sparse_raw), cfg.w_dense, cfg.w_sparse);
  std::unordered_map<std::string, double> draw, sraw;
  for (const auto& h : dense_raw) draw[h.chunk_id] = h.score;
  for (const auto& h : sparse_raw) sraw[h.chunk_id] = h.score;
  for (auto& c : fused) {
    if (auto it = draw.find(c.chunk_id); it != draw.end()) c.dense_raw = it->second;
    if (auto it = sraw.find(c.chunk_id); it != sraw.end()) c.sparse_raw = it->second;
  }

  if (!naive && cfg.filter) fused = apply_filter(fused, *cfg.filter, find_entities(query, bundle.gazetteer), v);
  if (fused.size() > cfg.pool_size) fused.resize(cfg.pool_size);
  return fused;
}

}  // namespace hrag
