#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "hrag/error.hpp"
#include "hrag/index_store.hpp"
#include "hrag/remote.hpp"
#include "hrag/retrieve.hpp"
#include "hrag/text.hpp"

namespace hrag {

struct RerankerProfile {
  enum class Kind { local_lexical, remote };
  Kind kind = Kind::local_lexical;
  std::optional<std::string> endpoint;  // set iff remote
  std::optional<std::string> model_id;
  std::optional<std::string> api_key_env;
  std::size_t top_n = 20;

  static constexpr const char* kDefaultModel = "ms-marco-MiniLM-L-12-v2";

  void validate() const {
    if (top_n == 0) throw Error(Errc::bad_input, "reranker top_n must be >= 1");
    if ((kind == Kind::remote) != endpoint.has_value())
      throw Error(Errc::bad_input, "reranker endpoint must be set exactly when kind is remote");
  }
};

/// Thrown when the remote reranker fails. Carries the input ordering so the
/// caller can carry on without reranking.
class RerankError : public Error {
 public:
  RerankError(const Error& inner, std::vector<ScoredCandidate> fallback)
      : Error(inner.code(), inner.what()), fallback_(std::move(fallback)) {}
  const std::vector<ScoredCandidate>& fallback() const { return fallback_; }

 private:
  std::vector<ScoredCandidate> fallback_;
};

/// Token-multiset F1: 2 * |overlap| / (|q| + |c|). Zero when either side is
/// empty.
inline double score_pair(std::string_view query, std::string_view chunk_text) {
  const auto q = tokenize(query);
  const auto c = tokenize(chunk_text);
  if (q.empty() || c.empty()) return 0.0;
  std::unordered_map<std::string, int> counts;
  for (const auto& t : q) ++counts[t];
  std::size_t overlap = 0;
  for (const auto& t : c) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  return 2.0 * static_cast<double>(overlap) / static_cast<double>(q.size() + c.size());
}

namespace detail {

/// Remote wire format: POST {"model", "query", "documents"} -> {"scores"}.
inline std::vector<double> remote_scores(const RerankerProfile& p, const std::string& query,
                                         const std::vector<std::string>& docs) {
  nlohmann::json body{{"model", p.model_id.value_or(RerankerProfile::kDefaultModel)}, {"query", query}, {"documents", docs}};
  const auto res = post_json({*p.endpoint, p.api_key_env}, body);
  std::vector<double> scores;
  try {
    scores = res.at("scores").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::upstream_unavailable, std::string("malformed rerank response: ") + e.what());
  }
  if (scores.size() != docs.size())
    throw Error(Errc::upstream_unavailable, "rerank endpoint returned " + std::to_string(scores.size()) +
                                                " scores for " + std::to_string(docs.size()) + " documents");
  std::vector<SearchHit> hits;
  for (std::size_t i = 0; i < scores.size(); ++i) hits.push_back({std::to_string(i), scores[i]});
  const auto norm = normalize_scores(hits);
  for (std::size_t i = 0; i < norm.size(); ++i) scores[i] = norm[i].score;
  return scores;
}

}  // namespace detail

/// Scores the first top_n candidates and sorts that prefix by (rerank desc,
/// fused desc, chunk_id asc). The rest follow unchanged and without a score.
inline std::vector<ScoredCandidate> rerank_candidates(const std::string& query, std::vector<ScoredCandidate> cands,
                                                      const RerankerProfile& profile, const IndexVariant& lookup) {
  profile.validate();
  const auto n = std::min(profile.top_n, cands.size());
  if (n == 0) return cands;
  std::vector<std::string> texts;
  texts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) texts.push_back(lookup.chunk(cands[i].chunk_id).text);

  std::vector<double> scores;
  if (profile.kind == RerankerProfile::Kind::remote) {
    try {
      scores = detail::remote_scores(profile, query, texts);
    } catch (const Error& e) {
      throw RerankError(e, std::move(cands));
    }
  } else {
    for (const auto& t : texts) scores.push_back(score_pair(query, t));
  }
  for (std::size_t i = 0; i < n; ++i) cands[i].rerank = scores[i];
  std::stable_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(n),
                   [](const ScoredCandidate& a, const ScoredCandidate& b) {
                     if (*a.rerank != *b.rerank) return *a.rerank > *b.rerank;
                     if (a.fused != b.fused) return a.fused > b.fused;
                     return a.chunk_id < b.chunk_id;
                   });
  return cands;
}

}  // namespace hrag
