#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "hrag/error.hpp"
#include "hrag/hnsw.hpp"
#include "hrag/ingest.hpp"
#include "hrag/text.hpp"

namespace hrag {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

/// Okapi BM25 over an in-memory inverted index. Documents are numbered in
/// ascending chunk_id order, so every postings list is sorted by chunk_id.
class SparseIndex {
 public:
  static constexpr int kFormatVersion = 1;

  struct Posting {
    std::uint32_t doc;
    std::uint32_t tf;
  };

  SparseIndex() = default;

  static SparseIndex build(const std::vector<Chunk>& chunks, Bm25Params params = {}) {
    std::vector<const Chunk*> sorted;
    sorted.reserve(chunks.size());
    for (const auto& c : chunks) sorted.push_back(&c);
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->chunk_id < b->chunk_id; });
    for (std::size_t i = 1; i < sorted.size(); ++i)
      if (sorted[i]->chunk_id == sorted[i - 1]->chunk_id)
        throw Error(Errc::duplicate, "duplicate chunk_id: " + sorted[i]->chunk_id);

    SparseIndex idx;
    idx.params_ = params;
    for (const auto* c : sorted) {
      const auto doc = static_cast<std::uint32_t>(idx.ids_.size());
      idx.ids_.push_back(c->chunk_id);
      idx.id_to_doc_.emplace(c->chunk_id, doc);
      const auto tokens = tokenize(c->text);
      idx.lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
      std::unordered_map<std::string, std::uint32_t> tf;
      for (const auto& t : tokens) ++tf[t];
      for (auto& [term, n] : tf) idx.postings_[term].push_back({doc, n});
    }
    idx.finish();
    return idx;
  }

  std::size_t size() const { return ids_.size(); }
  double avg_doc_length() const { return avg_len_; }
  const Bm25Params& params() const { return params_; }
  const std::string& tag() const { return tag_; }
  void set_tag(std::string t) { tag_ = std::move(t); }

  std::size_t doc_freq(const std::string& term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? 0 : it->second.size();
  }

  const std::vector<Posting>* postings(const std::string& term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? nullptr : &it->second;
  }

  std::uint32_t doc_length(const std::string& chunk_id) const { return lengths_.at(doc_of(chunk_id)); }

  /// ln((N - df + 0.5) / (df + 0.5) + 1); never negative.
  double idf(std::size_t df) const {
    const double n = static_cast<double>(size());
    return std::log((n - static_cast<double>(df) + 0.5) / (static_cast<double>(df) + 0.5) + 1.0);
  }

  double term_weight(std::size_t df, std::uint32_t tf, std::uint32_t len) const {
    if (tf == 0) return 0.0;
    const double norm = avg_len_ > 0.0 ? static_cast<double>(len) / avg_len_ : 0.0;
    const double denom = tf + params_.k1 * (1.0 - params_.b + params_.b * norm);
    return idf(df) * (tf * (params_.k1 + 1.0)) / denom;
  }

  /// Repeated query terms count once per occurrence.
  double bm25_score(const std::vector<std::string>& query_tokens, const std::string& chunk_id) const {
    const auto doc = doc_of(chunk_id);
    double score = 0.0;
    for (const auto& t : query_tokens) {
      const auto* plist = postings(t);
      if (!plist) continue;
      auto it = std::lower_bound(plist->begin(), plist->end(), doc,
                                 [](const Posting& p, std::uint32_t d) { return p.doc < d; });
      if (it == plist->end() || it->doc != doc) continue;
      score += term_weight(plist->size(), it->tf, lengths_[doc]);
    }
    return score;
  }

  /// Term-at-a-time accumulation over the query's postings. Zero scores are
  /// dropped; ties by ascending chunk_id.
  std::vector<SearchHit> search(std::string_view query, std::size_t k) const {
    if (k == 0) throw Error(Errc::bad_input, "k must be >= 1");
    std::unordered_map<std::uint32_t, double> acc;
    for (const auto& t : tokenize(query)) {
      const auto* plist = postings(t);
      if (!plist) continue;
      for (const auto& p : *plist) acc[p.doc] += term_weight(plist->size(), p.tf, lengths_[p.doc]);
    }
    std::vector<SearchHit> hits;
    hits.reserve(acc.size());
    for (const auto& [doc, s] : acc)
      if (s > 0.0) hits.push_back({ids_[doc], s});
    const auto kk = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(kk), hits.end(), hit_before);
    hits.resize(kk);
    return hits;
  }

  bool contains(const std::string& chunk_id) const { return id_to_doc_.contains(chunk_id); }
  const std::vector<std::string>& chunk_ids() const { return ids_; }

  nlohmann::json to_json() const {
    nlohmann::json post = nlohmann::json::object();
    std::vector<std::string> terms;
    terms.reserve(postings_.size());
    for (const auto& [t, _] : postings_) terms.push_back(t);
    std::sort(terms.begin(), terms.end());
    for (const auto& t : terms) {
      auto arr = nlohmann::json::array();
      for (const auto& p : postings_.at(t)) arr.push_back({p.doc, p.tf});
      post[t] = std::move(arr);
    }
    return {{"format", "bm25"}, {"version", kFormatVersion}, {"tag", tag_},          {"k1", params_.k1},
            {"b", params_.b},   {"chunk_ids", ids_},         {"doc_lengths", lengths_}, {"postings", std::move(post)}};
  }

  static SparseIndex from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("format", "") != "bm25") throw Error(Errc::corrupt, "sparse index: not a bm25 file");
    if (j.value("version", -1) != kFormatVersion)
      throw Error(Errc::version_mismatch, "sparse index format version " + j.value("version", nlohmann::json()).dump() +
                                              " unsupported");
    SparseIndex idx;
    try {
      idx.tag_ = j.at("tag").get<std::string>();
      idx.params_ = {j.at("k1").get<double>(), j.at("b").get<double>()};
      idx.ids_ = j.at("chunk_ids").get<std::vector<std::string>>();
      idx.lengths_ = j.at("doc_lengths").get<std::vector<std::uint32_t>>();
      for (const auto& [term, arr] : j.at("postings").items()) {
        auto& plist = idx.postings_[term];
        for (const auto& p : arr) plist.push_back({p.at(0).get<std::uint32_t>(), p.at(1).get<std::uint32_t>()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::corrupt, std::string("sparse index: ") + e.what());
    }
    if (idx.lengths_.size() != idx.ids_.size()) throw Error(Errc::corrupt, "sparse index: length table mismatch");
    for (std::size_t i = 0; i < idx.ids_.size(); ++i) idx.id_to_doc_.emplace(idx.ids_[i], static_cast<std::uint32_t>(i));
    for (const auto& [_, plist] : idx.postings_)
      for (const auto& p : plist)
        if (p.doc >= idx.ids_.size()) throw Error(Errc::corrupt, "sparse index: posting out of range");
    idx.finish();
    return idx;
  }

  void persist(const std::filesystem::path& path) const { write_file_atomic(path, to_json().dump()); }

  static SparseIndex restore(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::corrupt, std::string("sparse index: ") + e.what());
    }
    return from_json(j);
  }

 private:
  std::uint32_t doc_of(const std::string& chunk_id) const {
    auto it = id_to_doc_.find(chunk_id);
    if (it == id_to_doc_.end()) throw Error(Errc::not_found, "unknown chunk_id: " + chunk_id);
    return it->second;
  }

  void finish() {
    double total = 0.0;
    for (auto l : lengths_) total += l;
    avg_len_ = lengths_.empty() ? 0.0 : total / static_cast<double>(lengths_.size());
  }

  Bm25Params params_;
  std::string tag_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::uint32_t> id_to_doc_;
  std::vector<std::uint32_t> lengths_;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  double avg_len_ = 0.0;
};

}  // namespace hrag
