#pragma once

// Retrieval metrics (P@k, R@k, MRR) and the profile comparison report.

#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "hrag/error.hpp"
#include "hrag/index_store.hpp"
#include "hrag/rerank.hpp"
#include "hrag/retrieve.hpp"

namespace hrag {

using RelevantSet = std::set<std::string>;

/// |top-k ∩ relevant| / k; a short ranking keeps the denominator k.
inline double precision_at_k(const std::vector<std::string>& ranked, const RelevantSet& relevant, std::size_t k) {
  if (k == 0) throw Error(Errc::bad_input, "k must be >= 1");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) hits += relevant.contains(ranked[i]);
  return static_cast<double>(hits) / static_cast<double>(k);
}

inline double recall_at_k(const std::vector<std::string>& ranked, const RelevantSet& relevant, std::size_t k) {
  if (k == 0) throw Error(Errc::bad_input, "k must be >= 1");
  if (relevant.empty()) throw Error(Errc::bad_input, "recall is undefined for an empty relevant set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) hits += relevant.contains(ranked[i]);
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

/// 1 / rank of the first relevant item, 0 when none is retrieved.
inline double reciprocal_rank(const std::vector<std::string>& ranked, const RelevantSet& relevant) {
  for (std::size_t i = 0; i < ranked.size(); ++i)
    if (relevant.contains(ranked[i])) return 1.0 / static_cast<double>(i + 1);
  return 0.0;
}

struct Qrels {
  std::map<std::string, RelevantSet> relevant;
  std::map<std::string, std::string> text;
  std::vector<std::string> order;  // query ids in first-seen order

  const RelevantSet& at(const std::string& qid) const {
    auto it = relevant.find(qid);
    if (it == relevant.end()) throw Error(Errc::not_found, "query missing from qrels: " + qid);
    return it->second;
  }

  void add(const std::string& qid, const std::string& query, const std::string& chunk_id) {
    auto [it, fresh] = text.emplace(qid, query);
    if (fresh) order.push_back(qid);
    else if (it->second != query) throw Error(Errc::bad_input, "query " + qid + " has two different texts");
    relevant[qid].insert(chunk_id);
  }
};

inline double mrr(const std::vector<std::pair<std::string, std::vector<std::string>>>& runs, const Qrels& qrels) {
  if (runs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [qid, ranked] : runs) total += reciprocal_rank(ranked, qrels.at(qid));
  return total / static_cast<double>(runs.size());
}

/// TSV lines `query_id<TAB>query_text<TAB>relevant_chunk_id`. Blank lines and
/// lines starting with '#' are skipped.
inline Qrels parse_qrels(std::string_view tsv) {
  Qrels q;
  std::istringstream in{std::string(tsv)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line) || line[0] == '#') continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (std::size_t tab; (tab = line.find('\t', start)) != std::string::npos; start = tab + 1) f.push_back(line.substr(start, tab - start));
    f.push_back(line.substr(start));
    if (f.size() != 3 || trim(f[0]).empty() || trim(f[2]).empty())
      throw Error(Errc::bad_input, "qrels line " + std::to_string(n) + ": expected query_id<TAB>query_text<TAB>chunk_id");
    q.add(std::string(trim(f[0])), f[1], std::string(trim(f[2])));
  }
  if (q.order.empty()) throw Error(Errc::bad_input, "qrels file has no judgments");
  return q;
}

inline Qrels load_qrels(const std::filesystem::path& p) { return parse_qrels(read_file(p)); }

inline std::string qrels_to_tsv(const Qrels& q) {
  std::string s;
  for (const auto& qid : q.order)
    for (const auto& id : q.relevant.at(qid)) s += qid + "\t" + q.text.at(qid) + "\t" + id + "\n";
  return s;
}

// ------------------------------------------------------------------ projection

namespace detail {

inline std::string row_line_from_text(const std::string& row_text) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto bar = row_text.find(" | ", start);
    const auto pair = row_text.substr(start, bar == std::string::npos ? std::string::npos : bar - start);
    const auto colon = pair.find(": ");
    cells.push_back(colon == std::string::npos ? pair : pair.substr(colon + 2));
    if (bar == std::string::npos) break;
    start = bar + 3;
  }
  return flatten_row(cells);
}

}  // namespace detail

/// Qrels name chunks of the advanced (row-level) variant. For another variant
/// a chunk is relevant when it has the same id, or is a flattened-table chunk
/// holding the relevant row's line, or is a text chunk of the same document
/// overlapping the relevant span by at least half of the shorter one.
inline RelevantSet project_relevant(const RelevantSet& rel, const IndexVariant& src, const IndexVariant& dst) {
  if (&src == &dst) return rel;
  RelevantSet out;
  for (const auto& id : rel) {
    if (dst.find(id)) out.insert(id);
    const auto* c = src.find(id);
    if (!c) continue;
    for (const auto& d : dst.chunks) {
      if (d.doc_id != c->doc_id || d.chunk_id == id) continue;
      if (c->kind == ChunkKind::table_row && d.kind == ChunkKind::full_table) {
        const auto line = detail::row_line_from_text(c->text);
        std::istringstream in(d.text);
        for (std::string l; std::getline(in, l);)
          if (l == line) {
            out.insert(d.chunk_id);
            break;
          }
      } else if (c->kind == ChunkKind::text_chunk && d.kind == ChunkKind::text_chunk && c->span && d.span) {
        const auto lo = std::max(c->span->start, d.span->start), hi = std::min(c->span->end, d.span->end);
        const auto shorter = std::min(c->span->size(), d.span->size());
        if (hi > lo && 2 * (hi - lo) >= shorter) out.insert(d.chunk_id);
      }
    }
  }
  return out;
}

// ------------------------------------------------------------------ report

struct QueryResult {
  std::string query_id;
  std::string query;
  std::vector<std::string> ranked;
  RelevantSet relevant;
  double precision = 0, recall = 0, rr = 0;
};

struct ProfileRun {
  Profile profile = Profile::advanced;
  bool no_retrieval = false;
  std::vector<QueryResult> queries;
  double precision = 0, recall = 0, mrr = 0;
};

struct EvalReport {
  std::size_t k = 5;
  std::vector<ProfileRun> runs;

  const ProfileRun& run(Profile p) const {
    for (const auto& r : runs)
      if (r.profile == p) return r;
    throw Error(Errc::not_found, "profile not in report: " + std::string(to_string(p)));
  }

  nlohmann::json to_json() const {
    auto profiles = nlohmann::json::array();
    for (const auto& r : runs) {
      auto qs = nlohmann::json::array();
      for (const auto& q : r.queries)
        qs.push_back({{"query_id", q.query_id},
                      {"query", q.query},
                      {"ranked", q.ranked},
                      {"relevant", q.relevant},
                      {"precision", q.precision},
                      {"recall", q.recall},
                      {"reciprocal_rank", q.rr}});
      profiles.push_back({{"profile", to_string(r.profile)},
                          {"no_retrieval", r.no_retrieval},
                          {"precision_at_k", r.precision},
                          {"recall_at_k", r.recall},
                          {"mrr", r.mrr},
                          {"faithfulness", nullptr},
                          {"completeness", nullptr},
                          {"relevance", nullptr},
                          {"queries", std::move(qs)}});
    }
    return {{"k", k}, {"profiles", std::move(profiles)}};
  }

  /// Metrics as rows, profiles as columns.
  std::string table() const {
    std::string s;
    char buf[64];
    auto row = [&](const std::string& name, auto get) {
      std::snprintf(buf, sizeof buf, "%-14s", name.c_str());
      s += buf;
      for (const auto& r : runs) {
        std::snprintf(buf, sizeof buf, " %12s", get(r).c_str());
        s += buf;
      }
      s += "\n";
    };
    auto num = [](double v) {
      char b[32];
      std::snprintf(b, sizeof b, "%.4f", v);
      return std::string(b);
    };
    row("metric", [](const ProfileRun& r) { return std::string(to_string(r.profile)); });
    const auto ks = std::to_string(k);
    row("P@" + ks, [&](const ProfileRun& r) { return num(r.precision); });
    row("R@" + ks, [&](const ProfileRun& r) { return num(r.recall); });
    row("MRR", [&](const ProfileRun& r) { return num(r.mrr); });
    for (const auto* m : {"Faithfulness", "Completeness", "Relevance"})
      row(m, [](const ProfileRun&) { return std::string("manual"); });
    bool any = false;
    for (const auto& r : runs) any |= r.no_retrieval;
    if (any) s += "direct_llm performs no retrieval; its retrieval metrics are reported as 0.\n";
    return s;
  }
};

/// Runs retrieval (and reranking for the advanced profile) for every query
/// and scores the ranked pool. A reranker failure aborts the run.
inline EvalReport evaluate_profiles(const IndexBundle& index, const Qrels& qrels,
                                    const std::map<Profile, RetrievalConfig>& configs, const RerankerProfile& reranker,
                                    const std::vector<Profile>& profiles, std::size_t k = 5) {
  if (profiles.empty()) throw Error(Errc::bad_input, "no profiles to evaluate");
  for (const auto& qid : qrels.order)
    for (const auto& id : qrels.at(qid))
      if (!index.advanced.find(id)) throw Error(Errc::bad_input, "qrels reference unknown chunk " + id + " (query " + qid + ")");
  EvalReport rep;
  rep.k = k;
  for (const auto p : profiles) {
    ProfileRun run;
    run.profile = p;
    run.no_retrieval = p == Profile::direct_llm;
    auto it = configs.find(p);
    if (it == configs.end()) throw Error(Errc::bad_input, "profile not configured: " + std::string(to_string(p)));
    const auto& variant = variant_for(index, p);
    for (const auto& qid : qrels.order) {
      QueryResult q;
      q.query_id = qid;
      q.query = qrels.text.at(qid);
      q.relevant = project_relevant(qrels.at(qid), index.advanced, variant);
      if (!run.no_retrieval) {
        auto cands = retrieve(q.query, it->second, index);
        if (p == Profile::advanced) cands = rerank_candidates(q.query, std::move(cands), reranker, variant);
        for (const auto& c : cands) q.ranked.push_back(c.chunk_id);
        q.precision = precision_at_k(q.ranked, q.relevant, k);
        q.recall = q.relevant.empty() ? 0.0 : recall_at_k(q.ranked, q.relevant, k);
        q.rr = reciprocal_rank(q.ranked, q.relevant);
      }
      run.precision += q.precision;
      run.recall += q.recall;
      run.mrr += q.rr;
      run.queries.push_back(std::move(q));
    }
    const auto n = static_cast<double>(run.queries.size());
    run.precision /= n;
    run.recall /= n;
    run.mrr /= n;
    rep.runs.push_back(std::move(run));
  }
  return rep;
}

}  // namespace hrag
