#pragma once

// Seeded synthetic corpora with known relevance judgments.
//
// make_table_benchmark: wide tables with unique single-token cells and
// "value of <header> for <key>" row lookups.
//
// make_enterprise_corpus: 200 short documents. Planted facts sit next to
// distractors that repeat the query wording but name a different
// organization, or carry an almost identical record code. Some small tables
// are mixed in.

#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hrag/eval.hpp"
#include "hrag/ingest.hpp"

namespace hrag {

struct SyntheticCorpus {
  std::vector<Document> docs;
  Qrels qrels;
  Gazetteer gazetteer;
  nlohmann::json gazetteer_json = nlohmann::json::object();
};

namespace detail {

/// Pronounceable lowercase words, never repeated within one generator.
class WordGen {
 public:
  explicit WordGen(std::uint64_t seed) : rng_(seed) {}

  std::string next(int min_syll = 2, int max_syll = 3) {
    static constexpr const char* kOnset = "bdfgklmnprstvz";
    static constexpr const char* kVowel = "aeiou";
    for (;;) {
      std::string w;
      const int n = min_syll + static_cast<int>(rng_() % static_cast<std::uint64_t>(max_syll - min_syll + 1));
      for (int i = 0; i < n; ++i) {
        w.push_back(kOnset[rng_() % 14]);
        w.push_back(kVowel[rng_() % 5]);
        if (rng_() % 3 == 0) w.push_back(kOnset[rng_() % 14]);
      }
      if (used_.insert(w).second) return w;
    }
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
  std::set<std::string> used_;
};

inline std::string csv_of(const std::vector<std::string>& headers, const std::vector<std::vector<std::string>>& rows) {
  std::string s = join(headers, ",") + "\n";
  for (const auto& r : rows) s += join(r, ",") + "\n";
  return s;
}

}  // namespace detail

inline SyntheticCorpus make_table_benchmark(std::uint64_t seed = 7, std::size_t tables = 20, std::size_t rows = 50,
                                            std::size_t cols = 5, std::size_t queries = 100) {
  if (cols < 2 || tables == 0 || rows == 0) throw Error(Errc::bad_input, "table benchmark needs >= 2 columns");
  detail::WordGen words(seed);
  SyntheticCorpus out;
  struct T {
    std::string doc_id;
    std::vector<std::string> headers;
    std::vector<std::vector<std::string>> rows;
  };
  std::vector<T> ts;
  for (std::size_t t = 0; t < tables; ++t) {
    T tb;
    char name[32];
    std::snprintf(name, sizeof name, "table_%02zu.csv", t);
    tb.doc_id = std::string("tables/") + name;
    for (std::size_t c = 0; c < cols; ++c) tb.headers.push_back(words.next(2, 2));
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<std::string> row;
      for (std::size_t c = 0; c < cols; ++c) row.push_back(words.next(2, 3));
      tb.rows.push_back(std::move(row));
    }
    out.docs.push_back(make_document(tb.doc_id, name, DocKind::table, detail::csv_of(tb.headers, tb.rows),
                                     {{"document_type", "table"}, {"department", "operations"}}));
    ts.push_back(std::move(tb));
  }
  auto& rng = words.rng();
  for (std::size_t q = 0; q < queries; ++q) {
    const auto& tb = ts[rng() % ts.size()];
    const auto r = rng() % tb.rows.size();
    const auto c = 1 + rng() % (cols - 1);
    char qid[32];
    std::snprintf(qid, sizeof qid, "tq%03zu", q);
    out.qrels.add(qid, "value of " + tb.headers[c] + " for " + tb.rows[r][0], tb.doc_id + "#rt0." + std::to_string(r));
  }
  return out;
}

inline SyntheticCorpus make_enterprise_corpus(std::uint64_t seed = 11, std::size_t total_docs = 200) {
  detail::WordGen words(seed);
  auto& rng = words.rng();
  SyntheticCorpus out;

  auto cap = [](std::string w) {
    w[0] = static_cast<char>(w[0] - 'a' + 'A');
    return w;
  };
  // Decoys name organizations that are never asked about.
  std::vector<std::string> orgs, decoys, cities;
  for (int i = 0; i < 24; ++i) orgs.push_back(cap(words.next(2, 3)) + (i % 3 == 0 ? " Labs" : ""));
  for (int i = 0; i < 12; ++i) decoys.push_back(cap(words.next(2, 3)));
  for (int i = 0; i < 8; ++i) cities.push_back(cap(words.next(2, 3)));
  auto all_orgs = orgs;
  all_orgs.insert(all_orgs.end(), decoys.begin(), decoys.end());
  out.gazetteer_json = {{"ORG", all_orgs}, {"LOCATION", cities}};
  out.gazetteer = Gazetteer::from_json(out.gazetteer_json);

  const std::vector<std::string> benefits{"annual leave", "sick leave",       "parental leave", "remote work",
                                          "training",     "relocation support", "wellness",      "study leave"};
  const std::vector<std::string> depts{"hr", "finance", "legal", "engineering", "operations"};
  std::size_t doc_no = 0, q_no = 0;
  auto text_doc = [&](const std::string& dir, std::string body, const std::string& dept) {
    char name[32];
    std::snprintf(name, sizeof name, "doc_%03zu.md", doc_no++);
    out.docs.push_back(make_document(dir + "/" + name, name, DocKind::text, std::move(body),
                                     {{"document_type", "policy"}, {"department", dept}}));
    return out.docs.back().doc_id + "#t0";
  };
  auto next_qid = [&] {
    char qid[32];
    std::snprintf(qid, sizeof qid, "q%03zu", q_no++);
    return std::string(qid);
  };
  auto filler = [&](std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + words.next(2, 3);
    return s;
  };

  // Organization-specific entitlements. The distractors repeat the question's
  // wording almost exactly but name another organization.
  for (int i = 0; i < 24; ++i) {
    const auto& org = orgs[static_cast<std::size_t>(i)];
    const auto& benefit = benefits[rng() % benefits.size()];
    const auto& city = cities[rng() % cities.size()];
    const auto days = 5 + rng() % 30;
    const auto dept = depts[rng() % depts.size()];
    const auto rel = text_doc("entitlements",
                              "Entitlement memo for " + org + " staff in " + city + ". Under the " + org +
                                  " agreement, staff are granted " + std::to_string(days) + " days of " + benefit +
                                  " per year. Requests go through the " + dept + " desk; reference " + filler(3) + ".",
                              dept);
    for (int d = 0; d < 2; ++d) {
      const auto& other = decoys[rng() % decoys.size()];
      text_doc("entitlements", "How many days of " + benefit + " do employees receive? Employees of " + other +
                                   " receive " + std::to_string(5 + rng() % 30) + " days of " + benefit +
                                   " each year, as agreed with " + other + ".",
               dept);
    }
    out.qrels.add(next_qid(), "How many days of " + benefit + " do " + org + " employees receive?", rel);
  }

  // Record retention by code; distractor codes differ in one or two digits.
  for (int i = 0; i < 24; ++i) {
    const auto code = "RX" + std::to_string(1000 + rng() % 9000);
    const auto years = 2 + rng() % 12;
    const auto dept = depts[rng() % depts.size()];
    const auto rel = text_doc("records", "What is the retention period for records under code " + code +
                                             "? Records under code " + code + " have a retention period of " +
                                             std::to_string(years) + " years.",
                              dept);
    for (int d = 0; d < 2; ++d) {
      auto near = code;
      near[2 + rng() % 4] = static_cast<char>('0' + rng() % 10);
      if (near == code) near[5] = near[5] == '9' ? '0' : static_cast<char>(near[5] + 1);
      text_doc("records", "What is the retention period for records under code " + near +
                              "? Records under code " + near + " have a retention period of " +
                              std::to_string(2 + rng() % 12) + " years.",
               dept);
    }
    out.qrels.add(next_qid(), "What is the retention period for records under code " + code + "?", rel);
  }

  // Small tables: one flattened chunk each, so both variants judge one chunk.
  for (int i = 0; i < 12; ++i) {
    const std::vector<std::string> headers{"employee", "grade", "office", "manager"};
    std::vector<std::vector<std::string>> rows;
    for (int r = 0; r < 8; ++r) rows.push_back({words.next(2, 3), "g" + std::to_string(1 + rng() % 9), words.next(2, 2), words.next(2, 3)});
    char name[32];
    std::snprintf(name, sizeof name, "roster_%02d.csv", i);
    const auto dept = depts[rng() % depts.size()];
    out.docs.push_back(make_document(std::string("rosters/") + name, name, DocKind::table, detail::csv_of(headers, rows),
                                     {{"document_type", "roster"}, {"department", dept}}));
    ++doc_no;
    const auto r = rng() % rows.size();
    out.qrels.add(next_qid(), "which office is employee " + rows[r][0] + " assigned to",
                  out.docs.back().doc_id + "#rt0." + std::to_string(r));
  }

  // Background documents.
  while (out.docs.size() < total_docs) {
    const auto dept = depts[rng() % depts.size()];
    text_doc("misc", "Notes from the " + dept + " team: " + filler(12) + ". Next review on " +
                         std::to_string(2020 + rng() % 5) + "-0" + std::to_string(1 + rng() % 9) + "-1" +
                         std::to_string(rng() % 10) + ".",
             dept);
  }
  return out;
}

/// Writes documents, qrels.tsv and gazetteer.json under `dir`.
inline void write_corpus(const SyntheticCorpus& c, const std::filesystem::path& dir) {
  for (const auto& d : c.docs) {
    const auto path = dir / "corpus" / d.doc_id;
    write_file_atomic(path, d.raw_content);
    nlohmann::json meta = nlohmann::json::object();
    for (const auto& [k, v] : d.metadata)
      if (k != "file_name") meta[k] = v;
    auto side = path;
    side += ".meta.json";
    write_file_atomic(side, meta.dump(2));
  }
  write_file_atomic(dir / "qrels.tsv", qrels_to_tsv(c.qrels));
  write_file_atomic(dir / "gazetteer.json", c.gazetteer_json.dump(2));
}

}  // namespace hrag
