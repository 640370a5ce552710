#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "hrag/hrag.hpp"
#include "test_util.hpp"

using namespace hrag;

namespace {

// Brute-force oracles written against plain vectors.
double oracle_p(const std::vector<std::string>& r, const std::vector<std::string>& rel, std::size_t k) {
  double hit = 0;
  for (std::size_t i = 0; i < k; ++i)
    if (i < r.size() && std::find(rel.begin(), rel.end(), r[i]) != rel.end()) hit += 1;
  return hit / static_cast<double>(k);
}
double oracle_r(const std::vector<std::string>& r, const std::vector<std::string>& rel, std::size_t k) {
  double hit = 0;
  for (const auto& x : rel) {
    const auto it = std::find(r.begin(), r.end(), x);
    if (it != r.end() && static_cast<std::size_t>(it - r.begin()) < k) hit += 1;
  }
  return hit / static_cast<double>(rel.size());
}
double oracle_rr(const std::vector<std::string>& r, const std::vector<std::string>& rel) {
  std::size_t best = 0;
  for (const auto& x : rel) {
    const auto it = std::find(r.begin(), r.end(), x);
    if (it != r.end() && (best == 0 || static_cast<std::size_t>(it - r.begin()) + 1 < best))
      best = static_cast<std::size_t>(it - r.begin()) + 1;
  }
  return best ? 1.0 / static_cast<double>(best) : 0.0;
}

}  // namespace

TEST(Metrics, WorkedExamples) {
  const std::vector<std::string> r{"a", "b", "c", "d", "e"};
  EXPECT_DOUBLE_EQ(precision_at_k(r, {"b", "e", "z"}, 5), 0.4);
  EXPECT_DOUBLE_EQ(recall_at_k(r, {"b", "e", "z"}, 5), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(reciprocal_rank(r, {"c", "e"}), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(reciprocal_rank(r, {"z"}), 0.0);
  // Short ranking keeps denominator k.
  EXPECT_DOUBLE_EQ(precision_at_k({"a"}, {"a"}, 5), 0.2);
  EXPECT_DOUBLE_EQ(precision_at_k({}, {"a"}, 5), 0.0);
  EXPECT_THROW(precision_at_k(r, {"a"}, 0), Error);
  EXPECT_THROW(recall_at_k(r, {}, 5), Error);
}

TEST(Metrics, Mrr) {
  Qrels q;
  q.add("q1", "x", "a");
  q.add("q2", "y", "z");
  EXPECT_DOUBLE_EQ(mrr({{"q1", {"b", "a"}}, {"q2", {"z"}}}, q), 0.75);
  EXPECT_DOUBLE_EQ(mrr({}, q), 0.0);
  EXPECT_THROW(mrr({{"q9", {"a"}}}, q), Error);
}

TEST(Metrics, AgreeWithBruteForce) {
  std::mt19937_64 rng(2024);
  for (int c = 0; c < 1000; ++c) {
    const std::size_t pool = 5 + rng() % 40;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < pool; ++i) ids.push_back("c" + std::to_string(i));
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<std::string> ranked(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(rng() % (pool + 1)));
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<std::string> rel(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(1 + rng() % 6));
    const RelevantSet rs(rel.begin(), rel.end());
    const std::size_t k = 1 + rng() % 10;
    ASSERT_EQ(precision_at_k(ranked, rs, k), oracle_p(ranked, rel, k));
    ASSERT_EQ(recall_at_k(ranked, rs, k), oracle_r(ranked, rel, k));
    ASSERT_EQ(reciprocal_rank(ranked, rs), oracle_rr(ranked, rel));
  }
}

TEST(Qrels, ParseAndRoundTrip) {
  const auto q = parse_qrels("# comment\nq1\twhat is x\ta#t0\nq1\twhat is x\tb#t0\r\n\nq2\tother\tc#t1\n");
  EXPECT_EQ(q.order, (std::vector<std::string>{"q1", "q2"}));
  EXPECT_EQ(q.at("q1"), (RelevantSet{"a#t0", "b#t0"}));
  EXPECT_EQ(q.text.at("q2"), "other");
  EXPECT_EQ(parse_qrels(qrels_to_tsv(q)).relevant, q.relevant);
}

TEST(Qrels, Malformed) {
  EXPECT_THROW(parse_qrels("q1\tonly two"), Error);
  EXPECT_THROW(parse_qrels("q1\ta\tb\tc"), Error);
  EXPECT_THROW(parse_qrels(""), Error);
  EXPECT_THROW(parse_qrels("q1\tx\ta\nq1\ty\tb"), Error);
}

TEST(Projection, RowToFlattenedTable) {
  const auto b = testutil::small_index();
  EXPECT_EQ(project_relevant({"hr/bands.csv#rt0.2"}, b.advanced, b.naive), (RelevantSet{"hr/bands.csv#f0"}));
  EXPECT_EQ(project_relevant({"policies/leave.md#t0"}, b.advanced, b.naive), (RelevantSet{"policies/leave.md#t0"}));
  EXPECT_EQ(project_relevant({"x"}, b.advanced, b.advanced), (RelevantSet{"x"}));
  EXPECT_TRUE(project_relevant({"missing"}, b.advanced, b.naive).empty());
}

TEST(Projection, TextSpansByOverlap) {
  // One long document: 2000-char chunks against 700-char chunks.
  std::vector<Document> docs{make_document("long.md", "long.md", DocKind::text, testutil::random_text(77, 5000))};
  const auto b = build_index(docs, IndexBuildConfig{});
  for (const auto& c : b.advanced.chunks) {
    const auto proj = project_relevant({c.chunk_id}, b.advanced, b.naive);
    ASSERT_FALSE(proj.empty()) << c.chunk_id;
    for (const auto& id : proj) {
      const auto& d = b.naive.chunk(id);
      const auto lo = std::max(c.span->start, d.span->start), hi = std::min(c.span->end, d.span->end);
      EXPECT_GE(2 * (hi - lo), std::min(c.span->size(), d.span->size())) << id;
    }
  }
}

TEST(Report, AggregatesAndShape) {
  const auto b = testutil::small_index();
  Qrels q;
  q.add("q1", "How many days of annual leave do Infosys employees receive?", "policies/leave.md#t0");
  q.add("q2", "Senior Engineer max salary", "hr/bands.csv#rt0.2");
  q.add("q3", "passwords rotate every 180 days", "policies/security.md#t0");
  const auto rep = evaluate_profiles(b, q, default_retrieval_profiles(), {},
                                     {Profile::direct_llm, Profile::naive, Profile::advanced});
  ASSERT_EQ(rep.runs.size(), 3u);
  const auto& d = rep.run(Profile::direct_llm);
  EXPECT_TRUE(d.no_retrieval);
  EXPECT_EQ(d.mrr, 0.0);
  for (const auto p : {Profile::naive, Profile::advanced}) {
    const auto& r = rep.run(p);
    double sum = 0;
    for (const auto& x : r.queries) sum += x.rr;
    EXPECT_NEAR(r.mrr, sum / 3.0, 1e-12);
  }
  EXPECT_EQ(rep.run(Profile::advanced).mrr, 1.0);
  EXPECT_EQ(rep.run(Profile::naive).queries[1].relevant, (RelevantSet{"hr/bands.csv#f0"}));
  const auto j = rep.to_json();
  EXPECT_EQ(j["k"], 5);
  EXPECT_TRUE(j["profiles"][0]["faithfulness"].is_null());
  EXPECT_EQ(j["profiles"][0]["no_retrieval"], true);
  const auto t = rep.table();
  EXPECT_NE(t.find("P@5"), std::string::npos);
  EXPECT_NE(t.find("advanced"), std::string::npos);
  EXPECT_NE(t.find("manual"), std::string::npos);
}

TEST(Report, UnknownQrelsChunk) {
  const auto b = testutil::small_index();
  Qrels q;
  q.add("q1", "x", "ghost#t0");
  EXPECT_THROW(evaluate_profiles(b, q, default_retrieval_profiles(), {}, {Profile::advanced}), Error);
  EXPECT_THROW(evaluate_profiles(b, q, default_retrieval_profiles(), {}, {}), Error);
}

TEST(Synthetic, DeterministicAndConsistent) {
  const auto a = make_enterprise_corpus();
  const auto b = make_enterprise_corpus();
  ASSERT_EQ(a.docs.size(), 200u);
  EXPECT_EQ(qrels_to_tsv(a.qrels), qrels_to_tsv(b.qrels));
  EXPECT_EQ(a.docs[17].raw_content, b.docs[17].raw_content);
  EXPECT_EQ(a.qrels.order.size(), 60u);
  const auto t = make_table_benchmark();
  EXPECT_EQ(t.docs.size(), 20u);
  EXPECT_EQ(t.qrels.order.size(), 100u);
  // Every judged chunk exists once indexed.
  IndexBuildConfig cfg;
  cfg.gazetteer = a.gazetteer;
  const auto idx = build_index(a.docs, cfg);
  for (const auto& qid : a.qrels.order)
    for (const auto& id : a.qrels.at(qid)) EXPECT_NE(idx.advanced.find(id), nullptr) << id;
}

TEST(Synthetic, WriteAndReload) {
  testutil::TempDir tmp;
  const auto c = make_enterprise_corpus(11, 120);
  write_corpus(c, tmp.path());
  const auto docs = load_corpus(tmp.path() / "corpus");
  EXPECT_EQ(docs.size(), c.docs.size());
  EXPECT_EQ(load_qrels(tmp.path() / "qrels.tsv").relevant, c.qrels.relevant);
  EXPECT_TRUE(Gazetteer::load(tmp.path() / "gazetteer.json").to_json() == c.gazetteer.to_json());
}
