#include <gtest/gtest.h>

#include "hrag/hrag.hpp"
#include "test_util.hpp"

using namespace hrag;

TEST(Config, Defaults) {
  const auto c = EngineConfig::defaults();
  EXPECT_EQ(c.build.chunking.chunk_size, 2000u);
  EXPECT_EQ(c.build.chunking.overlap, 500u);
  EXPECT_EQ(c.build.naive_chunking.chunk_size, 700u);
  EXPECT_EQ(c.build.dense.M, 32u);
  EXPECT_EQ(c.build.dense.ef_construction, 200u);
  EXPECT_EQ(c.build.dense.ef_search, 50u);
  EXPECT_DOUBLE_EQ(c.profiles.at(Profile::advanced).w_dense, 0.6);
  EXPECT_DOUBLE_EQ(c.profiles.at(Profile::advanced).w_sparse, 0.4);
  EXPECT_TRUE(c.profiles.at(Profile::advanced).filter->require_entity_overlap);
  EXPECT_EQ(c.reranker.top_n, 20u);
  EXPECT_EQ(c.llm.mode, LlmClient::Mode::mock);
  // Bundled data files.
  EXPECT_FALSE(find_entities("NASSCOM in Hyderabad", c.build.gazetteer).empty());
  ASSERT_NE(c.lexicon.synonyms("vacation"), nullptr);
}

TEST(Config, ShippedFileLoads) {
  const auto c = EngineConfig::load(EngineConfig::data_dir() / "engine.json");
  EXPECT_EQ(c.addr, "127.0.0.1:8080");
  EXPECT_EQ(c.profiles.at(Profile::naive).w_dense, 1.0);
  EXPECT_NE(c.lexicon.synonyms("salary"), nullptr);
}

TEST(Config, Overrides) {
  testutil::TempDir tmp;
  testutil::write(tmp.path() / "g.json", R"({"ORG": ["Zeta"]})");
  testutil::write(tmp.path() / "c.json", R"({
    "chunking": {"chunk_size": 800, "overlap": 200},
    "dense": {"M": 16, "quantized": true},
    "sparse": {"k1": 1.5},
    "profiles": {"advanced": {"w_dense": 0.5, "w_sparse": 0.5, "filter": null, "final_k": 3},
                 "naive": {"w_dense": 0.2, "w_sparse": 0.8}},
    "reranker": {"kind": "remote", "endpoint": "http://127.0.0.1:9/rerank", "top_n": 10},
    "llm": {"mode": "remote", "endpoint": "http://127.0.0.1:9/chat", "model_id": "m"},
    "gazetteer": "g.json",
    "lexicon": {"pay": ["salary"]},
    "service": {"addr": "0.0.0.0:9000"}
  })");
  const auto c = EngineConfig::load(tmp.path() / "c.json");
  EXPECT_EQ(c.build.chunking.chunk_size, 800u);
  EXPECT_EQ(c.build.dense.M, 16u);
  EXPECT_TRUE(c.build.dense.quantized);
  EXPECT_DOUBLE_EQ(c.build.sparse.k1, 1.5);
  const auto& adv = c.profiles.at(Profile::advanced);
  EXPECT_DOUBLE_EQ(adv.w_dense, 0.5);
  EXPECT_FALSE(adv.filter.has_value());
  EXPECT_EQ(adv.final_k, 3u);
  // Naive stays dense-only whatever the file says.
  EXPECT_DOUBLE_EQ(c.profiles.at(Profile::naive).w_dense, 1.0);
  EXPECT_EQ(c.reranker.kind, RerankerProfile::Kind::remote);
  EXPECT_EQ(c.reranker.top_n, 10u);
  EXPECT_EQ(c.llm.model_id, "m");
  EXPECT_EQ(find_entities("zeta", c.build.gazetteer).size(), 1u);
  EXPECT_EQ(c.lexicon.synonyms("pay")->front(), "salary");
  EXPECT_EQ(c.addr, "0.0.0.0:9000");
}

TEST(Config, Rejects) {
  auto bad = [](const char* text) {
    try {
      EngineConfig::from_json(nlohmann::json::parse(text));
    } catch (const Error& e) {
      return e.code() == Errc::bad_input;
    }
    return false;
  };
  EXPECT_TRUE(bad(R"([1])"));
  EXPECT_TRUE(bad(R"({"chunking": {"chunk_size": 100, "overlap": 100}})"));
  EXPECT_TRUE(bad(R"({"profiles": {"advanced": {"w_dense": 0.9}}})"));
  EXPECT_TRUE(bad(R"({"profiles": {"hybrid": {}}})"));
  EXPECT_TRUE(bad(R"({"reranker": {"kind": "remote"}})"));
  EXPECT_TRUE(bad(R"({"reranker": {"kind": "gpu"}})"));
  EXPECT_TRUE(bad(R"({"llm": {"mode": "remote"}})"));
  EXPECT_TRUE(bad(R"({"index": {"embedders": ["nope"]}})"));
  EXPECT_TRUE(bad(R"({"dense": {"M": "x"}})"));
  testutil::TempDir tmp;
  testutil::write(tmp.path() / "c.json", "{oops");
  EXPECT_THROW(EngineConfig::load(tmp.path() / "c.json"), Error);
}
