#include <gtest/gtest.h>

#include <random>
#include <set>

#include "hrag/embed.hpp"
#include "test_server.hpp"
#include "test_util.hpp"

using namespace hrag;

TEST(LocalEmbed, EmptyTextIsFirstBasisVector) {
  EXPECT_EQ(local_embed("", 8), (EmbeddingVector{1, 0, 0, 0, 0, 0, 0, 0}));
  EXPECT_EQ(local_embed("  \n\t ", 8), (EmbeddingVector{1, 0, 0, 0, 0, 0, 0, 0}));
  EXPECT_EQ(local_embed("--!!", 8), (EmbeddingVector{1, 0, 0, 0, 0, 0, 0, 0}));
}

TEST(LocalEmbed, MatchesIndependentReference) {
  // Values from an independent Python implementation of the same hashing rule.
  const auto v = local_embed("hello", 8);
  const std::vector<double> expect{-0.4082482904638631, 0, 0, -0.4082482904638631, 0, 0, 0.8164965809277261, 0};
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(v[i], expect[i], 1e-6);

  const auto w = local_embed("Annual leave policy", 16);
  const std::vector<double> expect16{0.2886751345948129, 0, 0, 0, 0.5773502691896258, 0, 0, 0.2886751345948129,
                                     0, 0, -0.2886751345948129, 0, 0, 0.5773502691896258, 0, -0.2886751345948129};
  for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(w[i], expect16[i], 1e-6);
  EXPECT_EQ(fnv1a64("hello"), 0xa430d84680aabd0bULL);
}

TEST(LocalEmbed, ScalarMultiplesCancel) { EXPECT_EQ(local_embed("salary salary", 8), local_embed("salary", 8)); }

TEST(LocalEmbed, OrderInvariant) {
  const auto a = local_embed("annual leave policy", 1024);
  const auto b = local_embed("leave policy annual", 1024);
  EXPECT_NEAR(dot(a, b), 1.0, 1e-6);
}

TEST(LocalEmbed, RejectsTinyDims) { EXPECT_THROW(local_embed("x", 4), Error); }

TEST(LocalEmbed, UnitNormProperty) {
  for (std::uint32_t seed = 0; seed < 200; ++seed) {
    const auto text = testutil::random_text(seed, seed % 400);
    for (std::size_t dims : {8u, 64u, 384u, 1024u}) {
      const auto v = local_embed(text, dims);
      ASSERT_EQ(v.size(), dims);
      ASSERT_NEAR(l2_norm(v), 1.0, 1e-6) << "seed " << seed;
    }
  }
}

namespace {

std::vector<std::string> features(const std::string& tok) {
  std::vector<std::string> f{tok};
  for (std::size_t i = 0; i + 3 <= tok.size(); ++i) f.push_back(tok.substr(i, 3));
  return f;
}

}  // namespace

TEST(LocalEmbed, SharedTokenNeverLowersSimilarity) {
  // Vocabularies are drawn so that no two distinct features share a bucket.
  constexpr std::size_t dims = 1024;
  std::mt19937 rng(11);
  int trials = 0;
  while (trials < 100) {
    auto word = [&] {
      std::string w;
      const std::size_t n = 3 + rng() % 6;
      for (std::size_t i = 0; i < n; ++i) w.push_back(static_cast<char>('a' + rng() % 26));
      return w;
    };
    std::vector<std::string> a_toks, b_toks;
    for (int i = 0; i < 3; ++i) a_toks.push_back(word());
    for (int i = 0; i < 3; ++i) b_toks.push_back(word());
    std::set<std::string> feats;
    std::set<std::size_t> buckets;
    bool clash = false;
    for (const auto& t : a_toks)
      for (const auto& f : features(t)) feats.insert(f);
    for (const auto& t : b_toks)
      for (const auto& f : features(t)) feats.insert(f);
    for (const auto& f : feats) clash |= !buckets.insert(fnv1a64(f) % dims).second;
    std::set<std::string> a_feats, b_feats;
    for (const auto& t : a_toks)
      for (const auto& f : features(t)) a_feats.insert(f);
    for (const auto& t : b_toks)
      for (const auto& f : features(t)) b_feats.insert(f);
    for (const auto& f : a_feats) clash |= b_feats.contains(f);
    if (clash) continue;
    ++trials;
    const std::string a = a_toks[0] + " " + a_toks[1] + " " + a_toks[2];
    const std::string b = b_toks[0] + " " + b_toks[1] + " " + b_toks[2];
    const double before = dot(local_embed(a, dims), local_embed(b, dims));
    const double after = dot(local_embed(a, dims), local_embed(b + " " + a_toks[0], dims));
    EXPECT_GE(after, before - 1e-12);
    EXPECT_GT(after, 0.0);
  }
}

TEST(EmbedTexts, LocalIsDeterministicAndOrdered) {
  const EmbedderProfile p{"local_test", 8, {}, {}, {}};
  const auto one = embed_texts({"hello"}, p);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0], embed_texts({"hello"}, p)[0]);
  const auto two = embed_texts({"a", "a"}, p);
  EXPECT_EQ(two[0], two[1]);
  const auto mixed = embed_texts({"x", "hello"}, p);
  EXPECT_EQ(mixed[1], one[0]);
  EXPECT_THROW(embed_texts({}, p), Error);
}

TEST(EmbedTexts, DeadRemoteEndpoint) {
  const EmbedderProfile p{"remote", 8, testutil::kDeadEndpoint, "m", {}};
  try {
    embed_texts({"hello"}, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::upstream_unavailable);
    EXPECT_NE(std::string(e.what()).find("unreachable"), std::string::npos);
  }
}

TEST(EmbedTexts, RemoteWireFormat) {
  testutil::LocalServer srv;
  nlohmann::json seen;
  srv.server().Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    nlohmann::json data = nlohmann::json::array();
    for (std::size_t i = 0; i < seen["input"].size(); ++i) data.push_back({{"embedding", {3.0, 4.0, 0, 0, 0, 0, 0, 0}}});
    res.set_content(nlohmann::json{{"data", data}}.dump(), "application/json");
  });
  srv.server().Post("/short", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"data":[{"embedding":[1,2,3]}]})", "application/json");
  });
  srv.server().Post("/fail", [&](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  srv.start();

  const EmbedderProfile p{"remote", 8, srv.url("/v1/embeddings"), "all-mpnet-base-v2", {}};
  const auto out = embed_texts({"a", "b"}, p);
  EXPECT_EQ(seen["model"], "all-mpnet-base-v2");
  EXPECT_EQ(seen["input"], nlohmann::json::array({"a", "b"}));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_NEAR(out[0][0], 0.6, 1e-6);
  EXPECT_NEAR(out[0][1], 0.8, 1e-6);

  try {
    embed_texts({"a"}, {"remote", 8, srv.url("/short"), "m", {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::dimension_mismatch);
  }
  try {
    embed_texts({"a"}, {"remote", 8, srv.url("/fail"), "m", {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::upstream_unavailable);
  }
}

TEST(EmbedderProfiles, Defaults) {
  const auto profiles = default_embedder_profiles();
  EXPECT_EQ(profiles.at("high_precision").dims, 768u);
  EXPECT_EQ(*profiles.at("high_precision").model_id, "all-mpnet-base-v2");
  EXPECT_EQ(profiles.at("lightweight").dims, 384u);
  EXPECT_EQ(*profiles.at("lightweight").model_id, "paraphrase-MiniLM-L3-v2");
  EXPECT_FALSE(profiles.at("local_test").remote());
  EXPECT_EQ(profiles.at("local_test").dims, 1024u);
  const auto round = embedder_profile_from_json("high_precision", to_json(profiles.at("high_precision")));
  EXPECT_EQ(round.endpoint, profiles.at("high_precision").endpoint);
}
