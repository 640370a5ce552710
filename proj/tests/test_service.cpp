#include <gtest/gtest.h>

#include <future>

#include "fixtures.hpp"
#include "hrag/hrag.hpp"
#include "test_server.hpp"
#include "test_util.hpp"

using namespace hrag;

namespace {

nlohmann::json documents_body() {
  auto docs = nlohmann::json::array();
  for (const auto& d : testutil::small_corpus()) {
    nlohmann::json meta = nlohmann::json::object();
    for (const auto& [k, v] : d.metadata)
      if (k != "file_name") meta[k] = v;
    docs.push_back({{"doc_id", d.doc_id},
                    {"file_name", d.metadata.at("file_name")},
                    {"kind", to_string(d.kind)},
                    {"content", d.raw_content},
                    {"metadata", meta}});
  }
  return {{"documents", docs}};
}

EngineConfig test_config() {
  auto c = EngineConfig::defaults();
  c.build.gazetteer = testutil::small_gazetteer();
  return c;
}

struct Fixture {
  testutil::TempDir tmp;
  Service svc{test_config(), tmp.path() / "index", tmp.path() / "state"};
};

}  // namespace

TEST(Service, QueryBeforeIngestIs404) {
  Fixture f;
  const auto r = f.svc.query({{"session_id", "s"}, {"query", "annual leave"}});
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(r.body["error"]["code"], "not_found");
  // direct_llm needs no index.
  EXPECT_EQ(f.svc.query({{"session_id", "s"}, {"query", "hi"}, {"profile", "direct_llm"}}).status, 200);
}

TEST(Service, IngestThenQuery) {
  Fixture f;
  const auto ing = f.svc.ingest(documents_body());
  ASSERT_EQ(ing.status, 200) << ing.body.dump();
  EXPECT_EQ(ing.body["chunk_count"], 14);
  const auto r = f.svc.query({{"session_id", "s"}, {"query", "How many days of annual leave do Infosys employees receive?"}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body["turn_id"], "s-1");
  EXPECT_EQ(r.body["sources"][0]["chunk_id"], "policies/leave.md#t0");
  EXPECT_EQ(r.body["sources"][0]["file_name"], "leave.md");
  EXPECT_FALSE(r.body["citations"].empty());
}

TEST(Service, IngestFromCorpusDir) {
  Fixture f;
  const auto r = f.svc.ingest({{"corpus_dir", (EngineConfig::data_dir().parent_path() / "sample" / "corpus").string()}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_GT(r.body["chunk_count"].get<int>(), 5);
}

TEST(Service, BadIngestBodies) {
  Fixture f;
  EXPECT_EQ(f.svc.ingest(nlohmann::json::array()).status, 400);
  EXPECT_EQ(f.svc.ingest({{"nothing", 1}}).status, 400);
  EXPECT_EQ(f.svc.ingest({{"documents", nlohmann::json::array()}}).status, 400);
  EXPECT_EQ(f.svc.ingest({{"documents", {{{"doc_id", "x"}, {"kind", "pdf"}, {"content", "a"}}}}}).status, 400);
  const auto ragged = f.svc.ingest({{"documents", {{{"doc_id", "t.csv"}, {"kind", "table"}, {"content", "a,b\n1,2\n3\n"}}}}});
  EXPECT_EQ(ragged.status, 400);
  EXPECT_NE(ragged.body["error"]["message"].get<std::string>().find("ragged"), std::string::npos);
  EXPECT_EQ(f.svc.ingest({{"corpus_dir", "/definitely/not/here"}}).status, 400);
  EXPECT_FALSE(f.svc.has_index());
}

TEST(Service, ConcurrentIngestIs409) {
  Fixture f;
  std::promise<void> entered, release;
  auto released = release.get_future().share();
  f.svc.set_build_hook([&] {
    entered.set_value();
    released.wait();
  });
  auto first = std::async(std::launch::async, [&] { return f.svc.ingest(documents_body()); });
  entered.get_future().wait();
  const auto second = f.svc.ingest(documents_body());
  EXPECT_EQ(second.status, 409);
  EXPECT_EQ(second.body["error"]["code"], "conflict");
  release.set_value();
  EXPECT_EQ(first.get().status, 200);
  f.svc.set_build_hook({});
  EXPECT_EQ(f.svc.ingest(documents_body()).status, 200);
}

TEST(Service, QueryValidation) {
  Fixture f;
  f.svc.ingest(documents_body());
  EXPECT_EQ(f.svc.query({{"query", "x"}}).status, 400);
  EXPECT_EQ(f.svc.query({{"session_id", "s"}, {"query", ""}}).status, 400);
  EXPECT_EQ(f.svc.query({{"session_id", "s"}, {"query", "x"}, {"profile", "hybrid"}}).status, 400);
  EXPECT_EQ(f.svc.query({{"session_id", "../etc"}, {"query", "x"}}).status, 400);
  EXPECT_EQ(f.svc.query({{"session_id", "s"}, {"query", "x"}, {"filter", {{"exact", {{"department", "hr"}}}}}}).status, 200);
}

TEST(Service, FeedbackRetriesAndExhausts) {
  Fixture f;
  f.svc.ingest(documents_body());
  for (int i = 0; i < 4; ++i) {
    const auto q = f.svc.query({{"session_id", "s"}, {"query", "leave carry over rules " + std::to_string(i)}});
    ASSERT_EQ(q.status, 200);
    const auto r = f.svc.feedback({{"session_id", "s"}, {"turn_id", q.body["turn_id"]}, {"verdict", "down"}});
    ASSERT_EQ(r.status, 200) << r.body.dump();
    EXPECT_EQ(r.body["retried"], i < 3);
    EXPECT_EQ(r.body["budget_exhausted"], i == 3);
    if (i < 3) {
      EXPECT_TRUE(r.body["new_answer"]["reformulated"].get<bool>());
      EXPECT_NE(r.body["new_answer"]["final_query"], q.body["final_query"]);
    }
  }
  EXPECT_EQ(f.svc.feedback({{"session_id", "s"}, {"turn_id", "s-99"}, {"verdict", "down"}}).status, 404);
  EXPECT_EQ(f.svc.feedback({{"session_id", "s"}, {"turn_id", "s-1"}, {"verdict", "meh"}}).status, 400);
  EXPECT_EQ(f.svc.feedback({{"session_id", "zz"}, {"turn_id", "zz-1"}, {"verdict", "up"}}).status, 404);
}

TEST(Service, SessionWindow) {
  Fixture f;
  f.svc.ingest(documents_body());
  for (int i = 1; i <= 15; ++i) ASSERT_EQ(f.svc.query({{"session_id", "w"}, {"query", "q" + std::to_string(i)}}).status, 200);
  const auto r = f.svc.session("w");
  ASSERT_EQ(r.status, 200);
  ASSERT_EQ(r.body["turns"].size(), 10u);
  EXPECT_EQ(r.body["turns"][0]["turn_id"], "w-6");
  EXPECT_EQ(r.body["turns"][9]["turn_id"], "w-15");
  EXPECT_EQ(f.svc.session("nobody").status, 404);
}

TEST(Service, DeadLlmIs502AtGenerate) {
  testutil::TempDir tmp;
  auto cfg = test_config();
  cfg.llm.mode = LlmClient::Mode::remote;
  cfg.llm.endpoint = testutil::kDeadEndpoint + "/chat/completions";
  Service svc(cfg, tmp.path() / "index", tmp.path() / "state");
  ASSERT_EQ(svc.ingest(documents_body()).status, 200);
  const auto r = svc.query({{"session_id", "s"}, {"query", "how many annual leave days apply"}, {"profile", "naive"}});
  EXPECT_EQ(r.status, 502);
  EXPECT_EQ(r.body["error"]["code"], "upstream_unavailable");
  EXPECT_EQ(r.body["error"]["stage"], "generate");
}

TEST(Service, DeadRerankerDegrades) {
  testutil::TempDir tmp;
  auto cfg = test_config();
  cfg.reranker.kind = RerankerProfile::Kind::remote;
  cfg.reranker.endpoint = testutil::kDeadEndpoint + "/rerank";
  Service svc(cfg, tmp.path() / "index", tmp.path() / "state");
  svc.ingest(documents_body());
  const auto r = svc.query({{"session_id", "s"}, {"query", "annual leave carry over"}});
  ASSERT_EQ(r.status, 200);
  EXPECT_FALSE(r.body["warnings"].empty());
}

TEST(Service, StateSurvivesRestart) {
  testutil::TempDir tmp;
  std::string version;
  {
    Service svc(test_config(), tmp.path() / "index", tmp.path() / "state");
    version = svc.ingest(documents_body()).body["index_version"];
    svc.query({{"session_id", "s"}, {"query", "travel claims"}});
  }
  Service svc(test_config(), tmp.path() / "index", tmp.path() / "state");
  EXPECT_TRUE(svc.has_index());
  EXPECT_EQ(svc.session("s").body["turns"].size(), 1u);
  EXPECT_EQ(svc.query({{"session_id", "s"}, {"query", "hotel cap in Pune"}}).body["turn_id"], "s-2");
}

TEST(Service, ErrorMapping) {
  EXPECT_EQ(http_status(Errc::bad_input), 400);
  EXPECT_EQ(http_status(Errc::dimension_mismatch), 400);
  EXPECT_EQ(http_status(Errc::not_found), 404);
  EXPECT_EQ(http_status(Errc::duplicate), 409);
  EXPECT_EQ(http_status(Errc::upstream_unavailable), 502);
  EXPECT_EQ(http_status(Errc::corrupt), 500);
  const auto e = api_error(StageError("rerank", Error(Errc::upstream_unavailable, "down")));
  EXPECT_EQ(e.status, 502);
  EXPECT_EQ(e.body["error"]["stage"], "rerank");
}

TEST(Service, ParseAddr) {
  EXPECT_EQ(parse_addr("127.0.0.1:8080"), (std::pair<std::string, int>{"127.0.0.1", 8080}));
  EXPECT_THROW(parse_addr("localhost"), Error);
  EXPECT_THROW(parse_addr("h:99999"), Error);
  EXPECT_THROW(parse_addr("h:x"), Error);
}

TEST(Http, EndToEnd) {
  testutil::TempDir tmp;
  Service svc(test_config(), tmp.path() / "index", tmp.path() / "state");
  testutil::LocalServer srv;
  svc.mount(srv.server());
  srv.start();
  httplib::Client cli("127.0.0.1", srv.port());
  auto post = [&](const std::string& path, const std::string& body) { return cli.Post(path, body, "application/json"); };

  auto h = cli.Get("/v1/health");
  ASSERT_TRUE(h);
  EXPECT_EQ(nlohmann::json::parse(h->body)["index"], false);

  auto r = post("/v1/query", R"({"session_id": "s", "query": "annual leave"})");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 404);
  EXPECT_EQ(r->get_header_value("Content-Type"), "application/json");

  r = post("/v1/ingest", documents_body().dump());
  ASSERT_EQ(r->status, 200);
  r = post("/v1/query", R"({"session_id": "s", "query": "Senior Engineer salary range"})");
  ASSERT_EQ(r->status, 200);
  const auto ans = nlohmann::json::parse(r->body);
  EXPECT_EQ(ans["sources"][0]["chunk_id"], "hr/bands.csv#rt0.2");

  r = post("/v1/feedback", nlohmann::json{{"session_id", "s"}, {"turn_id", ans["turn_id"]}, {"verdict", "down"}}.dump());
  ASSERT_EQ(r->status, 200);
  EXPECT_EQ(nlohmann::json::parse(r->body)["retried"], true);

  r = cli.Get("/v1/sessions/s");
  ASSERT_EQ(r->status, 200);
  EXPECT_EQ(nlohmann::json::parse(r->body)["turns"].size(), 2u);

  r = post("/v1/query", "{not json");
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(nlohmann::json::parse(r->body)["error"]["code"], "bad_request");

  r = cli.Get("/v1/spec");
  ASSERT_EQ(r->status, 200);
  const auto doc = nlohmann::json::parse(r->body);
  EXPECT_EQ(doc["openapi"], "3.0.3");
  for (const auto* p : {"/v1/ingest", "/v1/query", "/v1/feedback", "/v1/sessions/{id}", "/v1/spec", "/v1/health"})
    EXPECT_TRUE(doc["paths"].contains(p)) << p;
}
