#include <gtest/gtest.h>

#include <thread>

#include "hrag/session_store.hpp"
#include "test_util.hpp"

using namespace hrag;

namespace {

Turn turn(std::string q) {
  Turn t;
  t.query = q;
  t.final_query = q;
  t.answer_text = "answer to " + q;
  t.profile = "advanced";
  return t;
}

SessionStore::Clock fixed_clock() {
  return [] { return std::chrono::system_clock::time_point(std::chrono::seconds(1700000000)); };
}

}  // namespace

TEST(SessionStore, OpenCreatesOnce) {
  testutil::TempDir tmp;
  SessionStore s(tmp.path(), fixed_clock());
  EXPECT_FALSE(s.exists("abc"));
  const auto a = s.open("abc");
  EXPECT_EQ(a.session_id, "abc");
  EXPECT_EQ(a.created_at, "2023-11-14T22:13:20Z");
  EXPECT_TRUE(a.turns.empty());
  EXPECT_TRUE(s.exists("abc"));
  s.open("abc");
  EXPECT_TRUE(std::filesystem::exists(tmp.path() / "sessions" / "abc.ndjson"));
}

TEST(SessionStore, RejectsBadIds) {
  testutil::TempDir tmp;
  SessionStore s(tmp.path());
  for (const auto* id : {"", "../x", "a/b", ".hidden", "sp ace"}) EXPECT_THROW(s.open(id), Error) << id;
  EXPECT_NO_THROW(s.open("user_1-A.b"));
}

TEST(SessionStore, UnknownSessionIsNotFound) {
  testutil::TempDir tmp;
  SessionStore s(tmp.path());
  try {
    s.get("nobody");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::not_found);
  }
}

TEST(SessionStore, WindowKeepsTenMostRecent) {
  testutil::TempDir tmp;
  SessionStore s(tmp.path());
  s.open("s");
  for (int i = 1; i <= 15; ++i) EXPECT_EQ(s.append_turn("s", turn("q" + std::to_string(i))).turn_id, "s-" + std::to_string(i));
  const auto w = s.history_window("s");
  ASSERT_EQ(w.size(), 10u);
  EXPECT_EQ(w.front().query, "q6");
  EXPECT_EQ(w.back().query, "q15");
  // Older turns stay addressable for feedback.
  EXPECT_TRUE(s.find_turn("s", "s-1").has_value());
}

TEST(SessionStore, DuplicateTurnId) {
  testutil::TempDir tmp;
  SessionStore s(tmp.path());
  s.open("s");
  auto t = turn("q");
  t.turn_id = "x";
  s.append_turn("s", t);
  try {
    s.append_turn("s", t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::duplicate);
  }
}

TEST(SessionStore, FeedbackNeedsKnownTurn) {
  testutil::TempDir tmp;
  SessionStore s(tmp.path());
  s.open("s");
  EXPECT_THROW(s.log_feedback({"s", "s-1", Verdict::down, {}, false, false}), Error);
  s.append_turn("s", turn("q"));
  const auto ev = s.log_feedback({"s", "s-1", Verdict::down, {}, true, false});
  EXPECT_FALSE(ev.timestamp.empty());
  EXPECT_EQ(s.retry_budget_used("s"), 1);
  EXPECT_EQ(s.find_turn("s", "s-1")->feedback, Verdict::down);
}

TEST(SessionStore, SurvivesRestart) {
  testutil::TempDir tmp;
  {
    SessionStore s(tmp.path());
    s.open("s");
    for (int i = 1; i <= 12; ++i) s.append_turn("s", turn("q" + std::to_string(i)));
    s.log_feedback({"s", "s-12", Verdict::down, {}, true, false});
    s.log_feedback({"s", "s-11", Verdict::up, {}, false, false});
    s.open("other");
    s.append_turn("other", turn("z"));
    s.log_feedback({"other", "other-1", Verdict::down, {}, true, false});
  }
  SessionStore s(tmp.path());
  const auto g = s.get("s");
  ASSERT_EQ(g.turns.size(), 10u);
  EXPECT_EQ(g.turns.front().query, "q3");
  EXPECT_EQ(g.turns.back().feedback, Verdict::down);
  EXPECT_EQ(g.turns[8].feedback, Verdict::up);
  EXPECT_EQ(g.retry_budget_used, 1);
  EXPECT_EQ(s.next_turn_id("s"), "s-13");
  EXPECT_EQ(s.feedback_events().size(), 3u);
  EXPECT_EQ(s.retry_budget_used("other"), 1);
}

TEST(SessionStore, CorruptTranscript) {
  testutil::TempDir tmp;
  testutil::write(tmp.path() / "sessions" / "bad.ndjson", "{\"type\":\"session\"}\n{oops\n");
  SessionStore s(tmp.path());
  try {
    s.get("bad");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::corrupt);
  }
}

TEST(SessionStore, JsonShape) {
  testutil::TempDir tmp;
  SessionStore s(tmp.path(), fixed_clock());
  s.open("s");
  auto t = turn("q");
  t.citations = {"a#t0"};
  s.append_turn("s", t);
  const auto j = to_json(s.get("s"));
  EXPECT_EQ(j["session_id"], "s");
  EXPECT_EQ(j["turns"][0]["turn_id"], "s-1");
  EXPECT_EQ(j["turns"][0]["citations"][0], "a#t0");
  EXPECT_TRUE(j["turns"][0]["feedback"].is_null());
  EXPECT_EQ(j["turns"][0]["timestamp"], "2023-11-14T22:13:20Z");
  EXPECT_EQ(turn_from_json(j["turns"][0]).answer_text, "answer to q");
}

TEST(SessionStore, VerdictParsing) {
  EXPECT_EQ(verdict_from_string("up"), Verdict::up);
  EXPECT_EQ(verdict_from_string("down"), Verdict::down);
  EXPECT_THROW(verdict_from_string("meh"), Error);
}

TEST(SessionStore, ConcurrentAppendsAcrossSessions) {
  testutil::TempDir tmp;
  SessionStore s(tmp.path());
  std::vector<std::thread> ts;
  for (int k = 0; k < 4; ++k)
    ts.emplace_back([&, k] {
      const auto id = "c" + std::to_string(k);
      s.open(id);
      for (int i = 0; i < 25; ++i) s.append_turn(id, turn("q"));
    });
  for (auto& t : ts) t.join();
  SessionStore r(tmp.path());
  for (int k = 0; k < 4; ++k) EXPECT_EQ(r.next_turn_id("c" + std::to_string(k)), "c" + std::to_string(k) + "-26");
}
