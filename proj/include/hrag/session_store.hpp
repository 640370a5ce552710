#pragma once

// Conversation memory. Each session is an append-only NDJSON transcript under
// sessions/<id>.ndjson; feedback verdicts for all sessions go to one
// append-only feedback.ndjson. The in-memory view keeps the last 10 turns.

#include <cctype>
#include <chrono>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "hrag/error.hpp"
#include "hrag/text.hpp"

namespace hrag {

enum class Verdict { up, down };

inline std::string_view to_string(Verdict v) { return v == Verdict::up ? "up" : "down"; }

inline Verdict verdict_from_string(std::string_view s) {
  if (s == "up") return Verdict::up;
  if (s == "down") return Verdict::down;
  throw Error(Errc::bad_input, "verdict must be 'up' or 'down', got '" + std::string(s) + "'");
}

struct Turn {
  std::string turn_id;
  std::string query;
  std::string final_query;
  std::string answer_text;
  std::vector<std::string> citations;
  std::optional<Verdict> feedback;
  bool reformulated = false;
  std::string profile;
  std::string timestamp;
};

struct FeedbackEvent {
  std::string session_id;
  std::string turn_id;
  Verdict verdict = Verdict::up;
  std::string timestamp;
  bool triggered_retry = false;
  bool budget_exhausted = false;
};

struct QuerySession {
  std::string session_id;
  std::string created_at;
  std::vector<Turn> turns;  // window, oldest first
  int retry_budget_used = 0;
};

inline nlohmann::json to_json(const Turn& t) {
  return {{"turn_id", t.turn_id},
          {"query", t.query},
          {"final_query", t.final_query},
          {"answer_text", t.answer_text},
          {"citations", t.citations},
          {"feedback", t.feedback ? nlohmann::json(to_string(*t.feedback)) : nlohmann::json(nullptr)},
          {"reformulated", t.reformulated},
          {"profile", t.profile},
          {"timestamp", t.timestamp}};
}

inline Turn turn_from_json(const nlohmann::json& j) {
  Turn t;
  t.turn_id = j.at("turn_id").get<std::string>();
  t.query = j.at("query").get<std::string>();
  t.final_query = j.at("final_query").get<std::string>();
  t.answer_text = j.at("answer_text").get<std::string>();
  t.citations = j.at("citations").get<std::vector<std::string>>();
  if (j.contains("feedback") && j["feedback"].is_string()) t.feedback = verdict_from_string(j["feedback"].get<std::string>());
  t.reformulated = j.value("reformulated", false);
  t.profile = j.value("profile", "");
  t.timestamp = j.value("timestamp", "");
  return t;
}

inline nlohmann::json to_json(const FeedbackEvent& e) {
  return {{"session_id", e.session_id},     {"turn_id", e.turn_id},
          {"verdict", to_string(e.verdict)}, {"timestamp", e.timestamp},
          {"triggered_retry", e.triggered_retry}, {"budget_exhausted", e.budget_exhausted}};
}

inline FeedbackEvent feedback_from_json(const nlohmann::json& j) {
  return {j.at("session_id").get<std::string>(), j.at("turn_id").get<std::string>(),
          verdict_from_string(j.at("verdict").get<std::string>()), j.value("timestamp", ""),
          j.value("triggered_retry", false), j.value("budget_exhausted", false)};
}

inline nlohmann::json to_json(const QuerySession& s) {
  auto turns = nlohmann::json::array();
  for (const auto& t : s.turns) turns.push_back(to_json(t));
  return {{"session_id", s.session_id},
          {"created_at", s.created_at},
          {"retry_budget_used", s.retry_budget_used},
          {"turns", std::move(turns)}};
}

class SessionStore {
 public:
  static constexpr std::size_t kWindow = 10;
  static constexpr int kRetryBudget = 3;
  using Clock = std::function<std::chrono::system_clock::time_point()>;

  explicit SessionStore(std::filesystem::path dir, Clock clock = std::chrono::system_clock::now)
      : dir_(std::move(dir)), clock_(std::move(clock)) {
    std::filesystem::create_directories(dir_ / "sessions");
  }

  const std::filesystem::path& dir() const { return dir_; }

  static void validate_id(const std::string& id) {
    if (id.empty() || id.size() > 128 || id[0] == '.')
      throw Error(Errc::bad_input, "invalid session id: '" + id + "'");
    for (unsigned char c : id)
      if (!(std::isalnum(c) || c == '-' || c == '_' || c == '.')) throw Error(Errc::bad_input, "invalid session id: '" + id + "'");
  }

  bool exists(const std::string& id) {
    validate_id(id);
    std::lock_guard lk(mu_);
    return cache_.contains(id) || std::filesystem::exists(path_of(id));
  }

  /// Creates the session if absent; returns its current state.
  QuerySession open(const std::string& id) {
    validate_id(id);
    std::lock_guard lk(mu_);
    if (auto* s = lookup(id)) return s->view();
    State st;
    st.session.session_id = id;
    st.session.created_at = now();
    append_line(path_of(id), nlohmann::json{{"type", "session"}, {"session_id", id}, {"created_at", st.session.created_at}});
    return cache_.emplace(id, std::move(st)).first->second.view();
  }

  QuerySession get(const std::string& id) {
    validate_id(id);
    std::lock_guard lk(mu_);
    return require(id).view();
  }

  std::vector<Turn> history_window(const std::string& id) { return get(id).turns; }

  /// Next unused turn id, "<session>-<n>".
  std::string next_turn_id(const std::string& id) {
    std::lock_guard lk(mu_);
    return id + "-" + std::to_string(require(id).all.size() + 1);
  }

  /// Appends to the durable transcript and slides the window.
  Turn append_turn(const std::string& id, Turn turn) {
    std::lock_guard lk(mu_);
    auto& st = require(id);
    if (turn.turn_id.empty()) turn.turn_id = id + "-" + std::to_string(st.all.size() + 1);
    if (st.index.contains(turn.turn_id)) throw Error(Errc::duplicate, "duplicate turn_id: " + turn.turn_id);
    if (turn.timestamp.empty()) turn.timestamp = now();
    auto j = to_json(turn);
    j["type"] = "turn";
    append_line(path_of(id), j);
    st.add(turn);
    return turn;
  }

  std::optional<Turn> find_turn(const std::string& id, const std::string& turn_id) {
    std::lock_guard lk(mu_);
    auto& st = require(id);
    auto it = st.index.find(turn_id);
    if (it == st.index.end()) return std::nullopt;
    return st.all[it->second];
  }

  /// Durably appends the event and updates the turn's feedback state.
  FeedbackEvent log_feedback(FeedbackEvent ev) {
    std::lock_guard lk(mu_);
    auto& st = require(ev.session_id);
    if (!st.index.contains(ev.turn_id))
      throw Error(Errc::not_found, "unknown turn " + ev.turn_id + " in session " + ev.session_id);
    if (ev.timestamp.empty()) ev.timestamp = now();
    append_line(dir_ / "feedback.ndjson", to_json(ev));
    st.apply(ev);
    return ev;
  }

  std::vector<FeedbackEvent> feedback_events() {
    std::lock_guard lk(mu_);
    return read_feedback();
  }

  int retry_budget_used(const std::string& id) { return get(id).retry_budget_used; }

  /// Serializes turns within one session.
  std::shared_ptr<std::mutex> session_lock(const std::string& id) {
    std::lock_guard lk(mu_);
    auto& m = locks_[id];
    if (!m) m = std::make_shared<std::mutex>();
    return m;
  }

 private:
  struct State {
    QuerySession session;
    std::vector<Turn> all;
    std::map<std::string, std::size_t> index;

    void add(const Turn& t) {
      index.emplace(t.turn_id, all.size());
      all.push_back(t);
    }
    void apply(const FeedbackEvent& ev) {
      all[index.at(ev.turn_id)].feedback = ev.verdict;
      if (ev.triggered_retry) ++session.retry_budget_used;
    }
    QuerySession view() const {
      QuerySession s = session;
      const auto from = all.size() > kWindow ? all.size() - kWindow : 0;
      s.turns.assign(all.begin() + static_cast<std::ptrdiff_t>(from), all.end());
      return s;
    }
  };

  std::filesystem::path path_of(const std::string& id) const { return dir_ / "sessions" / (id + ".ndjson"); }

  std::string now() const { return iso8601_utc(clock_()); }

  static void append_line(const std::filesystem::path& p, const nlohmann::json& j) {
    std::ofstream out(p, std::ios::binary | std::ios::app);
    if (!out) throw Error(Errc::io, "cannot append to " + p.string());
    out << j.dump() << '\n';
    out.flush();
    if (!out) throw Error(Errc::io, "write failed: " + p.string());
  }

  static std::vector<nlohmann::json> read_lines(const std::filesystem::path& p) {
    std::vector<nlohmann::json> out;
    if (!std::filesystem::exists(p)) return out;
    std::istringstream in(read_file(p));
    std::string line;
    try {
      while (std::getline(in, line))
        if (!is_blank(line)) out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::corrupt, p.string() + ": " + e.what());
    }
    return out;
  }

  std::vector<FeedbackEvent> read_feedback() const {
    std::vector<FeedbackEvent> out;
    for (const auto& j : read_lines(dir_ / "feedback.ndjson")) out.push_back(feedback_from_json(j));
    return out;
  }

  State* lookup(const std::string& id) {
    if (auto it = cache_.find(id); it != cache_.end()) return &it->second;
    const auto p = path_of(id);
    if (!std::filesystem::exists(p)) return nullptr;
    State st;
    try {
      for (const auto& j : read_lines(p)) {
        const auto type = j.value("type", "");
        if (type == "session") {
          st.session.session_id = j.at("session_id").get<std::string>();
          st.session.created_at = j.value("created_at", "");
        } else if (type == "turn") {
          st.add(turn_from_json(j));
        }
      }
      // Replaying the feedback log restores verdicts and the retry count.
      for (const auto& ev : read_feedback())
        if (ev.session_id == id && st.index.contains(ev.turn_id)) st.apply(ev);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::corrupt, "session " + id + ": " + e.what());
    }
    st.session.session_id = id;
    return &cache_.emplace(id, std::move(st)).first->second;
  }

  State& require(const std::string& id) {
    auto* s = lookup(id);
    if (!s) throw Error(Errc::not_found, "unknown session: " + id);
    return *s;
  }

  std::filesystem::path dir_;
  Clock clock_;
  std::mutex mu_;
  std::map<std::string, State> cache_;
  std::map<std::string, std::shared_ptr<std::mutex>> locks_;
};

}  // namespace hrag
