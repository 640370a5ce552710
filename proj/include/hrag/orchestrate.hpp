#pragma once

// Query answering pipeline:
//   rewrite -> retrieve -> rerank -> build_prompt -> generate
// plus the feedback loop that retries a turn with an expanded query.

#include <algorithm>
#include <map>
#include <mutex>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "hrag/error.hpp"
#include "hrag/index_store.hpp"
#include "hrag/llm.hpp"
#include "hrag/rerank.hpp"
#include "hrag/retrieve.hpp"
#include "hrag/session_store.hpp"
#include "hrag/text.hpp"

namespace hrag {

struct ContextBlock {
  std::string chunk_id;
  std::string text;
  std::string file_name;
};

struct PromptTemplate {
  std::string system_instructions;
  std::vector<ContextBlock> context_blocks;
  std::string user_query;
  std::vector<Turn> history;

  std::vector<std::string> context_ids() const {
    std::vector<std::string> out;
    for (const auto& b : context_blocks) out.push_back(b.chunk_id);
    return out;
  }

  std::string render_user() const {
    std::string s;
    if (context_blocks.empty()) {
      s += "No sources were retrieved for this question.\n\n";
    } else {
      s += "Sources:\n\n";
      for (const auto& b : context_blocks) s += "[" + b.chunk_id + "] (" + b.file_name + ")\n" + b.text + "\n\n";
    }
    s += "Question: " + user_query;
    return s;
  }

  std::vector<ChatMessage> messages() const {
    std::vector<ChatMessage> out{{"system", system_instructions}};
    for (const auto& t : history) {
      out.push_back({"user", t.final_query});
      out.push_back({"assistant", t.answer_text});
    }
    out.push_back({"user", render_user()});
    return out;
  }
};

struct GroundedAnswer {
  std::string answer_text;
  std::vector<std::string> citations;
  std::vector<std::string> used_chunks;
  std::optional<std::string> summary;
  bool reformulated = false;
  std::string query;
  std::string final_query;
  std::string profile;
  std::string turn_id;
  std::vector<std::string> dropped_citations;
  std::vector<std::string> warnings;
  std::vector<ScoredCandidate> sources;
  PromptTemplate prompt;
};

inline const std::string& grounding_instructions() {
  static const std::string s =
      "You answer questions about an enterprise document collection.\n"
      "1. Answer strictly based on the retrieved sources. If they do not contain the answer, say so.\n"
      "2. Use bullet points for clarity.\n"
      "3. Cite the source of every point with its id in square brackets, for example [doc.md#t0].\n"
      "4. If the answer is longer than three sentences, end with a line that starts with \"Summary:\".";
  return s;
}

// ------------------------------------------------------------------ rewrite

inline const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> s{
      "a",    "an",   "and",  "are",  "as",   "at",    "be",    "by",   "can",   "do",    "does", "for",
      "from", "has",  "have", "how",  "i",    "in",    "is",    "it",   "its",   "many",  "me",   "much",
      "my",   "of",   "on",   "or",   "our",  "please","should","so",   "that",  "the",   "their","there",
      "this", "to",   "was",  "we",   "what", "when",  "where", "which","who",   "why",   "will", "with",
      "you",  "your", "tell", "about","any",  "all",   "get",   "give", "show",  "list",  "us",   "did"};
  return s;
}

/// Vague-query heuristic: fewer than 4 tokens, or a conversation in progress.
inline bool should_rewrite(const std::string& query, const std::vector<Turn>& history) {
  return tokenize(query).size() < 4 || !history.empty();
}

/// Mock rule: append up to 3 of the most recent content tokens from earlier
/// queries that the current query lacks, in their original order.
inline std::string mock_rewrite(const std::string& query, const std::vector<Turn>& history) {
  const auto q = tokenize(query);
  std::unordered_set<std::string> have(q.begin(), q.end());
  std::vector<std::string> picked;
  for (auto t = history.rbegin(); t != history.rend() && picked.size() < 3; ++t) {
    const auto toks = tokenize(t->query);
    for (auto it = toks.rbegin(); it != toks.rend() && picked.size() < 3; ++it) {
      if (stopwords().contains(*it) || have.contains(*it)) continue;
      have.insert(*it);
      picked.push_back(*it);
    }
  }
  if (picked.empty()) return query;
  std::reverse(picked.begin(), picked.end());
  return query + " " + join(picked, " ");
}

inline std::string rewrite_query(const std::string& query, const LlmClient& client, const std::vector<Turn>& history) {
  if (client.mode == LlmClient::Mode::mock) return mock_rewrite(query, history);
  std::string convo;
  for (const auto& t : history) convo += "User: " + t.final_query + "\nAssistant: " + t.answer_text + "\n";
  const auto out = chat(client, {{"system",
                                  "Rewrite the user's latest question into one complete, self-contained search query. "
                                  "Reply with the query only."},
                                 {"user", (convo.empty() ? "" : "Conversation so far:\n" + convo + "\n") +
                                              "Latest question: " + query}});
  const auto line = std::string(trim(out.substr(0, out.find('\n'))));
  if (line.empty()) throw Error(Errc::upstream_unavailable, "llm returned an empty rewrite");
  return line;
}

// ------------------------------------------------------------------ expand

namespace detail {

inline std::string normalized_query(const std::string& q) { return join(tokenize(q), " "); }

/// Deterministic variants: synonym substitution per position, then a
/// rotation of the terms, then generic suffixes.
inline std::vector<std::string> mock_variants(const std::string& query, const Lexicon& lexicon) {
  const auto toks = tokenize(query);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const auto* syns = lexicon.synonyms(toks[i]);
    if (!syns) continue;
    for (const auto& s : *syns) {
      auto v = toks;
      v[i] = s;
      out.push_back(join(v, " "));
    }
  }
  if (toks.size() >= 2) {
    auto v = toks;
    std::rotate(v.begin(), v.begin() + 1, v.end());
    out.push_back(join(v, " "));
  }
  const auto base = toks.empty() ? std::string("documents") : join(toks, " ");
  for (const char* suffix : {"details", "policy", "information", "overview", "guidelines", "requirements"})
    out.push_back(base + " " + suffix);
  for (int i = 2;; ++i) {
    out.push_back(base + " variant " + std::to_string(i));
    if (out.size() > 64) break;
  }
  return out;
}

/// Keeps the first n distinct entries that differ from the query.
inline std::vector<std::string> pick_variants(const std::string& query, const std::vector<std::string>& cands, std::size_t n,
                                              std::vector<std::string> out = {}) {
  std::set<std::string> seen{query, normalized_query(query)};
  for (const auto& o : out) seen.insert(normalized_query(o));
  for (const auto& c : cands) {
    if (out.size() >= n) break;
    const auto t = std::string(trim(c));
    if (t.empty() || seen.contains(t) || seen.contains(normalized_query(t))) continue;
    seen.insert(t);
    seen.insert(normalized_query(t));
    out.push_back(t);
  }
  return out;
}

}  // namespace detail

inline std::vector<std::string> expand_query(const std::string& query, const LlmClient& client, std::size_t n,
                                             const Lexicon& lexicon) {
  if (n == 0) throw Error(Errc::bad_input, "expand_query requires n >= 1");
  std::vector<std::string> got;
  if (client.mode == LlmClient::Mode::remote) {
    const auto out = chat(client, {{"system", "Produce " + std::to_string(n) +
                                                  " alternative formulations of the search query, one per line, "
                                                  "with no numbering."},
                                   {"user", query}});
    std::vector<std::string> lines;
    std::istringstream in(out);
    std::string line;
    static const std::regex marker(R"(^\s*(?:[-*]|\d+[.)])\s*)");
    while (std::getline(in, line)) lines.push_back(std::regex_replace(line, marker, ""));
    got = detail::pick_variants(query, lines, n);
  }
  return detail::pick_variants(query, detail::mock_variants(query, lexicon), n, std::move(got));
}

// ------------------------------------------------------------------ prompt

/// One block per distinct chunk, in candidate order.
inline PromptTemplate build_prompt(const std::string& query, const std::vector<ScoredCandidate>& cands,
                                   const IndexVariant& lookup, std::vector<Turn> history = {}) {
  PromptTemplate p;
  p.system_instructions = grounding_instructions();
  p.user_query = query;
  p.history = std::move(history);
  std::unordered_set<std::string> seen;
  for (const auto& c : cands) {
    if (!seen.insert(c.chunk_id).second) continue;
    const auto& chunk = lookup.chunk(c.chunk_id);
    auto it = chunk.metadata.find("file_name");
    p.context_blocks.push_back({chunk.chunk_id, chunk.text, it == chunk.metadata.end() ? chunk.doc_id : it->second});
  }
  return p;
}

// ------------------------------------------------------------------ generate

namespace detail {

/// Text up to the first sentence or clause terminator, on one line.
inline std::string first_clause(std::string_view text, std::size_t cap = 160) {
  // Leading markdown headings are titles, not statements.
  for (;;) {
    const auto lead = text.find_first_not_of(" \t\r\n");
    if (lead == std::string_view::npos || text[lead] != '#') break;
    const auto eol = text.find('\n', lead);
    if (eol == std::string_view::npos) break;
    text.remove_prefix(eol + 1);
  }
  std::string s;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    const bool at_break = i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]));
    if ((c == '.' || c == '!' || c == '?' || c == ';') && at_break) break;
    s.push_back(c == '\n' || c == '\r' || c == '\t' ? ' ' : c == '[' ? '(' : c == ']' ? ')' : c);
  }
  std::string out;
  for (char c : std::string(trim(s)))
    if (!(c == ' ' && !out.empty() && out.back() == ' ')) out.push_back(c);
  if (out.size() > cap) {
    auto cut = out.rfind(' ', cap);
    out = out.substr(0, cut == std::string::npos || cut < cap / 2 ? cap : cut);
  }
  while (!out.empty() && (out.back() == ',' || out.back() == ':' || out.back() == ' ')) out.pop_back();
  return out;
}

inline std::string mock_answer(const PromptTemplate& p) {
  if (p.context_blocks.empty()) return "- No sources were consulted, so this answer cannot cite the document collection.";
  std::string s;
  for (const auto& b : p.context_blocks) {
    if (!s.empty()) s += "\n";
    auto clause = first_clause(b.text);
    if (clause.empty()) clause = "(empty source)";
    s += "- " + clause + " [" + b.chunk_id + "].";
  }
  return s;
}

inline std::string strip_bullet(std::string s) {
  auto t = std::string(trim(s));
  if (t.starts_with("- ") || t.starts_with("* ")) t = t.substr(2);
  return t;
}

}  // namespace detail

/// Citations are `[chunk_id]` markers; ids outside the prompt are dropped
/// with a warning. A summary exists exactly when the answer has more than
/// three sentences.
inline GroundedAnswer finalize_answer(std::string text, const PromptTemplate& prompt) {
  if (is_blank(text)) throw Error(Errc::upstream_unavailable, "llm returned an empty completion");
  GroundedAnswer a;
  a.answer_text = std::move(text);
  a.used_chunks = prompt.context_ids();
  a.prompt = prompt;
  const std::unordered_set<std::string> allowed(a.used_chunks.begin(), a.used_chunks.end());
  static const std::regex cite(R"(\[([^\[\]\s]+)\])");
  std::unordered_set<std::string> seen;
  for (auto it = std::sregex_iterator(a.answer_text.begin(), a.answer_text.end(), cite); it != std::sregex_iterator(); ++it) {
    const auto id = (*it)[1].str();
    if (!seen.insert(id).second) continue;
    if (allowed.contains(id))
      a.citations.push_back(id);
    else
      a.dropped_citations.push_back(id);
  }
  if (!a.dropped_citations.empty())
    a.warnings.push_back("dropped citations not present in the prompt: " + join(a.dropped_citations, ", "));

  const auto sentences = split_sentences(a.answer_text);
  if (sentences.size() > 3) {
    std::istringstream in(a.answer_text);
    std::string line;
    while (std::getline(in, line))
      if (auto t = detail::strip_bullet(line); t.starts_with("Summary:")) a.summary = t;
    if (!a.summary) a.summary = "Summary: " + detail::strip_bullet(sentences.front());
  }
  return a;
}

inline GroundedAnswer generate_answer(const PromptTemplate& prompt, const LlmClient& client) {
  const auto text = client.mode == LlmClient::Mode::mock ? detail::mock_answer(prompt) : chat(client, prompt.messages());
  return finalize_answer(text, prompt);
}

// ------------------------------------------------------------------ pipeline

inline std::map<Profile, RetrievalConfig> default_retrieval_profiles() {
  RetrievalConfig direct;
  direct.profile = Profile::direct_llm;
  RetrievalConfig naive;
  naive.profile = Profile::naive;
  naive.w_dense = 1.0;
  naive.w_sparse = 0.0;
  RetrievalConfig advanced;
  advanced.filter = MetadataFilter{{}, true};
  return {{Profile::direct_llm, direct}, {Profile::naive, naive}, {Profile::advanced, advanced}};
}

struct Components {
  const IndexBundle* index = nullptr;  // may be null for direct_llm only
  std::map<Profile, RetrievalConfig> profiles = default_retrieval_profiles();
  RerankerProfile reranker;
  LlmClient llm;
  Lexicon lexicon;
  SessionStore* store = nullptr;
  bool degrade_on_rerank_failure = false;
};

struct FeedbackOutcome {
  FeedbackEvent event;
  std::optional<GroundedAnswer> retry;
  bool budget_exhausted = false;
};

class Orchestrator {
 public:
  explicit Orchestrator(Components c) : c_(std::move(c)) {
    if (!c_.store) throw Error(Errc::bad_input, "orchestrator requires a session store");
    c_.llm.validate();
    c_.reranker.validate();
  }

  const Components& components() const { return c_; }

  /// Runs one turn in the session (created on first use) and records it.
  GroundedAnswer answer_query(const std::string& session_id, const std::string& query, Profile profile,
                              const std::optional<MetadataFilter>& filter = std::nullopt) {
    if (is_blank(query)) throw Error(Errc::bad_input, "query must not be empty");
    c_.store->open(session_id);
    auto lock = c_.store->session_lock(session_id);
    std::lock_guard lk(*lock);
    return run(session_id, query, query, profile, false, filter);
  }

  FeedbackOutcome handle_feedback(const std::string& session_id, const std::string& turn_id, Verdict verdict) {
    if (!c_.store->exists(session_id)) throw Error(Errc::not_found, "unknown session: " + session_id);
    auto lock = c_.store->session_lock(session_id);
    std::lock_guard lk(*lock);
    const auto turn = c_.store->find_turn(session_id, turn_id);
    if (!turn) throw Error(Errc::not_found, "unknown turn " + turn_id + " in session " + session_id);

    FeedbackOutcome out;
    out.event = {session_id, turn_id, verdict, {}, false, false};
    if (verdict == Verdict::up) {
      out.event = c_.store->log_feedback(out.event);
      return out;
    }
    if (c_.store->retry_budget_used(session_id) >= SessionStore::kRetryBudget) {
      out.event.budget_exhausted = out.budget_exhausted = true;
      out.event = c_.store->log_feedback(out.event);
      return out;
    }
    std::string expanded;
    try {
      for (std::size_t n = 1; expanded.empty() && n <= 8; ++n)
        for (const auto& v : expand_query(turn->final_query, c_.llm, n, c_.lexicon))
          if (v != turn->query && v != turn->final_query) {
            expanded = v;
            break;
          }
      if (expanded.empty()) throw Error(Errc::invalid_state, "could not produce a distinct reformulation");
    } catch (const Error& e) {
      c_.store->log_feedback(out.event);
      throw StageError("expand", e);
    }
    const auto profile = turn->profile.empty() ? Profile::advanced : profile_from_string(turn->profile);
    try {
      out.retry = run(session_id, turn->query, expanded, profile, true, std::nullopt);
    } catch (...) {
      c_.store->log_feedback(out.event);
      throw;
    }
    out.event.triggered_retry = true;
    out.event = c_.store->log_feedback(out.event);
    return out;
  }

 private:
  const RetrievalConfig& config_for(Profile p) const {
    auto it = c_.profiles.find(p);
    if (it == c_.profiles.end()) throw Error(Errc::bad_input, "profile not configured: " + std::string(to_string(p)));
    return it->second;
  }

  GroundedAnswer run(const std::string& session_id, const std::string& user_query, std::string final_query,
                     Profile profile, bool reformulated, const std::optional<MetadataFilter>& filter) {
    const auto history = c_.store->history_window(session_id);
    std::vector<std::string> warnings;
    const bool advanced = profile == Profile::advanced;

    if (advanced && !reformulated && should_rewrite(final_query, history)) {
      try {
        final_query = rewrite_query(final_query, c_.llm, history);
      } catch (const Error& e) {
        warnings.push_back(std::string("query rewrite failed, using the original query: ") + e.what());
      }
    }

    std::vector<ScoredCandidate> cands;
    const IndexVariant* variant = nullptr;
    auto cfg = config_for(profile);
    if (filter) cfg.filter = filter;
    if (profile != Profile::direct_llm) {
      if (!c_.index) throw StageError("retrieve", Error(Errc::not_found, "no index loaded"));
      variant = &variant_for(*c_.index, profile);
      try {
        cands = retrieve(final_query, cfg, *c_.index);
      } catch (const Error& e) {
        throw StageError("retrieve", e);
      }
      if (advanced) {
        try {
          cands = rerank_candidates(final_query, std::move(cands), c_.reranker, *variant);
        } catch (const RerankError& e) {
          if (!c_.degrade_on_rerank_failure) throw StageError("rerank", e);
          cands = e.fallback();
          warnings.push_back(std::string("reranker unavailable, using fused order: ") + e.what());
        }
      }
      if (cands.size() > cfg.final_k) cands.resize(cfg.final_k);
    }

    PromptTemplate prompt;
    try {
      prompt = variant ? build_prompt(final_query, cands, *variant, history)
                       : build_prompt(final_query, {}, IndexVariant{}, history);
    } catch (const Error& e) {
      throw StageError("prompt", e);
    }
    GroundedAnswer ans;
    try {
      ans = generate_answer(prompt, c_.llm);
    } catch (const Error& e) {
      throw StageError("generate", e);
    }
    ans.query = user_query;
    ans.final_query = final_query;
    ans.reformulated = reformulated;
    ans.profile = std::string(to_string(profile));
    ans.sources = std::move(cands);
    ans.warnings.insert(ans.warnings.begin(), warnings.begin(), warnings.end());

    Turn t;
    t.query = user_query;
    t.final_query = final_query;
    t.answer_text = ans.answer_text;
    t.citations = ans.citations;
    t.reformulated = reformulated;
    t.profile = ans.profile;
    ans.turn_id = c_.store->append_turn(session_id, std::move(t)).turn_id;
    return ans;
  }

  Components c_;
};

inline nlohmann::json to_json(const GroundedAnswer& a, const IndexBundle* index = nullptr) {
  auto sources = nlohmann::json::array();
  for (const auto& c : a.sources) {
    auto j = to_json(c);
    if (index) {
      const auto& v = variant_for(*index, profile_from_string(a.profile));
      if (const auto* ch = v.find(c.chunk_id)) j["file_name"] = ch->metadata.count("file_name") ? ch->metadata.at("file_name") : ch->doc_id;
    }
    sources.push_back(std::move(j));
  }
  return {{"turn_id", a.turn_id},
          {"answer_text", a.answer_text},
          {"citations", a.citations},
          {"used_chunks", a.used_chunks},
          {"summary", a.summary ? nlohmann::json(*a.summary) : nlohmann::json(nullptr)},
          {"reformulated", a.reformulated},
          {"query", a.query},
          {"final_query", a.final_query},
          {"profile", a.profile},
          {"citation_warning", !a.dropped_citations.empty()},
          {"warnings", a.warnings},
          {"sources", std::move(sources)}};
}

}  // namespace hrag
