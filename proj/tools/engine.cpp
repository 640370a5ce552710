// Command-line front end: build indices, query, chat, evaluate, serve.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "hrag/hrag.hpp"

using namespace hrag;
namespace fs = std::filesystem;

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? v : fallback;
}

EngineConfig load_config(const std::string& path) {
  return path.empty() ? EngineConfig::defaults() : EngineConfig::load(path);
}

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int run(int argc, char** argv) {
  CLI::App app{"Hybrid retrieval engine"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "engine config JSON")->check(CLI::ExistingFile);

  std::string corpus, out, index_dir = "index", profile = "advanced", query_text, session, turn, verdict,
                           state = env_or("ENGINE_STATE", "engine_state"), qrels_path, report_path, addr, kind = "tables";
  std::vector<std::string> profiles{"direct_llm", "naive", "advanced"};
  std::size_t k = 5;
  std::uint64_t seed = 0;

  auto* ingest = app.add_subcommand("ingest", "chunk, embed and index a corpus directory");
  ingest->add_option("--corpus", corpus)->required()->check(CLI::ExistingDirectory);
  ingest->add_option("--out", out, "index directory")->required();

  auto* query = app.add_subcommand("query", "print ranked candidates as JSON lines");
  query->add_option("--index", index_dir);
  query->add_option("--profile", profile);
  query->add_option("--q", query_text)->required();

  auto* ask = app.add_subcommand("ask", "answer a question inside a session");
  ask->add_option("--index", index_dir);
  ask->add_option("--profile", profile);
  ask->add_option("--session", session)->required();
  ask->add_option("--q", query_text)->required();
  ask->add_option("--state", state, "session store directory (ENGINE_STATE)");

  auto* fb = app.add_subcommand("feedback", "record a verdict on a turn");
  fb->add_option("--index", index_dir);
  fb->add_option("--session", session)->required();
  fb->add_option("--turn", turn)->required();
  fb->add_option("--verdict", verdict)->required()->check(CLI::IsMember({"up", "down"}));
  fb->add_option("--state", state, "session store directory (ENGINE_STATE)");

  auto* eval = app.add_subcommand("eval", "P@k, R@k and MRR per profile");
  eval->add_option("--index", index_dir);
  eval->add_option("--qrels", qrels_path)->required()->check(CLI::ExistingFile);
  eval->add_option("--profiles", profiles)->delimiter(',');
  eval->add_option("--k", k);
  eval->add_option("--out", report_path, "write the JSON report here");

  auto* serve = app.add_subcommand("serve", "HTTP API");
  serve->add_option("--index", index_dir);
  serve->add_option("--addr", addr, "host:port (ENGINE_ADDR)");
  serve->add_option("--state", state, "session store directory (ENGINE_STATE)");

  auto* synth = app.add_subcommand("synth", "write a synthetic corpus with qrels");
  synth->add_option("--out", out)->required();
  synth->add_option("--kind", kind)->check(CLI::IsMember({"tables", "enterprise"}));
  synth->add_option("--seed", seed, "0 keeps the default seed");

  CLI11_PARSE(app, argc, argv);
  const auto cfg = load_config(config_path);

  if (*ingest) {
    const auto docs = load_corpus(corpus);
    const auto bundle = build_index(docs, cfg.build);
    persist_index(bundle, out);
    std::cout << nlohmann::json{{"documents", docs.size()},
                                {"chunk_count", bundle.chunk_count()},
                                {"index_version", bundle.version},
                                {"out", out}}
                     .dump()
              << "\n";
    return 0;
  }

  if (*query) {
    const auto p = profile_from_string(profile);
    if (p == Profile::direct_llm) return 0;
    const auto bundle = load_index(index_dir);
    auto cands = retrieve(query_text, cfg.profiles.at(p), bundle);
    if (p == Profile::advanced) cands = rerank_candidates(query_text, std::move(cands), cfg.reranker, variant_for(bundle, p));
    if (cands.size() > cfg.profiles.at(p).final_k) cands.resize(cfg.profiles.at(p).final_k);
    for (const auto& c : cands) {
      auto j = to_json(c);
      j["text"] = variant_for(bundle, p).chunk(c.chunk_id).text;
      std::cout << j.dump() << "\n";
    }
    return 0;
  }

  if (*ask || *fb) {
    const auto p = profile_from_string(profile);
    std::optional<IndexBundle> bundle;
    if (index_exists(index_dir)) bundle = load_index(index_dir);
    else if (*ask && p != Profile::direct_llm) throw Error(Errc::not_found, "no index at " + index_dir);
    SessionStore store(state);
    Orchestrator orch(cfg.components(bundle ? &*bundle : nullptr, &store));
    if (*ask) {
      std::cout << to_json(orch.answer_query(session, query_text, p), bundle ? &*bundle : nullptr).dump(2) << "\n";
    } else {
      const auto r = orch.handle_feedback(session, turn, verdict_from_string(verdict));
      nlohmann::json j{{"retried", r.retry.has_value()}, {"budget_exhausted", r.budget_exhausted}, {"event", to_json(r.event)}};
      if (r.retry) j["new_answer"] = to_json(*r.retry, bundle ? &*bundle : nullptr);
      std::cout << j.dump(2) << "\n";
    }
    return 0;
  }

  if (*eval) {
    const auto bundle = load_index(index_dir);
    std::vector<Profile> ps;
    for (const auto& s : profiles) ps.push_back(profile_from_string(s));
    const auto rep = evaluate_profiles(bundle, load_qrels(qrels_path), cfg.profiles, cfg.reranker, ps, k);
    std::cout << rep.table();
    if (!report_path.empty()) write_file_atomic(report_path, rep.to_json().dump(2));
    return 0;
  }

  if (*serve) {
    if (addr.empty()) addr = env_or("ENGINE_ADDR", cfg.addr);
    const auto [host, port] = parse_addr(addr);
    Service svc(cfg, index_dir, state);
    httplib::Server srv;
    svc.mount(srv);
    g_server = &srv;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "listening on " << host << ":" << port << "\n";
    if (!srv.listen(host, port)) throw Error(Errc::io, "cannot listen on " + addr);
    return 0;
  }

  if (*synth) {
    auto c = kind == "tables" ? (seed ? make_table_benchmark(seed) : make_table_benchmark())
                              : (seed ? make_enterprise_corpus(seed) : make_enterprise_corpus());
    write_corpus(c, out);
    std::cout << nlohmann::json{{"documents", c.docs.size()}, {"queries", c.qrels.order.size()}, {"out", out}}.dump() << "\n";
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Errc::bad_input ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 1;
}
