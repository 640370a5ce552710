#pragma once

// JSON-over-HTTP front end. Handlers are plain functions from a request body
// to (status, body) so they can be exercised without a socket; mount() wires
// them into an httplib::Server.

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "hrag/config.hpp"
#include "hrag/error.hpp"
#include "hrag/index_store.hpp"
#include "hrag/orchestrate.hpp"
#include "hrag/session_store.hpp"

namespace hrag {

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

inline int http_status(Errc c) {
  switch (c) {
    case Errc::bad_input:
    case Errc::dimension_mismatch: return 400;
    case Errc::not_found: return 404;
    case Errc::duplicate:
    case Errc::conflict: return 409;
    case Errc::upstream_unavailable: return 502;
    default: return 500;
  }
}

inline std::string_view api_code(int status) {
  switch (status) {
    case 400: return "bad_request";
    case 404: return "not_found";
    case 409: return "conflict";
    case 502: return "upstream_unavailable";
    default: return "internal";
  }
}

inline ApiResponse api_error(int status, const std::string& message, const std::string& stage = {}) {
  nlohmann::json e{{"code", api_code(status)}, {"message", message}};
  if (!stage.empty()) e["stage"] = stage;
  return {status, {{"error", e}}};
}

inline ApiResponse api_error(const Error& e) {
  if (const auto* s = dynamic_cast<const StageError*>(&e)) return api_error(http_status(e.code()), e.what(), s->stage());
  return api_error(http_status(e.code()), e.what());
}

const nlohmann::json& openapi_document();

class Service {
 public:
  Service(EngineConfig cfg, std::filesystem::path index_dir, std::filesystem::path state_dir)
      : cfg_(std::move(cfg)), index_dir_(std::move(index_dir)), store_(std::move(state_dir)) {
    if (index_exists(index_dir_)) index_ = std::make_shared<const IndexBundle>(load_index(index_dir_));
  }

  bool has_index() const {
    std::shared_lock lk(index_mu_);
    return index_ != nullptr;
  }

  SessionStore& store() { return store_; }

  /// {"corpus_dir": str} or {"documents": [{doc_id, file_name, kind, content, metadata?}]},
  /// optional "config" overriding the engine config for this build.
  ApiResponse ingest(const nlohmann::json& body) {
    bool expected = false;
    if (!building_.compare_exchange_strong(expected, true)) return api_error(409, "an index build is already running");
    struct Reset {
      std::atomic<bool>& f;
      ~Reset() { f = false; }
    } reset{building_};
    return guarded([&] {
      if (!body.is_object()) throw Error(Errc::bad_input, "body must be a JSON object");
      const auto cfg = body.contains("config") ? EngineConfig::from_json(body["config"]) : cfg_;
      std::vector<Document> docs;
      if (body.contains("corpus_dir")) {
        docs = load_corpus(body["corpus_dir"].get<std::string>());
      } else if (body.contains("documents")) {
        for (const auto& d : body["documents"]) {
          const auto kind = d.value("kind", std::string("text"));
          if (kind != "text" && kind != "table") throw Error(Errc::bad_input, "document kind must be text or table");
          const auto file_name = d.value("file_name", d.at("doc_id").get<std::string>());
          docs.push_back(make_document(d.at("doc_id").get<std::string>(), file_name,
                                       kind == "text" ? DocKind::text : DocKind::table, d.at("content").get<std::string>(),
                                       d.value("metadata", Metadata{})));
        }
      } else {
        throw Error(Errc::bad_input, "ingest needs corpus_dir or documents");
      }
      if (docs.empty()) throw Error(Errc::bad_input, "no documents to ingest");
      if (hook_) hook_();
      auto bundle = std::make_shared<const IndexBundle>(build_index(docs, cfg.build));
      std::unique_lock lk(index_mu_);
      persist_index(*bundle, index_dir_);
      index_ = bundle;
      cfg_ = cfg;
      return ApiResponse{200, {{"chunk_count", bundle->chunk_count()}, {"index_version", bundle->version}}};
    });
  }

  /// {"session_id", "query", "profile"?, "filter"?}
  ApiResponse query(const nlohmann::json& body) {
    return guarded([&] {
      if (!body.is_object()) throw Error(Errc::bad_input, "body must be a JSON object");
      const auto session = body.at("session_id").get<std::string>();
      const auto q = body.at("query").get<std::string>();
      const auto profile = profile_from_string(body.value("profile", std::string("advanced")));
      std::optional<MetadataFilter> filter;
      if (body.contains("filter") && !body["filter"].is_null()) {
        MetadataFilter f;
        f.exact = body["filter"].value("exact", std::map<std::string, std::string>{});
        f.require_entity_overlap = body["filter"].value("require_entity_overlap", false);
        filter = f;
      }
      std::shared_lock lk(index_mu_);
      if (!index_ && profile != Profile::direct_llm) return api_error(404, "no index has been built yet");
      auto orch = orchestrator();
      const auto ans = orch.answer_query(session, q, profile, filter);
      return ApiResponse{200, to_json(ans, index_.get())};
    });
  }

  /// {"session_id", "turn_id", "verdict": "up"|"down"}
  ApiResponse feedback(const nlohmann::json& body) {
    return guarded([&] {
      if (!body.is_object()) throw Error(Errc::bad_input, "body must be a JSON object");
      const auto session = body.at("session_id").get<std::string>();
      const auto turn = body.at("turn_id").get<std::string>();
      const auto verdict = verdict_from_string(body.at("verdict").get<std::string>());
      std::shared_lock lk(index_mu_);
      auto orch = orchestrator();
      const auto out = orch.handle_feedback(session, turn, verdict);
      nlohmann::json res{{"retried", out.retry.has_value()},
                         {"budget_exhausted", out.budget_exhausted},
                         {"event", to_json(out.event)}};
      if (out.retry) res["new_answer"] = to_json(*out.retry, index_.get());
      return ApiResponse{200, res};
    });
  }

  ApiResponse session(const std::string& id) {
    return guarded([&] { return ApiResponse{200, to_json(store_.get(id))}; });
  }

  ApiResponse spec() const { return {200, openapi_document()}; }

  void mount(httplib::Server& srv) {
    auto reply = [](httplib::Response& res, const ApiResponse& r) {
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    auto with_body = [this, reply](ApiResponse (Service::*fn)(const nlohmann::json&)) {
      return [this, reply, fn](const httplib::Request& req, httplib::Response& res) {
        nlohmann::json body;
        try {
          body = nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::exception& e) {
          return reply(res, api_error(400, std::string("invalid JSON body: ") + e.what()));
        }
        reply(res, (this->*fn)(body));
      };
    };
    srv.Post("/v1/ingest", with_body(&Service::ingest));
    srv.Post("/v1/query", with_body(&Service::query));
    srv.Post("/v1/feedback", with_body(&Service::feedback));
    srv.Get(R"(/v1/sessions/([^/]+))", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, session(req.matches[1].str()));
    });
    srv.Get("/v1/spec", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, spec()); });
    srv.Get("/v1/health", [this, reply](const httplib::Request&, httplib::Response& res) {
      reply(res, {200, {{"status", "ok"}, {"index", has_index()}}});
    });
    srv.set_exception_handler([reply](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string msg = "internal error";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        msg = e.what();
      } catch (...) {
      }
      reply(res, api_error(500, msg));
    });
  }

  /// Test hook run inside ingest while the build lock is held.
  void set_build_hook(std::function<void()> f) { hook_ = std::move(f); }

 private:
  Orchestrator orchestrator() {
    auto c = cfg_.components(index_.get(), &store_);
    c.degrade_on_rerank_failure = true;
    return Orchestrator(std::move(c));
  }

  template <class F>
  ApiResponse guarded(F&& f) {
    try {
      return f();
    } catch (const Error& e) {
      return api_error(e);
    } catch (const nlohmann::json::exception& e) {
      return api_error(400, std::string("malformed request: ") + e.what());
    } catch (const std::exception& e) {
      return api_error(500, e.what());
    }
  }

  EngineConfig cfg_;
  std::filesystem::path index_dir_;
  SessionStore store_;
  mutable std::shared_mutex index_mu_;
  std::shared_ptr<const IndexBundle> index_;
  std::atomic<bool> building_{false};
  std::function<void()> hook_;
};

/// "host:port" -> (host, port).
inline std::pair<std::string, int> parse_addr(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon == 0) throw Error(Errc::bad_input, "address must be host:port: " + addr);
  try {
    const int port = std::stoi(addr.substr(colon + 1));
    if (port < 0 || port > 65535) throw std::out_of_range("port");
    return {addr.substr(0, colon), port};
  } catch (const std::exception&) {
    throw Error(Errc::bad_input, "invalid port in address: " + addr);
  }
}

inline const nlohmann::json& openapi_document() {
  static const nlohmann::json doc = [] {
    const nlohmann::json error_schema{
        {"type", "object"},
        {"required", {"error"}},
        {"properties",
         {{"error",
           {{"type", "object"},
            {"required", {"code", "message"}},
            {"properties",
             {{"code", {{"type", "string"}, {"enum", {"bad_request", "not_found", "upstream_unavailable", "conflict", "internal"}}}},
              {"message", {{"type", "string"}}},
              {"stage", {{"type", "string"}}}}}}}}}};
    const nlohmann::json candidate{{"type", "object"},
                                   {"properties",
                                    {{"chunk_id", {{"type", "string"}}},
                                     {"file_name", {{"type", "string"}}},
                                     {"dense_norm", {{"type", "number"}}},
                                     {"sparse_norm", {{"type", "number"}}},
                                     {"fused", {{"type", "number"}}},
                                     {"rerank", {{"type", {"number", "null"}}}}}}};
    const nlohmann::json answer{{"type", "object"},
                                {"required", {"turn_id", "answer_text", "citations", "reformulated", "sources"}},
                                {"properties",
                                 {{"turn_id", {{"type", "string"}}},
                                  {"answer_text", {{"type", "string"}}},
                                  {"citations", {{"type", "array"}, {"items", {{"type", "string"}}}}},
                                  {"used_chunks", {{"type", "array"}, {"items", {{"type", "string"}}}}},
                                  {"summary", {{"type", {"string", "null"}}}},
                                  {"reformulated", {{"type", "boolean"}}},
                                  {"query", {{"type", "string"}}},
                                  {"final_query", {{"type", "string"}}},
                                  {"profile", {{"type", "string"}}},
                                  {"warnings", {{"type", "array"}, {"items", {{"type", "string"}}}}},
                                  {"sources", {{"type", "array"}, {"items", {{"$ref", "#/components/schemas/Candidate"}}}}}}}};
    auto json_body = [](const nlohmann::json& schema) {
      return nlohmann::json{{"required", true}, {"content", {{"application/json", {{"schema", schema}}}}}};
    };
    auto ok = [](const nlohmann::json& schema) {
      return nlohmann::json{{"description", "OK"}, {"content", {{"application/json", {{"schema", schema}}}}}};
    };
    const nlohmann::json err{{"description", "Error"},
                             {"content", {{"application/json", {{"schema", {{"$ref", "#/components/schemas/Error"}}}}}}}};
    nlohmann::json paths;
    paths["/v1/ingest"]["post"] = {
        {"summary", "Build and persist the indices"},
        {"requestBody",
         json_body({{"type", "object"},
                    {"properties",
                     {{"corpus_dir", {{"type", "string"}}},
                      {"documents", {{"type", "array"}, {"items", {{"type", "object"}}}}},
                      {"config", {{"type", "object"}}}}}})},
        {"responses",
         {{"200", ok({{"type", "object"},
                      {"properties", {{"chunk_count", {{"type", "integer"}}}, {"index_version", {{"type", "string"}}}}}})},
          {"400", err},
          {"409", err}}}};
    paths["/v1/query"]["post"] = {
        {"summary", "Answer a query within a session"},
        {"requestBody",
         json_body({{"type", "object"},
                    {"required", {"session_id", "query"}},
                    {"properties",
                     {{"session_id", {{"type", "string"}}},
                      {"query", {{"type", "string"}}},
                      {"profile", {{"type", "string"}, {"enum", {"direct_llm", "naive", "advanced"}}}},
                      {"filter", {{"type", "object"}}}}}})},
        {"responses", {{"200", ok({{"$ref", "#/components/schemas/GroundedAnswer"}})}, {"400", err}, {"404", err}, {"502", err}}}};
    paths["/v1/feedback"]["post"] = {
        {"summary", "Record a verdict; a negative verdict retries the turn with a reformulated query"},
        {"requestBody",
         json_body({{"type", "object"},
                    {"required", {"session_id", "turn_id", "verdict"}},
                    {"properties",
                     {{"session_id", {{"type", "string"}}},
                      {"turn_id", {{"type", "string"}}},
                      {"verdict", {{"type", "string"}, {"enum", {"up", "down"}}}}}}})},
        {"responses",
         {{"200", ok({{"type", "object"},
                      {"properties",
                       {{"retried", {{"type", "boolean"}}},
                        {"budget_exhausted", {{"type", "boolean"}}},
                        {"new_answer", {{"$ref", "#/components/schemas/GroundedAnswer"}}}}}})},
          {"400", err},
          {"404", err},
          {"502", err}}}};
    paths["/v1/sessions/{id}"]["get"] = {
        {"summary", "The last ten turns of a session, oldest first"},
        {"parameters", {{{"name", "id"}, {"in", "path"}, {"required", true}, {"schema", {{"type", "string"}}}}}},
        {"responses", {{"200", ok({{"type", "object"}})}, {"404", err}}}};
    paths["/v1/spec"]["get"] = {{"summary", "This document"}, {"responses", {{"200", ok({{"type", "object"}})}}}};
    paths["/v1/health"]["get"] = {{"summary", "Liveness and whether an index is loaded"},
                                  {"responses", {{"200", ok({{"type", "object"}})}}}};
    return nlohmann::json{{"openapi", "3.0.3"},
                          {"info", {{"title", "Hybrid retrieval engine API"}, {"version", "1"}}},
                          {"paths", paths},
                          {"components",
                           {{"schemas", {{"Error", error_schema}, {"Candidate", candidate}, {"GroundedAnswer", answer}}}}}};
  }();
  return doc;
}

}  // namespace hrag
