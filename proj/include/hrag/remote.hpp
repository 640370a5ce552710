#pragma once

#include <chrono>
#include <cstdlib>
#include <optional>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "hrag/error.hpp"

namespace hrag {

/// Endpoint of a remote model server ("http://host:port/path" or https).
struct RemoteEndpoint {
  std::string url;
  std::optional<std::string> api_key_env;  // bearer token read from this env var
  std::chrono::milliseconds timeout{30000};
};

namespace detail {

struct SplitUrl {
  std::string base;  // scheme://host[:port]
  std::string path;
};

inline SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(Errc::bad_input, "endpoint must include a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace detail

/// POSTs a JSON body and returns the parsed JSON response. Any transport
/// failure, non-200 status or unparsable body is upstream_unavailable.
inline nlohmann::json post_json(const RemoteEndpoint& ep, const nlohmann::json& body) {
  const auto [base, path] = detail::split_url(ep.url);
  httplib::Client cli(base);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(ep.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(ep.timeout - secs);
  cli.set_connection_timeout(secs.count(), usecs.count());
  cli.set_read_timeout(secs.count(), usecs.count());
  cli.set_write_timeout(secs.count(), usecs.count());
  cli.set_keep_alive(true);
  httplib::Headers headers;
  if (ep.api_key_env) {
    if (const char* key = std::getenv(ep.api_key_env->c_str()); key && *key)
      headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  auto res = cli.Post(path, headers, body.dump(), "application/json");
  if (!res) throw Error(Errc::upstream_unavailable, "endpoint unreachable: " + ep.url + " (" + httplib::to_string(res.error()) + ")");
  if (res->status != 200)
    throw Error(Errc::upstream_unavailable, "endpoint " + ep.url + " returned HTTP " + std::to_string(res->status));
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::upstream_unavailable, "endpoint " + ep.url + " returned invalid JSON: " + e.what());
  }
}

}  // namespace hrag
