#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hrag {

/// Failure categories shared by every module. The HTTP layer maps these onto
/// status codes, so keep the list coarse.
enum class Errc {
  bad_input,             // malformed payload, ragged table, bad argument
  io,                    // unreadable / unwritable file
  not_found,             // unknown session, turn, chunk, missing index
  duplicate,             // duplicate chunk_id / turn_id
  dimension_mismatch,
  version_mismatch,      // persisted format or corpus version differs
  corrupt,               // checksum failure or truncated file
  upstream_unavailable,  // remote model endpoint failed
  conflict,              // exclusive operation already running
  invalid_state,         // e.g. insert into a frozen index
};

inline std::string_view to_string(Errc c) {
  switch (c) {
    case Errc::bad_input: return "bad_input";
    case Errc::io: return "io";
    case Errc::not_found: return "not_found";
    case Errc::duplicate: return "duplicate";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::version_mismatch: return "version_mismatch";
    case Errc::corrupt: return "corrupt";
    case Errc::upstream_unavailable: return "upstream_unavailable";
    case Errc::conflict: return "conflict";
    case Errc::invalid_state: return "invalid_state";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// An error raised inside the answering pipeline, tagged with the stage that
/// failed ("rewrite", "retrieve", "rerank", "generate", "expand").
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& inner)
      : Error(inner.code(), stage + ": " + inner.what()), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace hrag
