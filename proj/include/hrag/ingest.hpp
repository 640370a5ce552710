#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hrag/error.hpp"
#include "hrag/text.hpp"

namespace hrag {

using Metadata = std::map<std::string, std::string>;

enum class DocKind { text, table };
enum class ChunkKind { text_chunk, table_row, full_table };
enum class EntityLabel { DATE, LOCATION, ORG };

inline std::string_view to_string(DocKind k) { return k == DocKind::text ? "text" : "table"; }

inline std::string_view to_string(ChunkKind k) {
  switch (k) {
    case ChunkKind::text_chunk: return "text_chunk";
    case ChunkKind::table_row: return "table_row";
    case ChunkKind::full_table: return "full_table";
  }
  return "text_chunk";
}

inline ChunkKind chunk_kind_from_string(std::string_view s) {
  if (s == "text_chunk") return ChunkKind::text_chunk;
  if (s == "table_row") return ChunkKind::table_row;
  if (s == "full_table") return ChunkKind::full_table;
  throw Error(Errc::bad_input, "unknown chunk kind: " + std::string(s));
}

inline std::string_view to_string(EntityLabel l) {
  switch (l) {
    case EntityLabel::DATE: return "DATE";
    case EntityLabel::LOCATION: return "LOCATION";
    case EntityLabel::ORG: return "ORG";
  }
  return "ORG";
}

inline EntityLabel entity_label_from_string(std::string_view s) {
  if (s == "DATE") return EntityLabel::DATE;
  if (s == "LOCATION") return EntityLabel::LOCATION;
  if (s == "ORG") return EntityLabel::ORG;
  throw Error(Errc::bad_input, "unknown entity label: " + std::string(s));
}

struct Entity {
  EntityLabel label;
  std::string surface;

  bool same_as(const Entity& o) const { return label == o.label && to_lower(surface) == to_lower(o.surface); }
  bool operator==(const Entity&) const = default;
};

struct Table {
  std::string table_id;
  std::vector<std::string> headers;
  std::vector<std::vector<std::string>> rows;
};

struct Document {
  std::string doc_id;
  std::string source_path;
  DocKind kind = DocKind::text;
  std::string raw_content;    // byte-exact file content
  std::vector<Table> tables;  // parsed payload, table kind only
  Metadata metadata;
};

struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - start; }
  bool operator==(const CharSpan&) const = default;
};

struct Chunk {
  std::string chunk_id;
  std::string doc_id;
  ChunkKind kind = ChunkKind::text_chunk;
  std::string text;
  std::optional<CharSpan> span;  // text_chunk only
  Metadata metadata;
  std::vector<Entity> entities;
};

struct TableRecord {
  std::string doc_id;
  std::string file_name;
  std::string table_id;
  std::size_t row_index = 0;
  std::vector<std::string> headers;
  std::vector<std::string> cells;
};

struct ChunkingConfig {
  std::size_t chunk_size = 2000;
  std::size_t overlap = 500;
  std::vector<std::string> separators{"\n\n", "\n", ". ", " "};

  static ChunkingConfig naive_baseline() { return {700, 100, {"\n\n", "\n", ". ", " "}}; }

  void validate() const {
    if (chunk_size == 0 || overlap >= chunk_size)
      throw Error(Errc::bad_input, "chunking requires 0 <= overlap < chunk_size");
    if (separators.empty()) throw Error(Errc::bad_input, "chunking requires at least one separator");
    for (const auto& s : separators)
      if (s.empty()) throw Error(Errc::bad_input, "empty separator");
  }
};

inline constexpr std::string_view kUnspecified = "unspecified";

/// Replaces bytes that would break `[chunk_id]` citation markers.
inline std::string sanitize_id(std::string_view s) {
  std::string out(s);
  for (auto& c : out)
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '[' || c == ']') c = '_';
  return out;
}

// ---------------------------------------------------------------- tables

/// RFC 4180-ish CSV: quoted fields, doubled quotes, CRLF. Blank lines skipped.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view data) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, field_started = false;
  auto end_row = [&] {
    if (field_started || !row.empty()) {
      row.push_back(std::move(field));
      rows.push_back(std::move(row));
    }
    row.clear();
    field.clear();
    field_started = false;
  };
  for (std::size_t i = 0; i < data.size(); ++i) {
    const char c = data[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        field_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (quoted) throw Error(Errc::bad_input, "malformed CSV: unterminated quoted field");
  end_row();
  return rows;
}

inline Table table_from_csv(std::string_view data, std::string table_id) {
  auto rows = parse_csv(data);
  if (rows.empty()) throw Error(Errc::bad_input, "malformed CSV: no header row");
  Table t;
  t.table_id = std::move(table_id);
  t.headers = std::move(rows.front());
  t.rows.assign(std::make_move_iterator(rows.begin() + 1), std::make_move_iterator(rows.end()));
  return t;
}

/// Table JSON: {"file_name": str, "tables": [{"table_id", "headers", "rows"}]}.
inline std::vector<Table> tables_from_json(std::string_view data) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(data);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_input, std::string("malformed table JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("tables") || !j["tables"].is_array())
    throw Error(Errc::bad_input, "malformed table JSON: missing \"tables\" array");
  std::vector<Table> out;
  try {
    for (const auto& jt : j["tables"]) {
      Table t;
      t.table_id = jt.at("table_id").get<std::string>();
      t.headers = jt.at("headers").get<std::vector<std::string>>();
      t.rows = jt.at("rows").get<std::vector<std::vector<std::string>>>();
      out.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_input, std::string("malformed table JSON: ") + e.what());
  }
  return out;
}

// ---------------------------------------------------------------- documents

inline Metadata default_metadata(const std::string& file_name) {
  return {{"file_name", file_name},
          {"document_type", std::string(kUnspecified)},
          {"department", std::string(kUnspecified)},
          {"confidentiality_level", std::string(kUnspecified)}};
}

/// Builds a document from in-memory content. `file_name` always wins over any
/// file_name key in `extra`.
inline Document make_document(std::string doc_id, std::string file_name, DocKind kind, std::string content,
                              const Metadata& extra = {}) {
  if (content.empty()) throw Error(Errc::bad_input, "empty document: " + doc_id);
  Document d;
  d.doc_id = sanitize_id(doc_id);
  d.source_path = file_name;
  d.kind = kind;
  d.metadata = default_metadata(file_name);
  for (const auto& [k, v] : extra)
    if (k != "file_name") d.metadata[k] = v;
  if (kind == DocKind::table) {
    const auto ext = to_lower(std::filesystem::path(file_name).extension().string());
    if (ext == ".json")
      d.tables = tables_from_json(content);
    else
      d.tables.push_back(table_from_csv(content, "t0"));
  }
  d.raw_content = std::move(content);
  return d;
}

inline Metadata read_sidecar_metadata(const std::filesystem::path& source) {
  auto side = source;
  side += ".meta.json";
  if (!std::filesystem::exists(side)) return {};
  try {
    const auto j = nlohmann::json::parse(read_file(side));
    Metadata m;
    for (const auto& [k, v] : j.items()) m[k] = v.is_string() ? v.get<std::string>() : v.dump();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_input, "malformed sidecar metadata " + side.string() + ": " + e.what());
  }
}

/// Loads a .txt/.md (text) or .csv/table-JSON (table) file. `doc_id` defaults
/// to the path as given.
inline Document load_document(const std::filesystem::path& path, DocKind kind,
                              std::optional<std::string> doc_id = std::nullopt) {
  const auto ext = to_lower(path.extension().string());
  if (kind == DocKind::text && ext != ".txt" && ext != ".md")
    throw Error(Errc::bad_input, "text documents must be .txt or .md: " + path.string());
  if (kind == DocKind::table && ext != ".csv" && ext != ".json")
    throw Error(Errc::bad_input, "table documents must be .csv or .json: " + path.string());
  if (!std::filesystem::is_regular_file(path)) throw Error(Errc::io, "unreadable file: " + path.string());
  auto content = read_file(path);
  if (content.empty()) throw Error(Errc::bad_input, "empty file: " + path.string());
  auto d = make_document(doc_id.value_or(path.generic_string()), path.filename().string(), kind,
                         std::move(content), read_sidecar_metadata(path));
  d.source_path = path.generic_string();
  return d;
}

// ---------------------------------------------------------------- splitting

namespace detail {

struct Piece {
  std::size_t start, end;
  bool forced;  // indivisible by any separator and longer than chunk_size
};

inline void split_pieces(std::string_view text, std::size_t start, std::size_t end,
                         const std::vector<std::string>& seps, std::size_t sep_idx, std::size_t chunk_size,
                         std::vector<Piece>& out) {
  if (end - start <= chunk_size) {
    out.push_back({start, end, false});
    return;
  }
  for (std::size_t k = sep_idx; k < seps.size(); ++k) {
    const std::string& sep = seps[k];
    auto f = text.find(sep, start);
    if (f == std::string_view::npos || f + sep.size() > end) continue;
    std::size_t pos = start;
    auto emit = [&](std::size_t a, std::size_t b) {
      if (b <= a) return;
      if (b - a <= chunk_size)
        out.push_back({a, b, false});
      else
        split_pieces(text, a, b, seps, k + 1, chunk_size, out);
    };
    while (f != std::string_view::npos && f + sep.size() <= end) {
      emit(pos, f + sep.size());  // separator stays with the left piece
      pos = f + sep.size();
      f = text.find(sep, pos);
    }
    emit(pos, end);
    return;
  }
  out.push_back({start, end, true});
}

inline std::vector<CharSpan> merge_pieces(const std::vector<Piece>& pieces, std::size_t chunk_size,
                                          std::size_t overlap) {
  std::vector<CharSpan> chunks;
  std::vector<Piece> cur;
  std::size_t cur_len = 0, fresh = 0;
  auto flush = [&] {
    if (fresh > 0) chunks.push_back({cur.front().start, cur.back().end});
  };
  for (const auto& p : pieces) {
    if (p.forced) {
      flush();
      std::size_t s = p.start;
      for (;;) {
        const std::size_t e = std::min(s + chunk_size, p.end);
        chunks.push_back({s, e});
        if (e == p.end) break;
        s = e - overlap;
      }
      cur.clear();
      cur_len = fresh = 0;
      if (overlap > 0) {
        cur.push_back({p.end - overlap, p.end, false});
        cur_len = overlap;
      }
      continue;
    }
    const std::size_t len = p.end - p.start;
    if (!cur.empty() && cur_len + len > chunk_size) {
      flush();
      std::size_t drop = 0;
      while (drop < cur.size() && (cur_len > overlap || cur_len + len > chunk_size)) {
        cur_len -= cur[drop].end - cur[drop].start;
        ++drop;
      }
      cur.erase(cur.begin(), cur.begin() + static_cast<std::ptrdiff_t>(drop));
      fresh = 0;
    }
    cur.push_back(p);
    cur_len += len;
    ++fresh;
  }
  flush();
  return chunks;
}

}  // namespace detail

/// Recursive character splitting: try separators in order, recurse into
/// oversize pieces with the remaining separators, then greedily pack pieces
/// into chunks carrying up to `overlap` characters of trailing context.
/// A run with no separator at all is cut into fixed windows whose overlap is
/// exactly `overlap`.
inline std::vector<CharSpan> split_spans(std::string_view text, const ChunkingConfig& cfg) {
  cfg.validate();
  if (text.empty()) return {};
  std::vector<detail::Piece> pieces;
  detail::split_pieces(text, 0, text.size(), cfg.separators, 0, cfg.chunk_size, pieces);
  return detail::merge_pieces(pieces, cfg.chunk_size, cfg.overlap);
}

inline std::vector<Chunk> split_text(const Document& doc, const ChunkingConfig& cfg) {
  if (doc.kind != DocKind::text) throw Error(Errc::bad_input, "split_text requires a text document");
  std::vector<Chunk> out;
  const auto spans = split_spans(doc.raw_content, cfg);
  out.reserve(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    Chunk c;
    c.chunk_id = doc.doc_id + "#t" + std::to_string(i);
    c.doc_id = doc.doc_id;
    c.kind = ChunkKind::text_chunk;
    c.text = doc.raw_content.substr(spans[i].start, spans[i].size());
    c.span = spans[i];
    c.metadata = doc.metadata;
    c.metadata["chunk_index"] = std::to_string(i);
    out.push_back(std::move(c));
  }
  return out;
}

inline std::vector<TableRecord> extract_table_rows(const Document& doc) {
  if (doc.kind != DocKind::table) throw Error(Errc::bad_input, "extract_table_rows requires a table document");
  std::vector<TableRecord> out;
  const auto& file_name = doc.metadata.at("file_name");
  for (const auto& t : doc.tables) {
    std::vector<std::string> headers;
    for (const auto& h : t.headers) headers.emplace_back(trim(h));
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto& row = t.rows[r];
      if (row.size() != headers.size())
        throw Error(Errc::bad_input, "ragged row " + std::to_string(r) + " in table " + t.table_id + " of " +
                                         file_name + ": expected " + std::to_string(headers.size()) +
                                         " cells, got " + std::to_string(row.size()));
      TableRecord rec{doc.doc_id, file_name, t.table_id, r, headers, {}};
      for (const auto& cell : row) rec.cells.emplace_back(trim(cell));
      out.push_back(std::move(rec));
    }
  }
  return out;
}

/// "h1: v1 | h2: v2 | ...". One-way; pipes inside cells are kept verbatim.
inline std::string serialize_row(const std::vector<std::string>& headers, const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < headers.size(); ++i) {
    if (i) out += " | ";
    out += headers[i];
    out += ": ";
    out += cells[i];
  }
  return out;
}

inline Chunk row_to_chunk(const TableRecord& rec, const Metadata& doc_metadata = {}) {
  Chunk c;
  c.chunk_id = rec.doc_id + "#r" + sanitize_id(rec.table_id) + "." + std::to_string(rec.row_index);
  c.doc_id = rec.doc_id;
  c.kind = ChunkKind::table_row;
  c.text = serialize_row(rec.headers, rec.cells);
  c.metadata = doc_metadata;
  for (std::size_t i = 0; i < rec.headers.size(); ++i) c.metadata[rec.headers[i]] = rec.cells[i];
  c.metadata["file_name"] = rec.file_name;
  c.metadata["table_id"] = rec.table_id;
  c.metadata["row_index"] = std::to_string(rec.row_index);
  return c;
}

/// Plain-text line for one table row as the flattened baseline renders it.
inline std::string flatten_row(const std::vector<std::string>& cells) { return join(cells, ", "); }

inline std::string render_table_text(const Document& doc) {
  std::vector<std::string> blocks;
  for (const auto& rec_table : doc.tables) {
    if (rec_table.rows.empty()) continue;
    std::string block = flatten_row(rec_table.headers);
    for (const auto& row : rec_table.rows) {
      std::vector<std::string> cells;
      for (const auto& c : row) cells.emplace_back(trim(c));
      block += "\n" + flatten_row(cells);
    }
    blocks.push_back(std::move(block));
  }
  return join(blocks, "\n\n");
}

/// Naive baseline: the whole table as newline-joined rows, then split like text.
inline std::vector<Chunk> flatten_table(const Document& doc, const ChunkingConfig& cfg) {
  (void)extract_table_rows(doc);  // same validation (ragged rows)
  const auto rendered = render_table_text(doc);
  std::vector<Chunk> out;
  const auto spans = split_spans(rendered, cfg);
  for (std::size_t i = 0; i < spans.size(); ++i) {
    Chunk c;
    c.chunk_id = doc.doc_id + "#f" + std::to_string(i);
    c.doc_id = doc.doc_id;
    c.kind = ChunkKind::full_table;
    c.text = rendered.substr(spans[i].start, spans[i].size());
    c.metadata = doc.metadata;
    c.metadata["chunk_index"] = std::to_string(i);
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------- entities

/// ORG / LOCATION lexicon; matching is case-insensitive and whole-word.
class Gazetteer {
 public:
  Gazetteer() = default;

  void add(EntityLabel label, std::string_view phrase) {
    auto p = trim(phrase);
    if (p.empty()) return;
    entries_.push_back({label, to_lower(p)});
    std::stable_sort(entries_.begin(), entries_.end(),
                     [](const auto& a, const auto& b) { return a.lower.size() > b.lower.size(); });
  }

  /// JSON {"ORG": [str], "LOCATION": [str]}.
  static Gazetteer from_json(const nlohmann::json& j) {
    Gazetteer g;
    if (!j.is_object()) throw Error(Errc::bad_input, "gazetteer must be a JSON object");
    for (const auto& [key, list] : j.items()) {
      const auto label = entity_label_from_string(key);
      if (label == EntityLabel::DATE) throw Error(Errc::bad_input, "gazetteer cannot define DATE entries");
      for (const auto& v : list) g.add(label, v.get<std::string>());
    }
    return g;
  }

  static Gazetteer load(const std::filesystem::path& path) {
    try {
      return from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::bad_input, "malformed gazetteer " + path.string() + ": " + e.what());
    }
  }

  struct Match {
    std::size_t pos, len;
    EntityLabel label;
  };

  /// Longest match at each word-start position, scanning left to right.
  std::vector<Match> find_all(std::string_view text) const {
    std::vector<Match> out;
    if (entries_.empty()) return out;
    const auto lower = to_lower(text);
    std::size_t i = 0;
    while (i < lower.size()) {
      const bool word_start = is_word_byte(static_cast<unsigned char>(lower[i])) &&
                              (i == 0 || !is_word_byte(static_cast<unsigned char>(lower[i - 1])));
      if (!word_start) {
        ++i;
        continue;
      }
      std::optional<Match> hit;
      for (const auto& e : entries_) {  // longest first
        const auto n = e.lower.size();
        if (i + n > lower.size() || lower.compare(i, n, e.lower) != 0) continue;
        if (i + n < lower.size() && is_word_byte(static_cast<unsigned char>(lower[i + n]))) continue;
        hit = Match{i, n, e.label};
        break;
      }
      if (hit) {
        out.push_back(*hit);
        i += hit->len;
      } else {
        ++i;
      }
    }
    return out;
  }

  bool empty() const { return entries_.empty(); }

  /// Lowercased phrases, longest first within each label.
  nlohmann::json to_json() const {
    nlohmann::json j{{"ORG", nlohmann::json::array()}, {"LOCATION", nlohmann::json::array()}};
    for (const auto& e : entries_) j[std::string(hrag::to_string(e.label))].push_back(e.lower);
    return j;
  }

 private:
  struct Entry {
    EntityLabel label;
    std::string lower;
  };
  std::vector<Entry> entries_;
};

namespace detail {

inline const std::regex& date_regex() {
  static const std::regex re(
      R"(\b(\d{4}-\d{2}-\d{2}|\d{2}/\d{2}/\d{4}|(January|February|March|April|May|June|July|August|September|October|November|December) \d{1,2}, \d{4})\b)",
      std::regex::ECMAScript | std::regex::icase);
  return re;
}

}  // namespace detail

/// DATE by pattern (YYYY-MM-DD, DD/MM/YYYY, "Month DD, YYYY"); ORG and
/// LOCATION by gazetteer. Ordered by position, deduplicated by
/// (label, lowercased surface) keeping the first occurrence.
inline std::vector<Entity> find_entities(std::string_view text, const Gazetteer& gazetteer) {
  struct Positioned {
    std::size_t pos;
    Entity e;
  };
  std::vector<Positioned> found;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), detail::date_regex()); it != std::sregex_iterator(); ++it)
    found.push_back({static_cast<std::size_t>(it->position(0)), {EntityLabel::DATE, it->str(0)}});
  for (const auto& m : gazetteer.find_all(text))
    found.push_back({m.pos, {m.label, std::string(text.substr(m.pos, m.len))}});
  std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.pos < b.pos; });

  std::vector<Entity> out;
  std::unordered_set<std::string> seen;
  for (auto& f : found) {
    auto key = std::string(to_string(f.e.label)) + '\x1f' + to_lower(f.e.surface);
    if (seen.insert(std::move(key)).second) out.push_back(std::move(f.e));
  }
  return out;
}

inline Chunk tag_entities(Chunk chunk, const Gazetteer& gazetteer) {
  chunk.entities = find_entities(chunk.text, gazetteer);
  return chunk;
}

// ---------------------------------------------------------------- corpus

inline bool is_sidecar(const std::filesystem::path& p) {
  const auto name = p.filename().string();
  return name.size() > 10 && name.ends_with(".meta.json");
}

/// Walks a corpus directory in sorted order. doc_id is the path relative to
/// the corpus root. Unknown extensions and sidecar files are skipped.
inline std::vector<Document> load_corpus(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::is_directory(root)) throw Error(Errc::bad_input, "corpus directory not found: " + root.string());
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<Document> docs;
  for (const auto& f : files) {
    if (is_sidecar(f)) continue;
    const auto ext = to_lower(f.extension().string());
    std::optional<DocKind> kind;
    if (ext == ".txt" || ext == ".md") kind = DocKind::text;
    if (ext == ".csv" || ext == ".json") kind = DocKind::table;
    if (!kind) continue;
    docs.push_back(load_document(f, *kind, std::filesystem::relative(f, root).generic_string()));
  }
  return docs;
}

/// Which chunk representation a corpus is indexed with.
enum class TableMode { row_level, flattened };

/// Chunks every document and tags entities uniformly (text and rows alike).
inline std::vector<Chunk> chunk_documents(const std::vector<Document>& docs, const ChunkingConfig& cfg,
                                          TableMode mode, const Gazetteer& gazetteer) {
  std::vector<Chunk> out;
  std::unordered_set<std::string> doc_ids;
  for (const auto& d : docs) {
    if (!doc_ids.insert(d.doc_id).second) throw Error(Errc::duplicate, "duplicate doc_id: " + d.doc_id);
    std::vector<Chunk> chunks;
    if (d.kind == DocKind::text) {
      chunks = split_text(d, cfg);
    } else if (mode == TableMode::row_level) {
      for (const auto& rec : extract_table_rows(d)) chunks.push_back(row_to_chunk(rec, d.metadata));
    } else {
      chunks = flatten_table(d, cfg);
    }
    for (auto& c : chunks) out.push_back(tag_entities(std::move(c), gazetteer));
  }
  return out;
}

// ---------------------------------------------------------------- json

inline nlohmann::json to_json(const Chunk& c) {
  nlohmann::json j{{"chunk_id", c.chunk_id},
                   {"doc_id", c.doc_id},
                   {"kind", to_string(c.kind)},
                   {"text", c.text},
                   {"metadata", c.metadata}};
  if (c.span) j["char_span"] = {c.span->start, c.span->end};
  auto ents = nlohmann::json::array();
  for (const auto& e : c.entities) ents.push_back({{"label", to_string(e.label)}, {"surface", e.surface}});
  j["entities"] = std::move(ents);
  return j;
}

inline Chunk chunk_from_json(const nlohmann::json& j) {
  Chunk c;
  c.chunk_id = j.at("chunk_id").get<std::string>();
  c.doc_id = j.at("doc_id").get<std::string>();
  c.kind = chunk_kind_from_string(j.at("kind").get<std::string>());
  c.text = j.at("text").get<std::string>();
  c.metadata = j.at("metadata").get<Metadata>();
  if (j.contains("char_span")) c.span = CharSpan{j["char_span"][0].get<std::size_t>(), j["char_span"][1].get<std::size_t>()};
  for (const auto& e : j.at("entities"))
    c.entities.push_back({entity_label_from_string(e.at("label").get<std::string>()), e.at("surface").get<std::string>()});
  return c;
}

}  // namespace hrag
