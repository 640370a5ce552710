#pragma once

// On-disk index directory: one manifest plus two variants of the corpus.
//
//   manifest.json
//   gazetteer.json
//   advanced/{chunks.ndjson, sparse.json, dense_<embedder>.hnsw}
//   naive/{chunks.ndjson, sparse.json, dense_<embedder>.hnsw}
//
// "advanced" indexes table rows one per chunk with the default chunking;
// "naive" flattens tables into text and uses the baseline chunking.

#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "hrag/bm25.hpp"
#include "hrag/embed.hpp"
#include "hrag/error.hpp"
#include "hrag/hnsw.hpp"
#include "hrag/ingest.hpp"
#include "hrag/text.hpp"

namespace hrag {

inline constexpr int kIndexFormatVersion = 1;

struct IndexBuildConfig {
  ChunkingConfig chunking;
  ChunkingConfig naive_chunking = ChunkingConfig::naive_baseline();
  HnswParams dense;
  Bm25Params sparse;
  std::map<std::string, EmbedderProfile> embedders = default_embedder_profiles();
  std::vector<std::string> build_embedders{"local_test"};
  Gazetteer gazetteer;
  std::size_t embed_batch = 64;

  /// The parts of the config that shape index content.
  nlohmann::json snapshot() const {
    auto chunking_json = [](const ChunkingConfig& c) {
      return nlohmann::json{{"chunk_size", c.chunk_size}, {"overlap", c.overlap}, {"separators", c.separators}};
    };
    nlohmann::json emb = nlohmann::json::object();
    for (const auto& name : build_embedders) emb[name] = to_json(embedders.at(name));
    return {{"chunking", chunking_json(chunking)},
            {"naive_chunking", chunking_json(naive_chunking)},
            {"dense",
             {{"M", dense.M},
              {"ef_construction", dense.ef_construction},
              {"ef_search", dense.ef_search},
              {"quantized", dense.quantized},
              {"seed", dense.seed}}},
            {"sparse", {{"k1", sparse.k1}, {"b", sparse.b}}},
            {"embedders", emb},
            {"gazetteer", gazetteer.to_json()}};
  }
};

/// One chunking of the corpus with its sparse index and one dense index per
/// embedder.
struct IndexVariant {
  std::string name;
  std::vector<Chunk> chunks;
  std::unordered_map<std::string, std::size_t> by_id;
  SparseIndex sparse;
  std::map<std::string, DenseIndex> dense;

  const Chunk& chunk(const std::string& id) const {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(Errc::not_found, "unknown chunk_id in " + name + " index: " + id);
    return chunks[it->second];
  }
  const Chunk* find(const std::string& id) const {
    auto it = by_id.find(id);
    return it == by_id.end() ? nullptr : &chunks[it->second];
  }

  const DenseIndex& dense_for(const std::string& embedder) const {
    auto it = dense.find(embedder);
    if (it == dense.end()) throw Error(Errc::not_found, "no dense index for embedder '" + embedder + "' in " + name);
    return it->second;
  }

  void reindex_ids() {
    by_id.clear();
    for (std::size_t i = 0; i < chunks.size(); ++i)
      if (!by_id.emplace(chunks[i].chunk_id, i).second)
        throw Error(Errc::duplicate, "duplicate chunk_id: " + chunks[i].chunk_id);
  }
};

struct IndexBundle {
  std::string version;  // content hash over config snapshot and chunks
  nlohmann::json config;
  Gazetteer gazetteer;
  std::map<std::string, EmbedderProfile> embedders;
  IndexVariant advanced;
  IndexVariant naive;

  std::size_t chunk_count() const { return advanced.chunks.size(); }

  const EmbedderProfile& embedder(const std::string& name) const {
    auto it = embedders.find(name);
    if (it == embedders.end()) throw Error(Errc::not_found, "unknown embedder profile: " + name);
    return it->second;
  }
};

namespace detail {

inline IndexVariant build_variant(std::string name, const std::vector<Document>& docs, const ChunkingConfig& chunking,
                                  TableMode mode, const IndexBuildConfig& cfg) {
  IndexVariant v;
  v.name = std::move(name);
  v.chunks = chunk_documents(docs, chunking, mode, cfg.gazetteer);
  v.reindex_ids();
  v.sparse = SparseIndex::build(v.chunks, cfg.sparse);
  for (const auto& emb_name : cfg.build_embedders) {
    const auto& profile = cfg.embedders.at(emb_name);
    DenseIndex idx(profile.dims, cfg.dense);
    for (std::size_t i = 0; i < v.chunks.size(); i += cfg.embed_batch) {
      std::vector<std::string> texts;
      const auto end = std::min(v.chunks.size(), i + cfg.embed_batch);
      for (std::size_t j = i; j < end; ++j) texts.push_back(v.chunks[j].text);
      const auto vecs = embed_texts(texts, profile);
      for (std::size_t j = i; j < end; ++j) idx.insert(v.chunks[j].chunk_id, vecs[j - i]);
    }
    idx.freeze();
    v.dense.emplace(emb_name, std::move(idx));
  }
  return v;
}

inline std::string content_hash(const nlohmann::json& snapshot, const IndexVariant& a, const IndexVariant& b) {
  auto h = fnv1a64(snapshot.dump());
  for (const auto* v : {&a, &b}) {
    h = fnv1a64(v->name, h);
    for (const auto& c : v->chunks) h = fnv1a64(to_json(c).dump(), h);
  }
  return hex64(h);
}

inline void set_tags(IndexVariant& v, const std::string& version) {
  v.sparse.set_tag(version);
  for (auto& [_, d] : v.dense) d.set_tag(version);
}

inline void persist_variant(const IndexVariant& v, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string lines;
  for (const auto& c : v.chunks) lines += to_json(c).dump() + "\n";
  write_file_atomic(dir / "chunks.ndjson", lines);
  v.sparse.persist(dir / "sparse.json");
  for (const auto& [name, d] : v.dense) d.persist(dir / ("dense_" + name + ".hnsw"));
}

inline IndexVariant load_variant(std::string name, const std::filesystem::path& dir,
                                 const std::vector<std::string>& embedders, const std::string& version) {
  IndexVariant v;
  v.name = std::move(name);
  std::istringstream in(read_file(dir / "chunks.ndjson"));
  std::string line;
  try {
    while (std::getline(in, line))
      if (!is_blank(line)) v.chunks.push_back(chunk_from_json(nlohmann::json::parse(line)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::corrupt, "chunks file in " + dir.string() + ": " + e.what());
  }
  v.reindex_ids();
  v.sparse = SparseIndex::restore(dir / "sparse.json");
  if (v.sparse.tag() != version)
    throw Error(Errc::version_mismatch, v.name + " sparse index built for corpus version " + v.sparse.tag() +
                                            ", manifest says " + version);
  for (const auto& e : embedders) {
    auto d = DenseIndex::restore(dir / ("dense_" + e + ".hnsw"));
    if (d.tag() != version)
      throw Error(Errc::version_mismatch, v.name + " dense index '" + e + "' built for corpus version " + d.tag() +
                                              ", manifest says " + version);
    v.dense.emplace(e, std::move(d));
  }
  if (v.sparse.size() != v.chunks.size()) throw Error(Errc::corrupt, v.name + ": sparse index size differs from chunks");
  return v;
}

}  // namespace detail

inline IndexBundle build_index(const std::vector<Document>& docs, const IndexBuildConfig& cfg) {
  cfg.chunking.validate();
  cfg.naive_chunking.validate();
  cfg.dense.validate();
  if (cfg.build_embedders.empty()) throw Error(Errc::bad_input, "at least one embedder must be built");
  for (const auto& e : cfg.build_embedders)
    if (!cfg.embedders.contains(e)) throw Error(Errc::bad_input, "unknown embedder profile: " + e);
  IndexBundle b;
  b.config = cfg.snapshot();
  b.gazetteer = cfg.gazetteer;
  b.embedders = cfg.embedders;
  b.advanced = detail::build_variant("advanced", docs, cfg.chunking, TableMode::row_level, cfg);
  b.naive = detail::build_variant("naive", docs, cfg.naive_chunking, TableMode::flattened, cfg);
  b.version = detail::content_hash(b.config, b.advanced, b.naive);
  detail::set_tags(b.advanced, b.version);
  detail::set_tags(b.naive, b.version);
  return b;
}

inline nlohmann::json manifest_of(const IndexBundle& b) {
  nlohmann::json emb = nlohmann::json::array();
  for (const auto& [name, _] : b.advanced.dense) emb.push_back(name);
  nlohmann::json profiles = nlohmann::json::object();
  for (const auto& [name, p] : b.embedders) profiles[name] = to_json(p);
  return {{"format_version", kIndexFormatVersion},
          {"index_version", b.version},
          {"chunk_count", {{"advanced", b.advanced.chunks.size()}, {"naive", b.naive.chunks.size()}}},
          {"embedders", emb},
          {"embedder_profiles", profiles},
          {"config", b.config}};
}

/// Writes every file of the index directory; the manifest goes last so a
/// partially written directory never looks complete.
inline void persist_index(const IndexBundle& b, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "gazetteer.json", b.gazetteer.to_json().dump(2));
  detail::persist_variant(b.advanced, dir / "advanced");
  detail::persist_variant(b.naive, dir / "naive");
  write_file_atomic(dir / "manifest.json", manifest_of(b).dump(2));
}

inline bool index_exists(const std::filesystem::path& dir) { return std::filesystem::is_regular_file(dir / "manifest.json"); }

inline IndexBundle load_index(const std::filesystem::path& dir) {
  if (!index_exists(dir)) throw Error(Errc::not_found, "no index at " + dir.string());
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::corrupt, std::string("index manifest: ") + e.what());
  }
  if (m.value("format_version", -1) != kIndexFormatVersion)
    throw Error(Errc::version_mismatch, "index format version " + m.value("format_version", nlohmann::json()).dump() +
                                            " unsupported");
  IndexBundle b;
  try {
    b.version = m.at("index_version").get<std::string>();
    b.config = m.at("config");
    for (const auto& [name, p] : m.at("embedder_profiles").items()) b.embedders[name] = embedder_profile_from_json(name, p);
    const auto emb = m.at("embedders").get<std::vector<std::string>>();
    b.gazetteer = Gazetteer::load(dir / "gazetteer.json");
    b.advanced = detail::load_variant("advanced", dir / "advanced", emb, b.version);
    b.naive = detail::load_variant("naive", dir / "naive", emb, b.version);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::corrupt, std::string("index manifest: ") + e.what());
  }
  return b;
}

}  // namespace hrag
