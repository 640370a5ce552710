#pragma once

// Hierarchical navigable small world graph over unit vectors, scored by
// inner product. Optional per-dimension 8-bit scalar quantization of the
// stored vectors.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hrag/embed.hpp"
#include "hrag/error.hpp"
#include "hrag/text.hpp"

namespace hrag {

struct HnswParams {
  std::size_t M = 32;
  std::size_t ef_construction = 200;
  std::size_t ef_search = 50;
  double level_multiplier = 0.0;  // 0 selects 1 / ln(M)
  std::uint64_t seed = 42;
  bool quantized = false;

  double effective_level_multiplier() const {
    return level_multiplier > 0.0 ? level_multiplier : 1.0 / std::log(static_cast<double>(M));
  }

  void validate() const {
    if (M < 2) throw Error(Errc::bad_input, "HNSW requires M >= 2");
    if (ef_construction < M) throw Error(Errc::bad_input, "HNSW requires ef_construction >= M");
    if (ef_search < 1) throw Error(Errc::bad_input, "HNSW requires ef_search >= 1");
  }
};

/// Per-dimension affine 8-bit quantizer: code = round((x - min) / scale).
struct QuantizationSpec {
  static constexpr int kBits = 8;
  std::vector<float> min;
  std::vector<float> scale;

  static QuantizationSpec train(std::span<const float> flat, std::size_t dims) {
    QuantizationSpec q;
    q.min.assign(dims, std::numeric_limits<float>::max());
    std::vector<float> max(dims, std::numeric_limits<float>::lowest());
    const std::size_t n = dims ? flat.size() / dims : 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t d = 0; d < dims; ++d) {
        const float x = flat[i * dims + d];
        q.min[d] = std::min(q.min[d], x);
        max[d] = std::max(max[d], x);
      }
    q.scale.resize(dims);
    for (std::size_t d = 0; d < dims; ++d) {
      if (n == 0) {
        q.min[d] = -1.0f;
        max[d] = 1.0f;
      }
      // Later vectors may fall outside the training range; widen it by a
      // quarter of the span on each side, staying inside the unit interval.
      const float pad = 0.25f * (max[d] - q.min[d]);
      q.min[d] = std::max(q.min[d] - pad, -1.0f);
      max[d] = std::min(max[d] + pad, 1.0f);
      q.scale[d] = std::max((max[d] - q.min[d]) / 255.0f, 1e-12f);
    }
    return q;
  }

  std::uint8_t encode(std::size_t d, float x) const {
    const double c = std::round((static_cast<double>(x) - min[d]) / scale[d]);
    return static_cast<std::uint8_t>(std::clamp(c, 0.0, 255.0));
  }

  float decode(std::size_t d, std::uint8_t c) const { return min[d] + scale[d] * static_cast<float>(c); }
};

struct SearchHit {
  std::string chunk_id;
  double score = 0.0;
  bool operator==(const SearchHit&) const = default;
};

/// Orders by score descending, then chunk_id ascending.
inline bool hit_before(const SearchHit& a, const SearchHit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.chunk_id < b.chunk_id;
}

class DenseIndex {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;
  static constexpr std::size_t kQuantTrainSize = 1024;
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  DenseIndex(std::size_t dims, HnswParams params) : dims_(dims), params_(params), rng_(params.seed) {
    params_.validate();
    if (dims_ == 0) throw Error(Errc::bad_input, "dense index requires dims > 0");
  }

  std::size_t dims() const { return dims_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  bool frozen() const { return frozen_; }
  const HnswParams& params() const { return params_; }
  bool quantized() const { return quant_.has_value(); }
  const std::optional<QuantizationSpec>& quantization() const { return quant_; }

  /// Free-form label persisted with the index (the corpus version).
  const std::string& tag() const { return tag_; }
  void set_tag(std::string t) { tag_ = std::move(t); }

  void insert(const std::string& chunk_id, std::span<const float> vec) {
    if (frozen_) throw Error(Errc::invalid_state, "dense index is frozen");
    if (vec.size() != dims_)
      throw Error(Errc::dimension_mismatch, "vector dims " + std::to_string(vec.size()) + " != index dims " +
                                                std::to_string(dims_));
    if (id_to_node_.contains(chunk_id)) throw Error(Errc::duplicate, "duplicate chunk_id: " + chunk_id);

    const auto node = static_cast<std::uint32_t>(ids_.size());
    ids_.push_back(chunk_id);
    id_to_node_.emplace(chunk_id, node);
    store_vector(vec);

    const int level = draw_level();
    levels_.push_back(level);
    links_.emplace_back(static_cast<std::size_t>(level) + 1);
    parent_.push_back(kNone);
    children_.push_back(0);

    if (entry_ == kNone) {
      entry_ = node;
      max_level_ = level;
      maybe_train_quantizer();
      return;
    }

    const Scorer q(*this, vec);
    std::uint32_t ep = entry_;
    double ep_score = q.score(ep);
    for (int l = max_level_; l > level; --l) greedy_step(q, ep, ep_score, l);

    std::vector<Candidate> eps{{ep_score, ep}};
    for (int l = std::min(level, max_level_); l >= 0; --l) {
      auto found = search_layer(q, eps, params_.ef_construction, l);
      const std::size_t take = std::min(params_.M, found.size());
      auto& mine = links_[node][static_cast<std::size_t>(l)];
      for (std::size_t i = 0; i < take; ++i) mine.push_back(found[i].node);

      if (l == 0) attach_to_tree(node, found);

      for (auto nb : std::vector<std::uint32_t>(mine)) {
        auto& theirs = links_[nb][static_cast<std::size_t>(l)];
        if (std::find(theirs.begin(), theirs.end(), node) == theirs.end()) theirs.push_back(node);
        if (theirs.size() > cap(l)) prune(nb, l);
      }
      eps = std::move(found);
    }
    if (level > max_level_) {
      max_level_ = level;
      entry_ = node;
    }
    maybe_train_quantizer();
  }

  /// Ends the build phase. Trains the quantizer on what is stored if it has
  /// not been trained yet. Searches on a frozen index are thread-safe.
  void freeze() {
    if (params_.quantized && !quant_) train_quantizer();
    frozen_ = true;
  }

  /// Approximate top-k by inner product. The beam width is max(ef_search, k).
  std::vector<SearchHit> search(std::span<const float> query, std::size_t k, std::size_t ef_search) const {
    if (empty()) throw Error(Errc::invalid_state, "search on empty dense index");
    if (query.size() != dims_) throw Error(Errc::dimension_mismatch, "query dims mismatch");
    if (k == 0) throw Error(Errc::bad_input, "k must be >= 1");
    const Scorer q(*this, query);
    std::uint32_t ep = entry_;
    double ep_score = q.score(ep);
    for (int l = max_level_; l > 0; --l) greedy_step(q, ep, ep_score, l);
    const auto found = search_layer(q, {{ep_score, ep}}, std::max(ef_search, k), 0);
    std::vector<SearchHit> out;
    out.reserve(found.size());
    for (const auto& c : found) out.push_back({ids_[c.node], c.score});
    std::sort(out.begin(), out.end(), hit_before);
    if (out.size() > k) out.resize(k);
    return out;
  }

  std::vector<SearchHit> search(std::span<const float> query, std::size_t k) const {
    return search(query, k, params_.ef_search);
  }

  /// Exact top-k over every stored vector, ties by ascending chunk_id.
  std::vector<SearchHit> brute_force_search(std::span<const float> query, std::size_t k) const {
    if (query.size() != dims_) throw Error(Errc::dimension_mismatch, "query dims mismatch");
    const Scorer q(*this, query);
    std::vector<SearchHit> all;
    all.reserve(size());
    for (std::uint32_t i = 0; i < size(); ++i) all.push_back({ids_[i], q.score(i)});
    const auto kk = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(kk), all.end(), hit_before);
    all.resize(kk);
    return all;
  }

  /// Stored vector as used for scoring (dequantized when quantized).
  EmbeddingVector vector_of(std::uint32_t node) const {
    EmbeddingVector v(dims_);
    for (std::size_t d = 0; d < dims_; ++d) v[d] = component(node, d);
    return v;
  }

  std::optional<std::uint32_t> node_of(const std::string& chunk_id) const {
    auto it = id_to_node_.find(chunk_id);
    if (it == id_to_node_.end()) return std::nullopt;
    return it->second;
  }
  const std::string& chunk_id_of(std::uint32_t node) const { return ids_.at(node); }
  std::uint32_t entry_point() const { return entry_; }
  int max_level() const { return max_level_; }
  int level_of(std::uint32_t node) const { return levels_.at(node); }
  const std::vector<std::uint32_t>& neighbors(std::uint32_t node, int level) const {
    return links_.at(node).at(static_cast<std::size_t>(level));
  }
  std::size_t cap(int level) const { return level == 0 ? 2 * params_.M : params_.M; }

  // ------------------------------------------------------------ persistence

  /// Layout (little-endian): "HNSW", version u32, dims u32, M u32,
  /// ef_construction u32, ef_search u32, level_multiplier f64, seed u64,
  /// quantized u8, trained u8, [min f32 x dims, scale f32 x dims], count u64,
  /// checksum u64 (FNV-1a of every other byte), then the payload: tag,
  /// entry, max level, and per node id / level / tree parent / vector /
  /// adjacency. A restored index is frozen.
  std::string serialize() const {
    ByteWriter head;
    head.bytes("HNSW");
    head.u32(kFormatVersion);
    head.u32(static_cast<std::uint32_t>(dims_));
    head.u32(static_cast<std::uint32_t>(params_.M));
    head.u32(static_cast<std::uint32_t>(params_.ef_construction));
    head.u32(static_cast<std::uint32_t>(params_.ef_search));
    head.f64(params_.level_multiplier);
    head.u64(params_.seed);
    head.u8(params_.quantized ? 1 : 0);
    head.u8(quant_ ? 1 : 0);
    if (quant_) {
      for (float x : quant_->min) head.f32(x);
      for (float x : quant_->scale) head.f32(x);
    }
    head.u64(size());

    ByteWriter body;
    body.str(tag_);
    body.u32(entry_);
    body.u32(static_cast<std::uint32_t>(max_level_));
    for (std::uint32_t i = 0; i < size(); ++i) {
      body.str(ids_[i]);
      body.u32(static_cast<std::uint32_t>(levels_[i]));
      body.u32(parent_[i]);
      if (quant_) {
        body.bytes(std::string_view(reinterpret_cast<const char*>(&codes_[i * dims_]), dims_));
      } else {
        for (std::size_t d = 0; d < dims_; ++d) body.f32(floats_[i * dims_ + d]);
      }
      for (const auto& lvl : links_[i]) {
        body.u32(static_cast<std::uint32_t>(lvl.size()));
        for (auto nb : lvl) body.u32(nb);
      }
    }
    const std::uint64_t checksum = fnv1a64(body.out, fnv1a64(head.out));
    ByteWriter tail;
    tail.u64(checksum);
    return head.out + tail.out + body.out;
  }

  static DenseIndex deserialize(std::string_view data) {
    ByteReader r(data);
    if (r.bytes(4) != "HNSW") throw Error(Errc::corrupt, "dense index: bad magic");
    const auto version = r.u32();
    if (version != kFormatVersion)
      throw Error(Errc::version_mismatch, "dense index format version " + std::to_string(version) +
                                              " unsupported (expected " + std::to_string(kFormatVersion) + ")");
    const auto dims = r.u32();
    HnswParams p;
    p.M = r.u32();
    p.ef_construction = r.u32();
    p.ef_search = r.u32();
    p.level_multiplier = r.f64();
    p.seed = r.u64();
    p.quantized = r.u8() != 0;
    const bool trained = r.u8() != 0;
    if (dims == 0 || dims > (1u << 20)) throw Error(Errc::corrupt, "dense index: implausible dims");
    std::optional<QuantizationSpec> q;
    if (trained) {
      q.emplace();
      q->min.resize(dims);
      q->scale.resize(dims);
      for (auto& x : q->min) x = r.f32();
      for (auto& x : q->scale) x = r.f32();
    }
    const auto count = r.u64();
    const std::size_t head_end = r.pos();
    const auto checksum = r.u64();
    const std::size_t body_start = r.pos();
    if (fnv1a64(data.substr(body_start), fnv1a64(data.substr(0, head_end))) != checksum)
      throw Error(Errc::corrupt, "dense index: checksum mismatch");

    try {
      p.validate();
    } catch (const Error&) {
      throw Error(Errc::corrupt, "dense index: invalid parameters");
    }
    DenseIndex idx(dims, p);
    idx.quant_ = std::move(q);
    idx.tag_ = r.str();
    idx.entry_ = r.u32();
    idx.max_level_ = static_cast<int>(r.u32());
    for (std::uint64_t i = 0; i < count; ++i) {
      auto id = r.str();
      idx.id_to_node_.emplace(id, static_cast<std::uint32_t>(i));
      idx.ids_.push_back(std::move(id));
      const auto level = r.u32();
      if (level > 64) throw Error(Errc::corrupt, "dense index: implausible level");
      idx.levels_.push_back(static_cast<int>(level));
      idx.parent_.push_back(r.u32());
      if (trained) {
        const auto raw = r.bytes(dims);
        idx.codes_.insert(idx.codes_.end(), raw.begin(), raw.end());
      } else {
        for (std::size_t d = 0; d < dims; ++d) idx.floats_.push_back(r.f32());
      }
      auto& lv = idx.links_.emplace_back(level + 1);
      for (auto& nbs : lv) {
        const auto n = r.u32();
        nbs.reserve(n);
        for (std::uint32_t k = 0; k < n; ++k) nbs.push_back(r.u32());
      }
    }
    if (!r.done()) throw Error(Errc::corrupt, "dense index: trailing bytes");
    idx.children_.assign(count, 0);
    for (auto par : idx.parent_)
      if (par != kNone) ++idx.children_.at(par);
    idx.frozen_ = true;
    return idx;
  }

  void persist(const std::filesystem::path& path) const { write_file_atomic(path, serialize()); }
  static DenseIndex restore(const std::filesystem::path& path) { return deserialize(read_file(path)); }

  // ------------------------------------------------------------ invariants

  /// Empty when the graph invariants hold; otherwise one message per violation.
  std::vector<std::string> check_invariants() const {
    std::vector<std::string> bad;
    if (id_to_node_.size() != ids_.size()) bad.push_back("id map size differs from node count");
    for (std::uint32_t i = 0; i < size(); ++i) {
      auto it = id_to_node_.find(ids_[i]);
      if (it == id_to_node_.end() || it->second != i) bad.push_back("id map not bijective at node " + std::to_string(i));
      for (int l = 0; l <= levels_[i]; ++l) {
        const auto& nbs = links_[i][static_cast<std::size_t>(l)];
        if (nbs.size() > cap(l))
          bad.push_back("node " + std::to_string(i) + " exceeds degree cap at level " + std::to_string(l));
        for (auto nb : nbs)
          if (nb >= size() || levels_[nb] < l) bad.push_back("dangling edge at node " + std::to_string(i));
      }
    }
    if (!empty()) {
      std::vector<char> seen(size(), 0);
      std::vector<std::uint32_t> stack{entry_};
      seen[entry_] = 1;
      std::size_t reached = 1;
      while (!stack.empty()) {
        const auto cur = stack.back();
        stack.pop_back();
        for (auto nb : links_[cur][0])
          if (nb < size() && !seen[nb]) {
            seen[nb] = 1;
            ++reached;
            stack.push_back(nb);
          }
      }
      if (reached != size())
        bad.push_back(std::to_string(size() - reached) + " nodes unreachable from the entry point at level 0");
    }
    return bad;
  }

 private:
  struct Candidate {
    double score;
    std::uint32_t node;
  };

  // Per-query scoring. For quantized storage dot(q, min + scale * code) is
  // split into a constant term plus a scaled code dot product.
  class Scorer {
   public:
    Scorer(const DenseIndex& idx, std::span<const float> q) : idx_(idx), q_(q.begin(), q.end()) {
      if (idx.quant_) {
        const auto& qs = *idx.quant_;
        weighted_.resize(q_.size());
        for (std::size_t d = 0; d < q_.size(); ++d) {
          offset_ += static_cast<double>(q_[d]) * qs.min[d];
          weighted_[d] = static_cast<double>(q_[d]) * qs.scale[d];
        }
      }
    }

    double score(std::uint32_t node) const {
      const std::size_t dims = idx_.dims_;
      double s = 0.0;
      if (idx_.quant_) {
        const std::uint8_t* c = &idx_.codes_[node * dims];
        for (std::size_t d = 0; d < dims; ++d) s += weighted_[d] * c[d];
        return s + offset_;
      }
      const float* v = &idx_.floats_[node * dims];
      for (std::size_t d = 0; d < dims; ++d) s += static_cast<double>(q_[d]) * v[d];
      return s;
    }

   private:
    const DenseIndex& idx_;
    std::vector<float> q_;
    std::vector<double> weighted_;
    double offset_ = 0.0;
  };

  float component(std::uint32_t node, std::size_t d) const {
    if (quant_) return quant_->decode(d, codes_[node * dims_ + d]);
    return floats_[node * dims_ + d];
  }

  void store_vector(std::span<const float> vec) {
    if (quant_) {
      for (std::size_t d = 0; d < dims_; ++d) codes_.push_back(quant_->encode(d, vec[d]));
    } else {
      floats_.insert(floats_.end(), vec.begin(), vec.end());
    }
  }

  void maybe_train_quantizer() {
    if (params_.quantized && !quant_ && size() >= kQuantTrainSize) train_quantizer();
  }

  void train_quantizer() {
    quant_ = QuantizationSpec::train(floats_, dims_);
    codes_.clear();
    codes_.reserve(floats_.size());
    for (std::size_t i = 0; i < floats_.size(); ++i) codes_.push_back(quant_->encode(i % dims_, floats_[i]));
    floats_.clear();
    floats_.shrink_to_fit();
  }

  // Bit-exact uniform in (0, 1) independent of the standard library.
  int draw_level() {
    const double u = (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
    return static_cast<int>(std::floor(-std::log(u) * params_.effective_level_multiplier()));
  }

  void greedy_step(const Scorer& q, std::uint32_t& ep, double& ep_score, int level) const {
    for (bool changed = true; changed;) {
      changed = false;
      for (auto nb : links_[ep][static_cast<std::size_t>(level)]) {
        const double s = q.score(nb);
        if (s > ep_score || (s == ep_score && nb < ep)) {
          ep_score = s;
          ep = nb;
          changed = true;
        }
      }
    }
  }

  // Beam search on one layer; result sorted by score descending.
  std::vector<Candidate> search_layer(const Scorer& q, const std::vector<Candidate>& entry_points, std::size_t ef,
                                      int level) const {
    auto better = [](const Candidate& a, const Candidate& b) {
      return a.score != b.score ? a.score > b.score : a.node < b.node;
    };
    auto worse = [&](const Candidate& a, const Candidate& b) { return better(b, a); };
    // frontier: best on top. results: worst on top.
    std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse)> frontier(worse);
    std::priority_queue<Candidate, std::vector<Candidate>, decltype(better)> results(better);
    std::vector<char> visited(size(), 0);
    for (const auto& c : entry_points) {
      if (visited[c.node]) continue;
      visited[c.node] = 1;
      frontier.push(c);
      results.push(c);
      if (results.size() > ef) results.pop();
    }
    while (!frontier.empty()) {
      const auto cur = frontier.top();
      frontier.pop();
      if (results.size() >= ef && better(results.top(), cur)) break;
      for (auto nb : links_[cur.node][static_cast<std::size_t>(level)]) {
        if (visited[nb]) continue;
        visited[nb] = 1;
        const Candidate c{q.score(nb), nb};
        if (results.size() < ef || better(c, results.top())) {
          frontier.push(c);
          results.push(c);
          if (results.size() > ef) results.pop();
        }
      }
    }
    std::vector<Candidate> out;
    out.reserve(results.size());
    while (!results.empty()) {
      out.push_back(results.top());
      results.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

  bool tree_edge(std::uint32_t a, std::uint32_t b) const { return parent_[a] == b || parent_[b] == a; }

  // Level-0 reachability: every node hangs off a parent through a
  // bidirectional edge that pruning never removes. Parents take at most M-1
  // children so protected edges stay well under the 2M cap.
  void attach_to_tree(std::uint32_t node, const std::vector<Candidate>& found) {
    auto eligible = [&](std::uint32_t p) { return p != node && children_[p] + 1 < params_.M; };
    std::uint32_t parent = kNone;
    for (const auto& c : found)
      if (eligible(c.node)) {
        parent = c.node;
        break;
      }
    if (parent == kNone) {
      const Scorer q(*this, vector_of(node));
      double best = -std::numeric_limits<double>::infinity();
      for (std::uint32_t i = 0; i < node; ++i)
        if (eligible(i)) {
          const double s = q.score(i);
          if (s > best) {
            best = s;
            parent = i;
          }
        }
    }
    parent_[node] = parent;
    ++children_[parent];
    auto& mine = links_[node][0];
    if (std::find(mine.begin(), mine.end(), parent) == mine.end()) mine.push_back(parent);
  }

  // Drops the farthest unprotected neighbours until the list fits its cap.
  void prune(std::uint32_t node, int level) {
    auto& nbs = links_[node][static_cast<std::size_t>(level)];
    const Scorer q(*this, vector_of(node));
    std::vector<Candidate> scored;
    scored.reserve(nbs.size());
    for (auto nb : nbs) scored.push_back({q.score(nb), nb});
    std::sort(scored.begin(), scored.end(), [](const Candidate& a, const Candidate& b) {
      return a.score != b.score ? a.score > b.score : a.node < b.node;
    });
    std::size_t excess = scored.size() - cap(level);
    for (std::size_t i = scored.size(); i-- > 0 && excess > 0;) {
      if (level == 0 && tree_edge(node, scored[i].node)) continue;
      scored.erase(scored.begin() + static_cast<std::ptrdiff_t>(i));
      --excess;
    }
    nbs.clear();
    for (const auto& c : scored) nbs.push_back(c.node);
  }

  struct ByteWriter {
    std::string out;
    void u8(std::uint8_t v) { out.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
      for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void u64(std::uint64_t v) {
      for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void bytes(std::string_view s) { out.append(s); }
    void str(std::string_view s) {
      u32(static_cast<std::uint32_t>(s.size()));
      out.append(s);
    }
  };

  struct ByteReader {
    std::string_view data;
    std::size_t off = 0;
    explicit ByteReader(std::string_view d) : data(d) {}
    std::string_view bytes(std::size_t n) {
      if (data.size() - off < n) throw Error(Errc::corrupt, "dense index: truncated file");
      auto s = data.substr(off, n);
      off += n;
      return s;
    }
    std::uint64_t le(int n) {
      const auto s = bytes(static_cast<std::size_t>(n));
      std::uint64_t v = 0;
      for (int i = n - 1; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[static_cast<std::size_t>(i)]);
      return v;
    }
    std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    float f32() { return std::bit_cast<float>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() { return std::string(bytes(u32())); }
    std::size_t pos() const { return off; }
    bool done() const { return off == data.size(); }
  };

  std::size_t dims_;
  HnswParams params_;
  std::mt19937_64 rng_;
  std::string tag_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::uint32_t> id_to_node_;
  std::vector<float> floats_;
  std::vector<std::uint8_t> codes_;
  std::optional<QuantizationSpec> quant_;
  std::vector<int> levels_;
  std::vector<std::vector<std::vector<std::uint32_t>>> links_;
  std::vector<std::uint32_t> parent_;
  std::vector<std::size_t> children_;
  std::uint32_t entry_ = kNone;
  int max_level_ = -1;
  bool frozen_ = false;
};

}  // namespace hrag
