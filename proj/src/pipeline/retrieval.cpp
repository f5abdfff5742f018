#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <unordered_map>

#include "mocsim/error.hpp"
#include "mocsim/pipeline.hpp"

namespace mocsim::pipeline {
namespace {

constexpr char kMagic[8] = {'M', 'O', 'C', 'S', 'I', 'M', 'I', 'X'};
constexpr std::uint32_t kVersion = 1;

void rank(std::vector<ScoredChunk>& hits, std::size_t k) {
  std::sort(hits.begin(), hits.end(), [](const ScoredChunk& a, const ScoredChunk& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  if (hits.size() > k) hits.resize(k);
}

class Writer {
 public:
  explicit Writer(std::ofstream& out) : out_(out) {}
  template <typename T>
  void pod(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void str(const std::string& s) {
    pod(static_cast<std::uint64_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  std::ofstream& out_;
};

class Reader {
 public:
  Reader(std::string data, std::string path) : data_(std::move(data)), path_(std::move(path)) {}
  template <typename T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof v);
    pos_ += sizeof v;
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint64_t>();
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }
  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::SchemaError, path_ + ": malformed index (" + why + ")");
  }

 private:
  void need(std::uint64_t n) const {
    if (n > data_.size() - pos_) fail("truncated");
  }
  std::string data_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

std::size_t HashedEmbedder::bucket(std::string_view token) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : token) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h % kDimension);
}

std::vector<float> HashedEmbedder::embed(std::string_view text) const {
  std::vector<double> counts(kDimension, 0.0);
  for (const auto& t : tokenize(text)) counts[bucket(t)] += 1.0;
  double norm = 0.0;
  for (double c : counts) norm += c * c;
  std::vector<float> out(kDimension, 0.0f);
  if (norm == 0.0) return out;
  norm = std::sqrt(norm);
  for (std::size_t i = 0; i < kDimension; ++i) out[i] = static_cast<float>(counts[i] / norm);
  return out;
}

Index Index::build(std::vector<Chunk> chunks, const RetrievalConfig& cfg, const Embedder& embedder) {
  Index ix;
  ix.k1_ = cfg.bm25_k1;
  ix.b_ = cfg.bm25_b;
  ix.embedder_id_ = embedder.id();
  ix.dimension_ = embedder.dimension();
  ix.chunks_ = std::move(chunks);
  double total = 0.0;
  for (std::size_t d = 0; d < ix.chunks_.size(); ++d) {
    auto& c = ix.chunks_[d];
    if (c.tokens.empty()) c.tokens = tokenize(c.text);
    std::map<std::string_view, std::uint32_t> tf;
    for (const auto& t : c.tokens) ++tf[t];
    for (const auto& [term, n] : tf) ix.postings_[std::string(term)].push_back({static_cast<std::uint32_t>(d), n});
    ix.doc_length_.push_back(static_cast<std::uint32_t>(c.tokens.size()));
    total += static_cast<double>(c.tokens.size());
    const auto v = embedder.embed(c.text);
    if (v.size() != ix.dimension_) throw Error(ErrorCode::InvalidArgument, "embedder returned a vector of wrong size");
    ix.embeddings_.insert(ix.embeddings_.end(), v.begin(), v.end());
  }
  ix.avg_length_ = ix.chunks_.empty() ? 0.0 : total / static_cast<double>(ix.chunks_.size());
  return ix;
}

std::vector<ScoredChunk> Index::bm25_search(std::string_view query, std::size_t k) const {
  if (chunks_.empty()) throw Error(ErrorCode::EmptyIndex, "index has no chunks");
  const auto terms = tokenize(query);
  const std::set<std::string> unique(terms.begin(), terms.end());
  const double n = static_cast<double>(chunks_.size());
  std::unordered_map<std::uint32_t, double> score;
  for (const auto& term : unique) {
    const auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double df = static_cast<double>(it->second.size());
    const double idf = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
    for (const auto& p : it->second) {
      const double tf = p.tf;
      const double norm = avg_length_ > 0 ? doc_length_[p.doc] / avg_length_ : 0.0;
      score[p.doc] += idf * tf * (k1_ + 1.0) / (tf + k1_ * (1.0 - b_ + b_ * norm));
    }
  }
  std::vector<ScoredChunk> hits;
  for (const auto& [doc, s] : score)
    if (s > 0.0) hits.push_back({doc, chunks_[doc].id, s});
  rank(hits, k);
  return hits;
}

std::vector<ScoredChunk> Index::dense_search(std::string_view query, std::size_t k, const Embedder& embedder) const {
  if (chunks_.empty()) throw Error(ErrorCode::EmptyIndex, "index has no chunks");
  if (embedder.id() != embedder_id_ || embedder.dimension() != dimension_)
    throw Error(ErrorCode::InvalidArgument,
                "index was built with embedder " + embedder_id_ + ", not " + embedder.id());
  const auto q = embedder.embed(query);
  std::vector<ScoredChunk> hits;
  for (std::size_t d = 0; d < chunks_.size(); ++d) {
    double dot = 0.0;
    const float* row = embeddings_.data() + d * dimension_;
    for (std::size_t i = 0; i < dimension_; ++i) dot += static_cast<double>(row[i]) * q[i];
    if (dot > 0.0) hits.push_back({d, chunks_[d].id, dot});
  }
  rank(hits, k);
  return hits;
}

void Index::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  Writer w(out);
  out.write(kMagic, sizeof kMagic);
  w.pod(kVersion);
  w.pod(k1_);
  w.pod(b_);
  w.str(embedder_id_);
  w.pod(static_cast<std::uint64_t>(dimension_));
  w.pod(static_cast<std::uint64_t>(chunks_.size()));
  for (const auto& c : chunks_) {
    w.str(c.id);
    w.pod(static_cast<std::uint8_t>(c.kind));
    w.str(c.source);
    w.str(c.text);
  }
  w.pod(static_cast<std::uint64_t>(postings_.size()));
  for (const auto& [term, list] : postings_) {
    w.str(term);
    w.pod(static_cast<std::uint64_t>(list.size()));
    for (const auto& p : list) {
      w.pod(p.doc);
      w.pod(p.tf);
    }
  }
  w.pod(static_cast<std::uint64_t>(embeddings_.size()));
  for (float f : embeddings_) w.pod(f);
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

Index Index::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(std::move(data), path.string());

  for (char m : kMagic)
    if (r.pod<char>() != m) r.fail("bad magic");
  if (const auto v = r.pod<std::uint32_t>(); v != kVersion) r.fail("unsupported version " + std::to_string(v));

  Index ix;
  ix.k1_ = r.pod<double>();
  ix.b_ = r.pod<double>();
  ix.embedder_id_ = r.str();
  ix.dimension_ = r.pod<std::uint64_t>();
  const auto n = r.pod<std::uint64_t>();
  double total = 0.0;
  for (std::uint64_t d = 0; d < n; ++d) {
    Chunk c;
    c.id = r.str();
    const auto kind = r.pod<std::uint8_t>();
    if (kind > 1) r.fail("bad chunk kind");
    c.kind = static_cast<ChunkKind>(kind);
    c.source = r.str();
    c.text = r.str();
    c.tokens = tokenize(c.text);
    ix.doc_length_.push_back(static_cast<std::uint32_t>(c.tokens.size()));
    total += static_cast<double>(c.tokens.size());
    ix.chunks_.push_back(std::move(c));
  }
  ix.avg_length_ = n ? total / static_cast<double>(n) : 0.0;
  const auto terms = r.pod<std::uint64_t>();
  for (std::uint64_t t = 0; t < terms; ++t) {
    auto& list = ix.postings_[r.str()];
    const auto m = r.pod<std::uint64_t>();
    for (std::uint64_t i = 0; i < m; ++i) {
      Posting p;
      p.doc = r.pod<std::uint32_t>();
      p.tf = r.pod<std::uint32_t>();
      if (p.doc >= n || p.tf == 0) r.fail("bad posting");
      list.push_back(p);
    }
  }
  const auto floats = r.pod<std::uint64_t>();
  if (floats != n * ix.dimension_) r.fail("embedding matrix size");
  ix.embeddings_.reserve(floats);
  for (std::uint64_t i = 0; i < floats; ++i) ix.embeddings_.push_back(r.pod<float>());
  if (!r.done()) r.fail("trailing bytes");
  return ix;
}

std::vector<ScoredChunk> fuse_rerank(const std::vector<ScoredChunk>& sparse, const std::vector<ScoredChunk>& dense,
                                     const RetrievalConfig& cfg, std::string_view query, const Reranker& reranker) {
  if (cfg.top_k < 1) throw Error(ErrorCode::InvalidArgument, "top_k must be at least 1");
  if (sparse.empty() && dense.empty()) throw Error(ErrorCode::BothEmpty, "both retrieval lists are empty");
  std::map<std::string, ScoredChunk> fused;
  for (const auto* list : {&sparse, &dense}) {
    for (std::size_t r = 0; r < list->size(); ++r) {
      const auto& hit = (*list)[r];
      auto [it, fresh] = fused.try_emplace(hit.id, ScoredChunk{hit.index, hit.id, 0.0});
      it->second.score += 1.0 / (cfg.k_rrf + static_cast<double>(r + 1));
    }
  }
  std::vector<ScoredChunk> pool;
  for (auto& [id, hit] : fused) pool.push_back(std::move(hit));
  rank(pool, pool.size());
  pool = reranker.rerank(query, std::move(pool));
  if (pool.size() > cfg.top_k) pool.resize(cfg.top_k);
  return pool;
}

std::vector<ScoredChunk> retrieve(const Index& index, std::string_view query, const RetrievalConfig& cfg) {
  const auto sparse = index.bm25_search(query, cfg.candidate_pool);
  const auto dense = index.dense_search(query, cfg.candidate_pool);
  if (sparse.empty() && dense.empty()) return {};
  return fuse_rerank(sparse, dense, cfg, query);
}

}  // namespace mocsim::pipeline
