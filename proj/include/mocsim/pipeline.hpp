#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mocsim/interpreter.hpp"
#include "mocsim/mcscript.hpp"

namespace mocsim::pipeline {

// ---------------------------------------------------------------------------
// Decomposition

struct Decomposition {
  std::vector<std::string> subtasks;
  std::vector<int> axes;  // sorted, unique
  std::vector<int> inputs;
  std::vector<int> outputs;
};

/// Rule-based splitter: clauses split at ". " and at the word "then"; ids
/// from "axis N", "axes N, M and K", "input N", "output N" (any case).
Decomposition decompose(std::string_view instruction);

using Decomposer = std::function<Decomposition(std::string_view)>;

// ---------------------------------------------------------------------------
// Corpus

enum class ChunkKind { Doc, CodeSample };

struct Chunk {
  std::string id;  // source + "#" + ordinal
  ChunkKind kind = ChunkKind::Doc;
  std::string text;
  std::string source;
  std::vector<std::string> tokens;
};

inline constexpr std::size_t kChunkSize = 1200;
inline constexpr std::size_t kChunkOverlap = 100;

/// Lower-cased alphanumeric runs; digits are kept.
std::vector<std::string> tokenize(std::string_view text);

/// Splits a document on markdown headings, then into windows of at most
/// kChunkSize characters overlapping by kChunkOverlap.
std::vector<Chunk> chunk_document(std::string_view text, const std::string& source);
/// A whole sample file as one chunk.
Chunk chunk_sample(std::string_view text, const std::string& source);

/// Chunk ids use paths relative to `base` when given. Throws IoFailure.
std::vector<Chunk> chunk_corpus(const std::vector<std::filesystem::path>& docs,
                                const std::vector<std::filesystem::path>& samples,
                                const std::filesystem::path& base = {});

/// Docs are *.md and *.txt under docs_dir, samples are *.mcs under
/// samples_dir, both in sorted path order.
std::vector<Chunk> chunk_directories(const std::filesystem::path& docs_dir,
                                     const std::filesystem::path& samples_dir);

// ---------------------------------------------------------------------------
// Retrieval

struct RetrievalConfig {
  std::size_t top_k = 6;
  double bm25_k1 = 1.2;
  double bm25_b = 0.75;
  double k_rrf = 60.0;
  std::size_t candidate_pool = 20;  // per retriever, before fusion
  std::string embedder_id = "hashed-bow-256";
  std::string reranker_id = "identity";
};

struct ScoredChunk {
  std::size_t index = 0;  // into Index::chunks()
  std::string id;
  double score = 0.0;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string id() const = 0;
  virtual std::size_t dimension() const = 0;
  /// Unit-length vector, or all zeros for text without tokens.
  virtual std::vector<float> embed(std::string_view text) const = 0;
};

/// Offline default: FNV-1a hashed bag of words, L2-normalized.
class HashedEmbedder final : public Embedder {
 public:
  static constexpr std::size_t kDimension = 256;
  std::string id() const override { return "hashed-bow-256"; }
  std::size_t dimension() const override { return kDimension; }
  std::vector<float> embed(std::string_view text) const override;
  static std::size_t bucket(std::string_view token);
};

class Reranker {
 public:
  virtual ~Reranker() = default;
  virtual std::string id() const = 0;
  virtual std::vector<ScoredChunk> rerank(std::string_view query, std::vector<ScoredChunk> pool) const = 0;
};

class IdentityReranker final : public Reranker {
 public:
  std::string id() const override { return "identity"; }
  std::vector<ScoredChunk> rerank(std::string_view, std::vector<ScoredChunk> pool) const override { return pool; }
};

/// Immutable after build; safe to share between threads.
class Index {
 public:
  static Index build(std::vector<Chunk> chunks, const RetrievalConfig& cfg = {},
                     const Embedder& embedder = HashedEmbedder{});

  const std::vector<Chunk>& chunks() const { return chunks_; }
  bool empty() const { return chunks_.empty(); }
  const std::string& embedder_id() const { return embedder_id_; }

  /// Okapi BM25, descending score then ascending id; only chunks sharing a
  /// term with the query. Throws EmptyIndex.
  std::vector<ScoredChunk> bm25_search(std::string_view query, std::size_t k) const;
  /// Cosine similarity, positive scores only. Throws EmptyIndex, or
  /// InvalidArgument when `embedder` differs from the one used at build.
  std::vector<ScoredChunk> dense_search(std::string_view query, std::size_t k,
                                        const Embedder& embedder = HashedEmbedder{}) const;

  /// Binary file: header, chunk table, postings, embedding matrix.
  void save(const std::filesystem::path& path) const;
  /// Throws IoFailure or SchemaError.
  static Index load(const std::filesystem::path& path);

 private:
  struct Posting {
    std::uint32_t doc = 0;
    std::uint32_t tf = 0;
  };

  std::vector<Chunk> chunks_;
  std::vector<std::uint32_t> doc_length_;
  double avg_length_ = 0.0;
  double k1_ = 1.2;
  double b_ = 0.75;
  std::map<std::string, std::vector<Posting>, std::less<>> postings_;
  std::string embedder_id_;
  std::size_t dimension_ = 0;
  std::vector<float> embeddings_;  // chunks x dimension, row-major
};

/// Reciprocal-rank fusion, then the reranker, then truncation to top_k.
/// Ties go to the smaller chunk id. Throws BothEmpty.
std::vector<ScoredChunk> fuse_rerank(const std::vector<ScoredChunk>& sparse, const std::vector<ScoredChunk>& dense,
                                     const RetrievalConfig& cfg, std::string_view query = {},
                                     const Reranker& reranker = IdentityReranker{});

/// Sparse and dense search over the candidate pool, fused. Empty when the
/// query matches nothing.
std::vector<ScoredChunk> retrieve(const Index& index, std::string_view query, const RetrievalConfig& cfg);

// ---------------------------------------------------------------------------
// Generation

struct GenerationRequest {
  std::string task_id;
  std::string instruction;
  Decomposition decomposition;
  std::vector<Chunk> chunks;
  std::optional<std::string> prior_error;
  std::optional<std::string> prior_program;
  int attempt = 1;
};

/// Implementations must be safe to call from several threads.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::string name() const = 0;
  /// Raw program text. Throws GeneratorUnavailable or RemoteError.
  virtual std::string generate(const GenerationRequest& request) const = 0;
};

/// Fixture text keyed by task id. A task may script several attempts; the
/// last entry repeats.
class ReplayGenerator final : public Generator {
 public:
  ReplayGenerator() = default;
  explicit ReplayGenerator(std::map<std::string, std::vector<std::string>> scripts) : scripts_(std::move(scripts)) {}

  void add(const std::string& task_id, std::string text) { scripts_[task_id].push_back(std::move(text)); }
  std::string name() const override { return "replay"; }
  std::string generate(const GenerationRequest& request) const override;

 private:
  std::map<std::string, std::vector<std::string>> scripts_;
};

/// Fills point-to-point templates from the instruction wording: target,
/// speed, acceleration, deceleration, profile, jerk ratio, end velocity,
/// waits and output bits.
class TemplateGenerator final : public Generator {
 public:
  std::string name() const override { return "template"; }
  std::string generate(const GenerationRequest& request) const override;
};

struct RemoteConfig {
  std::string url;  // e.g. https://host/v1/chat/completions
  std::string model;
  std::string api_key_env = "MOCSIM_API_KEY";
  std::string prompt_template;  // `{instruction}`, `{chunks}`, `{error}`, `{subtasks}`, `{program}`
  double timeout_s = 60.0;
};

/// Minimal chat-completion client. The key is read from the environment at
/// call time and sent as a bearer token when set.
class RemoteGenerator final : public Generator {
 public:
  explicit RemoteGenerator(RemoteConfig cfg);
  std::string name() const override { return "remote"; }
  std::string generate(const GenerationRequest& request) const override;

 private:
  RemoteConfig cfg_;
};

/// Substitutes the placeholders in a prompt template.
std::string render_prompt(std::string_view prompt_template, const GenerationRequest& request);
std::string default_prompt_template();
/// Code between the first ``` fence pair if present, else the text itself.
std::string extract_code(std::string_view reply);

// ---------------------------------------------------------------------------
// Self-correction loop

struct Task {
  std::string id;
  std::string instruction;
};

enum class FailureStage { None, Generation, Syntax, Validation, Runtime };

struct GenerationAttempt {
  int index = 1;
  std::vector<std::string> retrieved_ids;
  std::optional<std::string> prior_error;
  std::string program_text;
  FailureStage failure = FailureStage::None;
  std::vector<mcscript::Diagnostic> diagnostics;  // parse or validation
  std::optional<engine::RunResult> run;           // present once the program ran
  std::string error;                              // feedback for the next attempt

  bool success() const { return failure == FailureStage::None; }
};

struct LoopConfig {
  int max_retries = 3;
  RetrievalConfig retrieval;
  mcscript::RunOptions run;
  Decomposer decomposer;  // rule-based decompose() when empty
};

struct LoopResult {
  std::vector<GenerationAttempt> history;

  bool success() const { return !history.empty() && history.back().success(); }
  bool first_attempt_passed() const { return !history.empty() && history.front().success(); }
};

/// Generate, preprocess, validate and run; on failure feed the error back
/// into retrieval and the next request, on a fresh engine, at most
/// max_retries times. `index` may be null.
LoopResult self_correct_loop(const Task& task, const Generator& generator, const Index* index, const LoopConfig& cfg);

}  // namespace mocsim::pipeline
