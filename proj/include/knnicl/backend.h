#ifndef KNNICL_BACKEND_H_
#define KNNICL_BACKEND_H_

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "knnicl/digest.h"
#include "knnicl/features.h"
#include "knnicl/prompting.h"
#include "knnicl/rng.h"
#include "knnicl/types.h"

namespace knnicl {

// Failure taxonomy for retried operations: transient failures are retried,
// permanent ones propagate immediately.
struct TransientFailure : RuntimeFailure {
  using RuntimeFailure::RuntimeFailure;
};
struct PermanentFailure : RuntimeFailure {
  using RuntimeFailure::RuntimeFailure;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{1000};
  double multiplier = 2.0;
};

using SleepFn = std::function<void(std::chrono::milliseconds)>;

SleepFn real_sleep();

// Runs `op`, retrying TransientFailure up to max_attempts with full-jitter
// exponential backoff: the n-th retry waits U(0, base * multiplier^(n-1)),
// drawn from a seeded generator so schedules are reproducible in tests.
template <typename F>
auto with_backoff(const RetryPolicy& policy, std::uint64_t seed, F&& op,
                  const SleepFn& sleep) -> decltype(op()) {
  if (policy.max_attempts < 1) {
    throw ValidationError("retry policy needs max_attempts >= 1");
  }
  Rng rng(derive_seed(seed, "backoff"));
  std::string last_error;
  for (int attempt = 0; attempt < policy.max_attempts; ++attempt) {
    if (attempt > 0) {
      const double cap = static_cast<double>(policy.base_delay.count()) *
                         std::pow(policy.multiplier, attempt - 1);
      sleep(std::chrono::milliseconds(
          static_cast<std::int64_t>(rng.next_double() * cap)));
    }
    try {
      return op();
    } catch (const TransientFailure& e) {
      last_error = e.what();
    }
  }
  throw RuntimeFailure("retries exhausted after " +
                       std::to_string(policy.max_attempts) +
                       " attempts; last error: " + last_error);
}

// Minimal HTTP seam so the remote path is testable with a fake transport.
struct HttpResponse {
  int status = 0;
  std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  // Throws TransientFailure on connection-level errors.
  virtual HttpResponse post(const std::string& url, const HttpHeaders& headers,
                            const std::string& body) = 0;
};

// Real transport backed by an HTTP client library; constructed lazily so
// deterministic runs never touch the network stack.
std::shared_ptr<HttpTransport> make_default_transport();

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual std::string complete(const PromptBundle& bundle) = 0;
  virtual std::string id() const = 0;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual Embedding embed(const std::string& text) = 0;
  // Model identifier; part of the cache key.
  virtual std::string id() const = 0;
};

// Always answers with the configured string.
class FixedResponseBackend : public CompletionBackend {
 public:
  explicit FixedResponseBackend(std::string response)
      : response_(std::move(response)) {}
  std::string complete(const PromptBundle& bundle) override;
  std::string id() const override { return "fixed:" + response_; }

 private:
  std::string response_;
};

// Emits the label of the bundle's highest-scoring shot (first in shot order
// on exact score ties). Reads the structured side-channel, not the text, so
// it stays correct under prompt template changes.
class NearestShotOracle : public CompletionBackend {
 public:
  std::string complete(const PromptBundle& bundle) override;
  std::string id() const override { return "nearest_shot_oracle"; }
};

// Emits the majority label among the shots; ties go to the nearest shot's
// class.
class MajorityOracle : public CompletionBackend {
 public:
  std::string complete(const PromptBundle& bundle) override;
  std::string id() const override { return "majority_oracle"; }
};

struct RemoteConfig {
  std::string endpoint;  // full URL, e.g. https://host/v1/chat/completions
  std::string model_id;
  double temperature = 0.2;
  int max_concurrent = 4;
  RetryPolicy retry;
  std::string credential_env = "KNNICL_API_KEY";
  std::uint64_t seed = 0;  // drives backoff jitter
};

// Chat-completion-style JSON client: sends the rendered prompt as a single
// user message, returns the first choice's content verbatim. HTTP 429 and
// 5xx count as transient; other non-2xx codes are permanent.
class RemoteCompletionBackend : public CompletionBackend {
 public:
  RemoteCompletionBackend(RemoteConfig config,
                          std::shared_ptr<HttpTransport> transport,
                          SleepFn sleep);
  ~RemoteCompletionBackend() override;  // gate type is private to backend.cc
  std::string complete(const PromptBundle& bundle) override;
  std::string id() const override { return config_.model_id; }

 private:
  RemoteConfig config_;
  std::string credential_;
  std::shared_ptr<HttpTransport> transport_;
  SleepFn sleep_;
  std::unique_ptr<class ConcurrencyGate> gate_;
  std::mutex request_mutex_;
  std::uint64_t request_counter_ = 0;
};

// Parses the text as whitespace-separated coordinates. Pairs with the
// synthetic generator, whose descriptions serialize ground-truth vectors.
class CoordinateEmbedder : public Embedder {
 public:
  Embedding embed(const std::string& text) override;
  std::string id() const override { return "coordinate"; }
};

// Deterministic local embedder: feature-hashes lowercase alphanumeric tokens
// into `dim` buckets with hash-derived signs, then L2-normalizes.
class HashingEmbedder : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dim);
  Embedding embed(const std::string& text) override;
  std::string id() const override;

 private:
  std::size_t dim_;
};

// Embedding-API JSON client; same retry/credential scheme as completions.
class RemoteEmbedder : public Embedder {
 public:
  RemoteEmbedder(RemoteConfig config, std::shared_ptr<HttpTransport> transport,
                 SleepFn sleep);
  Embedding embed(const std::string& text) override;
  std::string id() const override { return config_.model_id; }

 private:
  RemoteConfig config_;
  std::string credential_;
  std::shared_ptr<HttpTransport> transport_;
  SleepFn sleep_;
  std::mutex request_mutex_;
  std::uint64_t request_counter_ = 0;
};

// On-disk embedding store: append-only records of (key digest, dimension,
// timestamp, little-endian doubles) followed by an index footer. A missing
// or stale footer degrades to a sequential scan, so interrupted writers lose
// nothing but the index.
class EmbeddingDiskCache {
 public:
  explicit EmbeddingDiskCache(std::filesystem::path path);
  ~EmbeddingDiskCache();
  EmbeddingDiskCache(const EmbeddingDiskCache&) = delete;
  EmbeddingDiskCache& operator=(const EmbeddingDiskCache&) = delete;

  std::optional<std::vector<double>> get(const Sha256& key) const;
  void put(const Sha256& key, const std::vector<double>& values);
  void flush();  // writes the index footer
  std::size_t size() const { return entries_.size(); }

 private:
  std::filesystem::path path_;
  std::map<Sha256, std::vector<double>> entries_;
  std::uint64_t records_end_ = 0;
  bool footer_dirty_ = false;
};

struct EmbedderStats {
  std::size_t computed = 0;     // inner embedder calls
  std::size_t memory_hits = 0;  // served from the LRU
  std::size_t disk_hits = 0;    // served from the persistent store
};

// LRU-over-disk decorator. Keys are SHA-256 of (model id NUL text); the inner
// embedder runs only on a full miss. Reads and writes are serialized by one
// mutex, which meets the "concurrent readers, serialized writers" contract
// at desk scale.
class CachingEmbedder : public Embedder {
 public:
  CachingEmbedder(std::shared_ptr<Embedder> inner, std::size_t lru_capacity,
                  std::optional<std::filesystem::path> disk_path);
  Embedding embed(const std::string& text) override;
  std::string id() const override { return inner_->id(); }
  EmbedderStats stats() const;
  void flush();

 private:
  std::shared_ptr<Embedder> inner_;
  std::size_t capacity_;
  std::unique_ptr<EmbeddingDiskCache> disk_;
  mutable std::mutex mutex_;
  std::list<std::pair<Sha256, std::vector<double>>> lru_;
  std::map<Sha256, decltype(lru_)::iterator> index_;
  EmbedderStats stats_;
};

enum class BackendKind {
  kRemote,
  kNearestShotOracle,
  kMajorityOracle,
  kFixedResponse
};
enum class EmbedderKind { kRemote, kHashing, kCoordinate };

struct BackendConfig {
  BackendKind kind = BackendKind::kNearestShotOracle;
  std::string endpoint;
  std::string model_id;
  double temperature = 0.2;
  int max_concurrent = 4;
  RetryPolicy retry;
  std::string fixed_response = "SUCCESS";
  std::string credential_env = "KNNICL_API_KEY";
};

struct EmbedderConfig {
  EmbedderKind kind = EmbedderKind::kCoordinate;
  std::string endpoint;
  std::string model_id;
  std::size_t hash_dim = 64;
  std::size_t lru_capacity = 4096;
  std::optional<std::filesystem::path> cache_path;
  RetryPolicy retry;
  std::string credential_env = "KNNICL_API_KEY";
};

// Factories used by the CLI. `transport`/`sleep` default to the real ones;
// tests inject fakes. Remote kinds validate credentials eagerly.
std::shared_ptr<CompletionBackend> make_backend(
    const BackendConfig& config, std::uint64_t seed,
    std::shared_ptr<HttpTransport> transport = nullptr,
    SleepFn sleep = nullptr);
std::shared_ptr<Embedder> make_embedder(
    const EmbedderConfig& config, std::uint64_t seed,
    std::shared_ptr<HttpTransport> transport = nullptr,
    SleepFn sleep = nullptr);

}  // namespace knnicl

#endif  // KNNICL_BACKEND_H_
