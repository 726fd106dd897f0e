#include "knnicl/backend.h"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <semaphore>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "knnicl/dataset.h"

namespace knnicl {
namespace {

using nlohmann::json;

// Splits a full URL into (scheme://host[:port], path).
std::pair<std::string, std::string> split_url(const std::string& url) {
  std::size_t scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw ValidationError("endpoint \"" + url +
                          "\" is not a URL (missing scheme)");
  }
  std::size_t path = url.find('/', scheme + 3);
  if (path == std::string::npos) return {url, "/"};
  return {url.substr(0, path), url.substr(path)};
}

std::string read_credential(const std::string& env_name) {
  if (env_name.empty()) {
    throw ValidationError("remote backend needs a credential_env name");
  }
  const char* value = std::getenv(env_name.c_str());
  if (value == nullptr || *value == '\0') {
    throw ValidationError("environment variable " + env_name +
                          " is not set; remote backends need a credential");
  }
  return value;
}

// Classifies an HTTP status: rate limits and server errors are worth
// retrying, other non-2xx responses are not.
std::string check_http(const HttpResponse& response, const std::string& what) {
  if (response.status == 429 || response.status >= 500) {
    throw TransientFailure(what + " returned HTTP " +
                           std::to_string(response.status));
  }
  if (response.status < 200 || response.status >= 300) {
    throw PermanentFailure(what + " returned HTTP " +
                           std::to_string(response.status) + ": " +
                           response.body.substr(0, 200));
  }
  return response.body;
}

class DefaultHttpTransport : public HttpTransport {
 public:
  HttpResponse post(const std::string& url, const HttpHeaders& headers,
                    const std::string& body) override {
    auto [base, path] = split_url(url);
    httplib::Client client(base);
    client.set_connection_timeout(30, 0);
    client.set_read_timeout(120, 0);
    httplib::Headers header_map(headers.begin(), headers.end());
    httplib::Result result =
        client.Post(path, header_map, body, "application/json");
    if (!result) {
      throw TransientFailure("connection to " + base +
                             " failed: " + httplib::to_string(result.error()));
    }
    return HttpResponse{result->status, result->body};
  }
};

const Shot& nearest_shot(const PromptBundle& bundle, const char* oracle) {
  if (bundle.shots.shots.empty()) {
    throw ValidationError(std::string(oracle) +
                          " needs at least one shot; zero-shot runs require "
                          "a remote or fixed-response backend");
  }
  const Shot* best = &bundle.shots.shots.front();
  for (const Shot& shot : bundle.shots.shots) {
    if (shot.score > best->score) best = &shot;
  }
  return *best;
}

constexpr char kFooterMagic[8] = {'K', 'I', 'C', 'L', 'E', 'I', 'X', '1'};

void append_bytes(std::string& out, const void* data, std::size_t size) {
  out.append(static_cast<const char*>(data), size);
}

template <typename T>
T read_pod(const std::string& data, std::size_t offset) {
  T value;
  std::memcpy(&value, data.data() + offset, sizeof(T));
  return value;
}

}  // namespace

SleepFn real_sleep() {
  return [](std::chrono::milliseconds delay) {
    std::this_thread::sleep_for(delay);
  };
}

std::shared_ptr<HttpTransport> make_default_transport() {
  return std::make_shared<DefaultHttpTransport>();
}

std::string FixedResponseBackend::complete(const PromptBundle&) {
  return response_;
}

std::string NearestShotOracle::complete(const PromptBundle& bundle) {
  return to_string(nearest_shot(bundle, "nearest_shot_oracle").outcome);
}

std::string MajorityOracle::complete(const PromptBundle& bundle) {
  const Shot& nearest = nearest_shot(bundle, "majority_oracle");
  int successes = 0;
  for (const Shot& shot : bundle.shots.shots) {
    if (shot.outcome == Outcome::kSuccess) ++successes;
  }
  const int failures = static_cast<int>(bundle.shots.shots.size()) - successes;
  if (successes > failures) return to_string(Outcome::kSuccess);
  if (failures > successes) return to_string(Outcome::kFailure);
  return to_string(nearest.outcome);
}

// Counting-semaphore wrapper kept out of the header so <semaphore> stays a
// private dependency.
class ConcurrencyGate {
 public:
  explicit ConcurrencyGate(int limit) : semaphore_(limit) {
    if (limit < 1) {
      throw ValidationError("max_concurrent must be at least 1");
    }
  }
  void acquire() { semaphore_.acquire(); }
  void release() { semaphore_.release(); }

 private:
  std::counting_semaphore<> semaphore_;
};

namespace {

struct GateGuard {
  explicit GateGuard(ConcurrencyGate& gate) : gate_(gate) { gate_.acquire(); }
  ~GateGuard() { gate_.release(); }
  GateGuard(const GateGuard&) = delete;
  GateGuard& operator=(const GateGuard&) = delete;
  ConcurrencyGate& gate_;
};

}  // namespace

RemoteCompletionBackend::RemoteCompletionBackend(
    RemoteConfig config, std::shared_ptr<HttpTransport> transport,
    SleepFn sleep)
    : config_(std::move(config)),
      credential_(read_credential(config_.credential_env)),
      transport_(std::move(transport)),
      sleep_(std::move(sleep)),
      gate_(std::make_unique<ConcurrencyGate>(config_.max_concurrent)) {
  if (config_.temperature < 0) {
    throw ValidationError("temperature must be non-negative");
  }
  if (config_.endpoint.empty()) {
    throw ValidationError("remote backend needs an endpoint URL");
  }
}

RemoteCompletionBackend::~RemoteCompletionBackend() = default;

std::string RemoteCompletionBackend::complete(const PromptBundle& bundle) {
  std::uint64_t request_id;
  {
    std::lock_guard<std::mutex> lock(request_mutex_);
    request_id = request_counter_++;
  }
  json request;
  request["model"] = config_.model_id;
  request["temperature"] = config_.temperature;
  request["messages"] = json::array(
      {json{{"role", "user"}, {"content", bundle.rendered_text}}});
  const std::string body = request.dump();
  const HttpHeaders headers = {
      {"Authorization", "Bearer " + credential_},
  };
  return with_backoff(
      config_.retry, derive_seed(config_.seed, "request", request_id),
      [&]() -> std::string {
        GateGuard guard(*gate_);
        HttpResponse response =
            transport_->post(config_.endpoint, headers, body);
        const std::string payload = check_http(response, "completion API");
        try {
          json parsed = json::parse(payload);
          return parsed.at("choices").at(0).at("message").at("content")
              .get<std::string>();
        } catch (const json::exception& e) {
          throw PermanentFailure("malformed completion response: " +
                                 std::string(e.what()));
        }
      },
      sleep_);
}

Embedding CoordinateEmbedder::embed(const std::string& text) {
  std::vector<double> values;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    values.push_back(parse_double(token, "coordinate embedding"));
  }
  if (values.empty()) {
    throw ValidationError(
        "coordinate embedder found no numbers in the description");
  }
  return Embedding{std::move(values), id()};
}

HashingEmbedder::HashingEmbedder(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) {
    throw ValidationError("hashing embedder needs a positive dimension");
  }
}

std::string HashingEmbedder::id() const {
  return "hashing-" + std::to_string(dim_);
}

Embedding HashingEmbedder::embed(const std::string& text) {
  std::vector<double> values(dim_, 0.0);
  std::string token;
  auto flush_token = [&] {
    if (token.empty()) return;
    const std::uint64_t h = fnv1a64(token);
    const double sign = ((h >> 32) & 1) != 0 ? 1.0 : -1.0;
    values[h % dim_] += sign;
    token.clear();
  };
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      token.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      flush_token();
    }
  }
  flush_token();
  double norm = 0.0;
  for (double v : values) norm += v * v;
  if (norm == 0.0) {
    throw ValidationError("text has no hashable tokens: \"" +
                          text.substr(0, 60) + "\"");
  }
  norm = std::sqrt(norm);
  for (double& v : values) v /= norm;
  return Embedding{std::move(values), id()};
}

RemoteEmbedder::RemoteEmbedder(RemoteConfig config,
                               std::shared_ptr<HttpTransport> transport,
                               SleepFn sleep)
    : config_(std::move(config)),
      credential_(read_credential(config_.credential_env)),
      transport_(std::move(transport)),
      sleep_(std::move(sleep)) {
  if (config_.endpoint.empty()) {
    throw ValidationError("remote embedder needs an endpoint URL");
  }
}

Embedding RemoteEmbedder::embed(const std::string& text) {
  if (text.empty()) {
    throw ValidationError("cannot embed empty text");
  }
  std::uint64_t request_id;
  {
    std::lock_guard<std::mutex> lock(request_mutex_);
    request_id = request_counter_++;
  }
  json request;
  request["model"] = config_.model_id;
  request["input"] = text;
  const std::string body = request.dump();
  const HttpHeaders headers = {
      {"Authorization", "Bearer " + credential_},
  };
  std::vector<double> values = with_backoff(
      config_.retry, derive_seed(config_.seed, "embed", request_id),
      [&]() -> std::vector<double> {
        HttpResponse response =
            transport_->post(config_.endpoint, headers, body);
        const std::string payload = check_http(response, "embedding API");
        try {
          json parsed = json::parse(payload);
          return parsed.at("data").at(0).at("embedding")
              .get<std::vector<double>>();
        } catch (const json::exception& e) {
          throw PermanentFailure("malformed embedding response: " +
                                 std::string(e.what()));
        }
      },
      sleep_);
  if (values.empty()) {
    throw PermanentFailure("embedding API returned an empty vector");
  }
  return Embedding{std::move(values), id()};
}

EmbeddingDiskCache::EmbeddingDiskCache(std::filesystem::path path)
    : path_(std::move(path)) {
  if (path_.has_parent_path()) {
    std::filesystem::create_directories(path_.parent_path());
  }
  std::ifstream in(path_, std::ios::binary);
  if (!in) return;  // fresh cache
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());

  // Record layout: 32-byte key digest, u32 dimension, u64 timestamp,
  // dimension host-endian doubles. The footer, when intact, is:
  // magic, u64 count, count x (digest, u64 offset), u64 footer_start, magic.
  auto read_record = [&](std::size_t offset,
                         std::size_t limit) -> std::optional<std::size_t> {
    if (offset + 44 > limit) return std::nullopt;
    Sha256 key;
    std::memcpy(key.data(), data.data() + offset, 32);
    const auto dim = read_pod<std::uint32_t>(data, offset + 32);
    const std::size_t payload = offset + 44;
    if (payload + static_cast<std::size_t>(dim) * 8 > limit) {
      return std::nullopt;
    }
    std::vector<double> values(dim);
    std::memcpy(values.data(), data.data() + payload,
                static_cast<std::size_t>(dim) * 8);
    entries_[key] = std::move(values);
    return payload + static_cast<std::size_t>(dim) * 8;
  };

  bool footer_ok = false;
  if (data.size() >= 16) {
    const std::size_t tail = data.size() - 16;
    if (std::memcmp(data.data() + data.size() - 8, kFooterMagic, 8) == 0) {
      const auto footer_start = read_pod<std::uint64_t>(data, tail);
      if (footer_start + 16 <= data.size() &&
          std::memcmp(data.data() + footer_start, kFooterMagic, 8) == 0) {
        const auto count = read_pod<std::uint64_t>(data, footer_start + 8);
        if (footer_start + 16 + count * 40 + 16 == data.size()) {
          footer_ok = true;
          std::size_t cursor = footer_start + 16;
          for (std::uint64_t i = 0; i < count && footer_ok; ++i) {
            const auto offset = read_pod<std::uint64_t>(data, cursor + 32);
            footer_ok = read_record(offset, footer_start).has_value();
            cursor += 40;
          }
          if (footer_ok) records_end_ = footer_start;
        }
      }
    }
  }
  if (!footer_ok) {
    // No usable index: scan sequentially, dropping a trailing partial record
    // left by an interrupted writer.
    entries_.clear();
    std::size_t offset = 0;
    while (auto next = read_record(offset, data.size())) {
      offset = *next;
    }
    records_end_ = offset;
    footer_dirty_ = !entries_.empty();
  }
}

EmbeddingDiskCache::~EmbeddingDiskCache() {
  try {
    flush();
  } catch (...) {
    // Destructors stay silent; the cache degrades to a scan on next open.
  }
}

std::optional<std::vector<double>> EmbeddingDiskCache::get(
    const Sha256& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingDiskCache::put(const Sha256& key,
                             const std::vector<double>& values) {
  if (entries_.count(key) > 0) return;
  std::fstream out(path_, std::ios::binary | std::ios::in | std::ios::out);
  if (!out) {
    out.open(path_, std::ios::binary | std::ios::out);  // create fresh file
  }
  if (!out) {
    throw RuntimeFailure("cannot open embedding cache \"" + path_.string() +
                         "\" for writing");
  }
  std::string record;
  append_bytes(record, key.data(), key.size());
  const auto dim = static_cast<std::uint32_t>(values.size());
  append_bytes(record, &dim, sizeof(dim));
  const auto timestamp = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count());
  append_bytes(record, &timestamp, sizeof(timestamp));
  append_bytes(record, values.data(), values.size() * sizeof(double));
  out.seekp(static_cast<std::streamoff>(records_end_));
  out.write(record.data(), static_cast<std::streamsize>(record.size()));
  if (!out) {
    throw RuntimeFailure("failed appending to embedding cache \"" +
                         path_.string() + "\"");
  }
  out.close();
  entries_[key] = values;
  records_end_ += record.size();
  footer_dirty_ = true;
}

void EmbeddingDiskCache::flush() {
  if (!footer_dirty_) return;
  // Rebuild offsets by walking entry sizes in key order; entries_ holds every
  // record, so a fresh scan of the file is unnecessary.
  std::fstream out(path_, std::ios::binary | std::ios::in | std::ios::out);
  if (!out) {
    throw RuntimeFailure("cannot open embedding cache \"" + path_.string() +
                         "\" for writing");
  }
  // Recover per-record offsets with one sequential pass over the file.
  std::map<Sha256, std::uint64_t> offsets;
  {
    std::ifstream in(path_, std::ios::binary);
    std::string data((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    std::size_t offset = 0;
    while (offset + 44 <= records_end_) {
      Sha256 key;
      std::memcpy(key.data(), data.data() + offset, 32);
      const auto dim = read_pod<std::uint32_t>(data, offset + 32);
      offsets[key] = offset;
      offset += 44 + static_cast<std::size_t>(dim) * 8;
    }
  }
  std::string footer;
  append_bytes(footer, kFooterMagic, 8);
  const auto count = static_cast<std::uint64_t>(offsets.size());
  append_bytes(footer, &count, sizeof(count));
  for (const auto& [key, offset] : offsets) {
    append_bytes(footer, key.data(), key.size());
    append_bytes(footer, &offset, sizeof(offset));
  }
  const std::uint64_t footer_start = records_end_;
  append_bytes(footer, &footer_start, sizeof(footer_start));
  append_bytes(footer, kFooterMagic, 8);
  out.seekp(static_cast<std::streamoff>(records_end_));
  out.write(footer.data(), static_cast<std::streamsize>(footer.size()));
  out.close();
  std::filesystem::resize_file(path_, records_end_ + footer.size());
  footer_dirty_ = false;
}

CachingEmbedder::CachingEmbedder(std::shared_ptr<Embedder> inner,
                                 std::size_t lru_capacity,
                                 std::optional<std::filesystem::path> disk_path)
    : inner_(std::move(inner)), capacity_(lru_capacity) {
  if (inner_ == nullptr) {
    throw ValidationError("caching embedder needs an inner embedder");
  }
  if (disk_path.has_value()) {
    disk_ = std::make_unique<EmbeddingDiskCache>(*disk_path);
  }
}

Embedding CachingEmbedder::embed(const std::string& text) {
  const Sha256 key = sha256(inner_->id() + '\0' + text);
  std::lock_guard<std::mutex> lock(mutex_);
  auto insert_lru = [&](const std::vector<double>& values) {
    if (capacity_ == 0) return;
    lru_.emplace_front(key, values);
    index_[key] = lru_.begin();
    if (lru_.size() > capacity_) {
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
  };
  auto it = index_.find(key);
  if (it != index_.end()) {
    ++stats_.memory_hits;
    lru_.splice(lru_.begin(), lru_, it->second);
    return Embedding{it->second->second, inner_->id()};
  }
  if (disk_ != nullptr) {
    if (auto values = disk_->get(key)) {
      ++stats_.disk_hits;
      insert_lru(*values);
      return Embedding{std::move(*values), inner_->id()};
    }
  }
  Embedding computed = inner_->embed(text);
  ++stats_.computed;
  insert_lru(computed.values);
  if (disk_ != nullptr) disk_->put(key, computed.values);
  return computed;
}

EmbedderStats CachingEmbedder::stats() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return stats_;
}

void CachingEmbedder::flush() {
  std::lock_guard<std::mutex> lock(mutex_);
  if (disk_ != nullptr) disk_->flush();
}

std::shared_ptr<CompletionBackend> make_backend(
    const BackendConfig& config, std::uint64_t seed,
    std::shared_ptr<HttpTransport> transport, SleepFn sleep) {
  if (config.temperature < 0) {
    throw ValidationError("temperature must be non-negative");
  }
  if (config.retry.max_attempts < 1) {
    throw ValidationError("retry policy needs max_attempts >= 1");
  }
  switch (config.kind) {
    case BackendKind::kNearestShotOracle:
      return std::make_shared<NearestShotOracle>();
    case BackendKind::kMajorityOracle:
      return std::make_shared<MajorityOracle>();
    case BackendKind::kFixedResponse:
      return std::make_shared<FixedResponseBackend>(config.fixed_response);
    case BackendKind::kRemote: {
      RemoteConfig remote;
      remote.endpoint = config.endpoint;
      remote.model_id = config.model_id;
      remote.temperature = config.temperature;
      remote.max_concurrent = config.max_concurrent;
      remote.retry = config.retry;
      remote.credential_env = config.credential_env;
      remote.seed = seed;
      return std::make_shared<RemoteCompletionBackend>(
          std::move(remote),
          transport != nullptr ? std::move(transport)
                               : make_default_transport(),
          sleep != nullptr ? std::move(sleep) : real_sleep());
    }
  }
  throw ValidationError("unknown backend kind");
}

std::shared_ptr<Embedder> make_embedder(const EmbedderConfig& config,
                                        std::uint64_t seed,
                                        std::shared_ptr<HttpTransport> transport,
                                        SleepFn sleep) {
  if (config.retry.max_attempts < 1) {
    throw ValidationError("retry policy needs max_attempts >= 1");
  }
  std::shared_ptr<Embedder> inner;
  switch (config.kind) {
    case EmbedderKind::kCoordinate:
      inner = std::make_shared<CoordinateEmbedder>();
      break;
    case EmbedderKind::kHashing:
      inner = std::make_shared<HashingEmbedder>(config.hash_dim);
      break;
    case EmbedderKind::kRemote: {
      RemoteConfig remote;
      remote.endpoint = config.endpoint;
      remote.model_id = config.model_id;
      remote.retry = config.retry;
      remote.credential_env = config.credential_env;
      remote.seed = seed;
      inner = std::make_shared<RemoteEmbedder>(
          std::move(remote),
          transport != nullptr ? std::move(transport)
                               : make_default_transport(),
          sleep != nullptr ? std::move(sleep) : real_sleep());
      break;
    }
  }
  if (inner == nullptr) {
    throw ValidationError("unknown embedder kind");
  }
  return std::make_shared<CachingEmbedder>(std::move(inner),
                                           config.lru_capacity,
                                           config.cache_path);
}

}  // namespace knnicl
