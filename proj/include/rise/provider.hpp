#pragma once

// HTTP embedding-provider client with a content-addressed local cache.
//
// Wire formats:
//   openai: POST {"model": m, "input": [texts]} -> {"data": [{"embedding": [...], "index": i}...]}
//   ollama: POST {"model": m, "input": [texts]} -> {"embeddings": [[...]...]}
//
// Cache layout: <cache_dir>/<model_id with '/' -> '_'>/<h[0:2]>/<h>.json where
// h = sha256(model_id + '\0' + text). Entries are written once (temp file +
// rename) and never modified.

#include <cstddef>
#include <filesystem>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rise/sphere.hpp"

namespace rise {

enum class WireFormat { openai, ollama };

struct RetryPolicy {
  std::size_t max_attempts = 3;
  std::size_t backoff_ms = 200;  // doubled after each failed attempt
};

struct ProviderConfig {
  std::string endpoint_url;  // e.g. http://localhost:11434/api/embed
  std::string model_id;
  std::string auth_token_env_var;  // empty: no Authorization header
  std::size_t batch_size = 64;
  std::size_t timeout_ms = 30000;
  RetryPolicy retry;
  std::size_t max_in_flight = 1;
  WireFormat wire = WireFormat::openai;
  std::filesystem::path cache_dir;  // empty: no cache
};

class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::optional<Vec> lookup(const std::string& model_id, const std::string& text) const;
  // No-op when an entry already exists.
  void store(const std::string& model_id, const std::string& text, const Vec& embedding);
  std::filesystem::path entry_path(const std::string& model_id, const std::string& text) const;

 private:
  std::filesystem::path dir_;
  std::mutex write_mutex_;
};

struct FetchStats {
  std::size_t requests = 0;
  std::size_t cache_hits = 0;
};

// Order-preserving; only cache misses go over the network.
std::vector<Vec> fetch_embeddings(std::span<const std::string> texts, const ProviderConfig& cfg,
                                  FetchStats* stats = nullptr);

}  // namespace rise
