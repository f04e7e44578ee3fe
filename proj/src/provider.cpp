#include "rise/provider.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fmt/format.h>
#include <future>
#include <json.hpp>
#include <thread>

#include "rise/error.hpp"
#include "rise/io.hpp"

// After Eigen (via io.hpp): <resolv.h> defines a `_res` macro that collides
// with Eigen parameter names.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

namespace rise {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string cache_key(const std::string& model_id, const std::string& text) {
  std::string material = model_id;
  material += '\0';
  material += text;
  return sha256_hex(material);
}

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint parse_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("endpoint '{}' lacks a scheme", url));
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

// Failures worth retrying surface as Network; everything else propagates.
std::vector<Vec> request_batch(const ProviderConfig& cfg, const Endpoint& ep,
                               const std::string& token, std::span<const std::string> batch) {
  httplib::Client client(ep.origin);
  const auto timeout = std::chrono::milliseconds(cfg.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

  json body;
  body["model"] = cfg.model_id;
  body["input"] = std::vector<std::string>(batch.begin(), batch.end());
  const auto res = client.Post(ep.path, headers, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::Network, fmt::format("request failed: {}", httplib::to_string(res.error())));
  }
  if (res->status == 401 || res->status == 403) {
    throw Error(ErrorCode::Auth, fmt::format("provider rejected credentials (HTTP {})", res->status));
  }
  if (res->status == 429 || res->status >= 500) {
    throw Error(ErrorCode::Network, fmt::format("provider returned HTTP {}", res->status));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::ProviderSchema, fmt::format("provider returned HTTP {}", res->status));
  }

  std::vector<Vec> out;
  try {
    const json j = json::parse(res->body);
    if (cfg.wire == WireFormat::openai) {
      const json& data = j.at("data");
      out.resize(data.size());
      for (std::size_t i = 0; i < data.size(); ++i) {
        const std::size_t slot = data[i].contains("index") ? data[i]["index"].get<std::size_t>() : i;
        if (slot >= out.size()) throw Error(ErrorCode::ProviderSchema, "index out of range");
        out[slot] = data[i].at("embedding").get<Vec>();
      }
    } else {
      out = j.at("embeddings").get<std::vector<Vec>>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ProviderSchema, fmt::format("unexpected response: {}", e.what()));
  }
  if (out.size() != batch.size()) {
    throw Error(ErrorCode::ProviderSchema, fmt::format("provider returned {} embeddings for {} "
                                                       "inputs",
                                                       out.size(), batch.size()));
  }
  for (const Vec& v : out) {
    if (v.empty()) throw Error(ErrorCode::ProviderSchema, "provider returned an empty embedding");
  }
  return out;
}

std::vector<Vec> request_with_retry(const ProviderConfig& cfg, const Endpoint& ep,
                                    const std::string& token, std::span<const std::string> batch) {
  std::size_t backoff = cfg.retry.backoff_ms;
  for (std::size_t attempt = 1;; ++attempt) {
    try {
      return request_batch(cfg, ep, token, batch);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Network) throw;
      if (attempt >= cfg.retry.max_attempts) {
        throw Error(ErrorCode::Network,
                    fmt::format("attempts exhausted after {} tries: {}", attempt, e.detail()));
      }
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
    backoff *= 2;
  }
}

}  // namespace

fs::path EmbeddingCache::entry_path(const std::string& model_id, const std::string& text) const {
  std::string model_dir = model_id;
  std::replace(model_dir.begin(), model_dir.end(), '/', '_');
  const std::string h = cache_key(model_id, text);
  return dir_ / model_dir / h.substr(0, 2) / (h + ".json");
}

std::optional<Vec> EmbeddingCache::lookup(const std::string& model_id,
                                          const std::string& text) const {
  const fs::path p = entry_path(model_id, text);
  std::error_code ec;
  if (!fs::exists(p, ec)) return std::nullopt;
  try {
    const json j = json::parse(read_file(p));
    return j.at("embedding").get<Vec>();
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

void EmbeddingCache::store(const std::string& model_id, const std::string& text,
                           const Vec& embedding) {
  std::lock_guard lock(write_mutex_);
  const fs::path p = entry_path(model_id, text);
  std::error_code ec;
  if (fs::exists(p, ec)) return;
  fs::create_directories(p.parent_path(), ec);
  if (ec) throw Error(ErrorCode::Io, fmt::format("cannot create cache dir: {}", ec.message()));
  json j;
  j["model"] = model_id;
  j["text_sha256"] = sha256_hex(text);
  j["embedding"] = embedding;
  write_file(p, j.dump() + "\n");
}

std::vector<Vec> fetch_embeddings(std::span<const std::string> texts, const ProviderConfig& cfg,
                                  FetchStats* stats) {
  if (texts.empty()) throw Error(ErrorCode::InvalidArgument, "no texts to embed");
  if (cfg.batch_size < 1) throw Error(ErrorCode::InvalidArgument, "batch_size must be >= 1");
  if (cfg.retry.max_attempts < 1) {
    throw Error(ErrorCode::InvalidArgument, "retry.max_attempts must be >= 1");
  }

  std::optional<EmbeddingCache> cache;
  if (!cfg.cache_dir.empty()) cache.emplace(cfg.cache_dir);

  std::vector<Vec> out(texts.size());
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (cache) {
      if (auto hit = cache->lookup(cfg.model_id, texts[i])) {
        out[i] = std::move(*hit);
        if (stats) ++stats->cache_hits;
        continue;
      }
    }
    missing.push_back(i);
  }
  if (missing.empty()) return out;

  std::string token;
  if (!cfg.auth_token_env_var.empty()) {
    const char* env = std::getenv(cfg.auth_token_env_var.c_str());
    if (env == nullptr || *env == '\0') {
      throw Error(ErrorCode::Auth,
                  fmt::format("environment variable {} is not set", cfg.auth_token_env_var));
    }
    token = env;
  }
  const Endpoint ep = parse_endpoint(cfg.endpoint_url);

  std::vector<std::vector<std::string>> batches;
  for (std::size_t k = 0; k < missing.size(); k += cfg.batch_size) {
    std::vector<std::string> b;
    for (std::size_t j = k; j < std::min(missing.size(), k + cfg.batch_size); ++j) {
      b.push_back(texts[missing[j]]);
    }
    batches.push_back(std::move(b));
  }

  const std::size_t in_flight = std::max<std::size_t>(1, cfg.max_in_flight);
  for (std::size_t start = 0; start < batches.size(); start += in_flight) {
    const std::size_t stop = std::min(batches.size(), start + in_flight);
    std::vector<std::future<std::vector<Vec>>> futures;
    for (std::size_t b = start; b < stop; ++b) {
      futures.push_back(std::async(std::launch::async, [&, b] {
        return request_with_retry(cfg, ep, token, batches[b]);
      }));
    }
    for (std::size_t b = start; b < stop; ++b) {
      std::vector<Vec> got = futures[b - start].get();
      if (stats) ++stats->requests;
      for (std::size_t j = 0; j < got.size(); ++j) {
        const std::size_t slot = missing[b * cfg.batch_size + j];
        if (cache) cache->store(cfg.model_id, texts[slot], got[j]);
        out[slot] = std::move(got[j]);
      }
    }
  }
  return out;
}

}  // namespace rise
