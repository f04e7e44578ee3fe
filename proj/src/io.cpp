#include "rise/io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <openssl/evp.h>
#include <sstream>

namespace rise {

using nlohmann::json;
namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::Io, fmt::format("read failed for '{}'", path.string()));
  return std::move(ss).str();
}

void write_file(const fs::path& path, std::string_view contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, fmt::format("cannot write '{}'", tmp.string()));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::Io, fmt::format("write failed for '{}'", tmp.string()));
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorCode::Io, fmt::format("cannot move '{}' into place: {}", path.string(),
                                           ec.message()));
  }
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::Io, "sha256 failed");
  }
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
  return out;
}

std::string file_sha256(const fs::path& path) { return sha256_hex(read_file(path)); }

// ---------------------------------------------------------------- pairs

namespace {

Vec to_vec(const json& j, const char* field) {
  if (!j.is_array()) throw Error(ErrorCode::Parse, fmt::format("'{}' must be an array", field));
  Vec v;
  v.reserve(j.size());
  for (const json& x : j) {
    if (!x.is_number()) {
      throw Error(ErrorCode::Parse, fmt::format("'{}' contains a non-number", field));
    }
    v.push_back(x.get<double>());
  }
  return v;
}

std::string string_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) throw Error(ErrorCode::Parse, fmt::format("'{}' must be a string", key));
  return it->get<std::string>();
}

PairRecord parse_record(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Parse, "record must be a JSON object");
  PairRecord r;
  r.id = string_field(j, "id");
  r.language = string_field(j, "language");
  r.phenomenon = string_field(j, "phenomenon");
  if (j.contains("neutral_text") && !j["neutral_text"].is_null()) {
    r.neutral_text = string_field(j, "neutral_text");
  }
  if (j.contains("variant_text") && !j["variant_text"].is_null()) {
    r.variant_text = string_field(j, "variant_text");
  }
  if (!j.contains("neutral_embedding") || !j.contains("variant_embedding")) {
    throw Error(ErrorCode::Parse, "record lacks neutral_embedding or variant_embedding");
  }
  r.neutral_embedding = to_vec(j["neutral_embedding"], "neutral_embedding");
  r.variant_embedding = to_vec(j["variant_embedding"], "variant_embedding");
  if (r.neutral_embedding.empty() || r.variant_embedding.empty()) {
    throw Error(ErrorCode::Parse, "embedding arrays must be non-empty");
  }
  if (r.neutral_embedding.size() != r.variant_embedding.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("neutral has {} entries, variant has {}", r.neutral_embedding.size(),
                            r.variant_embedding.size()));
  }
  return r;
}

}  // namespace

LoadedPairs parse_pairs(std::string_view jsonl, NormalizePolicy policy) {
  LoadedPairs out;
  std::size_t dim = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    try {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Parse, e.what());
      }
      const PairRecord rec = parse_record(j);
      if (dim == 0) dim = rec.neutral_embedding.size();
      if (rec.neutral_embedding.size() != dim) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("dimension {} differs from first record's {}",
                                rec.neutral_embedding.size(), dim));
      }
      std::vector<Diagnostic> warnings;
      UnitVector n = normalize(rec.neutral_embedding, policy, &warnings);
      UnitVector v = normalize(rec.variant_embedding, policy, &warnings);
      out.pairs.emplace_back(std::move(n), std::move(v), rec.id, rec.language, rec.phenomenon);
      for (auto& w : warnings) {
        out.diagnostics.push_back({line_no, false, ErrorCode::NotUnit,
                                   fmt::format("record '{}': {}", rec.id, w.message)});
      }
    } catch (const Error& e) {
      if (policy == NormalizePolicy::strict) {
        throw Error(e.code(), fmt::format("line {}: {}", line_no, e.detail()));
      }
      out.diagnostics.push_back({line_no, true, e.code(), e.detail()});
    }
  }
  return out;
}

LoadedPairs load_pairs(const fs::path& path, NormalizePolicy policy) {
  return parse_pairs(read_file(path), policy);
}

std::string pair_to_json_line(const Pair& pair) {
  json j;
  j["id"] = pair.id();
  j["language"] = pair.language();
  j["phenomenon"] = pair.phenomenon();
  j["neutral_embedding"] = pair.neutral().vec();
  j["variant_embedding"] = pair.variant().vec();
  return j.dump();
}

void save_pairs(std::span<const Pair> pairs, const fs::path& path) {
  std::string out;
  for (const Pair& p : pairs) {
    out += pair_to_json_line(p);
    out += '\n';
  }
  write_file(path, out);
}

namespace {

constexpr std::string_view kPairMagic = "RISEPB01";

void put_u64(std::string& out, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) out += static_cast<char>((x >> (8 * i)) & 0xff);
}

std::uint64_t get_u64(std::string_view in, std::size_t& pos) {
  if (pos + 8 > in.size()) throw Error(ErrorCode::CorruptVector, "truncated binary pair file");
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) {
    x |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  pos += 8;
  return x;
}

}  // namespace

void save_pairs_binary(std::span<const Pair> pairs, const fs::path& path) {
  const std::size_t d = pairs.empty() ? 0 : pairs.front().dim();
  json header;
  header["format_version"] = kPairBinaryFormatVersion;
  header["dim"] = d;
  header["count"] = pairs.size();
  header["records"] = json::array();
  for (const Pair& p : pairs) {
    require_same_dim(d, p.dim(), "binary pair set");
    header["records"].push_back({{"id", p.id()},
                                 {"language", p.language()},
                                 {"phenomenon", p.phenomenon()}});
  }
  const std::string h = header.dump();
  std::string out(kPairMagic);
  put_u64(out, h.size());
  out += h;
  out.reserve(out.size() + pairs.size() * 2 * d * 8);
  for (const Pair& p : pairs) {
    for (double x : p.neutral().coords()) put_u64(out, std::bit_cast<std::uint64_t>(x));
    for (double x : p.variant().coords()) put_u64(out, std::bit_cast<std::uint64_t>(x));
  }
  write_file(path, out);
}

std::vector<Pair> load_pairs_binary(const fs::path& path) {
  const std::string data = read_file(path);
  if (data.substr(0, kPairMagic.size()) != kPairMagic) {
    throw Error(ErrorCode::CorruptVector, "not a binary pair file (bad magic)");
  }
  std::size_t pos = kPairMagic.size();
  const std::uint64_t hlen = get_u64(data, pos);
  if (pos + hlen > data.size()) throw Error(ErrorCode::CorruptVector, "truncated header");
  json header;
  try {
    header = json::parse(data.substr(pos, hlen));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::CorruptVector, e.what());
  }
  pos += hlen;
  const int version = header.value("format_version", -1);
  if (version != kPairBinaryFormatVersion) {
    throw Error(ErrorCode::Version, fmt::format("binary pair format_version {} (expected {})",
                                                version, kPairBinaryFormatVersion));
  }
  const auto d = header.at("dim").get<std::size_t>();
  const auto count = header.at("count").get<std::size_t>();
  const json& records = header.at("records");
  if (records.size() != count) throw Error(ErrorCode::CorruptVector, "record count mismatch");
  if (data.size() - pos != count * 2 * d * 8) {
    throw Error(ErrorCode::CorruptVector, "payload size does not match header");
  }
  std::vector<Pair> pairs;
  pairs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vec n(d), v(d);
    for (double& x : n) x = std::bit_cast<double>(get_u64(data, pos));
    for (double& x : v) x = std::bit_cast<double>(get_u64(data, pos));
    const json& r = records[i];
    pairs.emplace_back(normalize(n), normalize(v), r.value("id", ""), r.value("language", ""),
                       r.value("phenomenon", ""));
  }
  return pairs;
}

// ------------------------------------------------------------ prototype

std::string prototype_to_json(const Prototype& p) {
  json j;
  j["format_version"] = kPrototypeFormatVersion;
  j["dim"] = p.dim();
  j["backend"] = std::string(to_string(p.backend()));
  j["phenomenon"] = p.meta().phenomenon;
  j["language"] = p.meta().language;
  j["model_id"] = p.meta().model_id;
  j["created_at"] = p.meta().created_at;
  j["pair_count"] = p.pair_count();
  if (p.meta().source_magnitude) j["source_magnitude"] = *p.meta().source_magnitude;
  if (p.meta().mapped_magnitude) j["mapped_magnitude"] = *p.meta().mapped_magnitude;
  j["vec"] = p.values();
  return j.dump() + "\n";
}

Prototype prototype_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::CorruptVector, fmt::format("prototype is not valid JSON: {}", e.what()));
  }
  if (!j.is_object() || !j.contains("format_version") || !j["format_version"].is_number_integer()) {
    throw Error(ErrorCode::CorruptVector, "prototype lacks an integer format_version");
  }
  const int version = j["format_version"].get<int>();
  if (version != kPrototypeFormatVersion) {
    throw Error(ErrorCode::Version, fmt::format("prototype format_version {} is not supported "
                                                "(expected {})",
                                                version, kPrototypeFormatVersion));
  }
  try {
    const auto dim = j.at("dim").get<std::size_t>();
    Vec v = to_vec(j.at("vec"), "vec");
    if (v.size() != dim) {
      throw Error(ErrorCode::CorruptVector,
                  fmt::format("vec has {} entries, header says {}", v.size(), dim));
    }
    PrototypeMeta meta;
    meta.phenomenon = j.value("phenomenon", "");
    meta.language = j.value("language", "");
    meta.model_id = j.value("model_id", "");
    meta.created_at = j.value("created_at", "");
    if (j.contains("source_magnitude")) meta.source_magnitude = j["source_magnitude"].get<double>();
    if (j.contains("mapped_magnitude")) meta.mapped_magnitude = j["mapped_magnitude"].get<double>();
    return Prototype(std::move(v), j.at("pair_count").get<std::size_t>(),
                     parse_backend(j.at("backend").get<std::string>()), std::move(meta));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptVector, fmt::format("malformed prototype: {}", e.what()));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CorruptVector) throw;
    throw Error(ErrorCode::CorruptVector, e.what());
  }
}

void save_prototype(const Prototype& p, const fs::path& path) {
  write_file(path, prototype_to_json(p));
}

Prototype load_prototype(const fs::path& path) { return prototype_from_json(read_file(path)); }

// ------------------------------------------------------------ space map

std::string space_map_to_json(const SpaceMap& m) {
  json j;
  j["format_version"] = kSpaceMapFormatVersion;
  j["d_src"] = m.d_src();
  j["d_tgt"] = m.d_tgt();
  j["pca_rank"] = m.pca_rank ? json(*m.pca_rank) : json(nullptr);
  j["ridge"] = m.ridge;
  j["n_anchors"] = m.n_anchors;
  j["source_model_id"] = m.source_model_id;
  j["target_model_id"] = m.target_model_id;
  Vec flat;
  flat.reserve(m.d_src() * m.d_tgt());
  for (Eigen::Index r = 0; r < m.matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.matrix.cols(); ++c) flat.push_back(m.matrix(r, c));
  }
  j["matrix"] = flat;
  return j.dump() + "\n";
}

SpaceMap space_map_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::CorruptVector, fmt::format("space map is not valid JSON: {}", e.what()));
  }
  const int version = j.is_object() ? j.value("format_version", -1) : -1;
  if (version != kSpaceMapFormatVersion) {
    throw Error(ErrorCode::Version, fmt::format("space map format_version {} is not supported "
                                                "(expected {})",
                                                version, kSpaceMapFormatVersion));
  }
  try {
    SpaceMap m;
    const auto d_src = j.at("d_src").get<Eigen::Index>();
    const auto d_tgt = j.at("d_tgt").get<Eigen::Index>();
    const Vec flat = to_vec(j.at("matrix"), "matrix");
    if (flat.size() != static_cast<std::size_t>(d_src * d_tgt)) {
      throw Error(ErrorCode::CorruptVector, "matrix size does not match header");
    }
    m.matrix.resize(d_tgt, d_src);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < d_tgt; ++r) {
      for (Eigen::Index c = 0; c < d_src; ++c) m.matrix(r, c) = flat[k++];
    }
    if (!j.at("pca_rank").is_null()) m.pca_rank = j["pca_rank"].get<std::size_t>();
    m.ridge = j.at("ridge").get<double>();
    m.n_anchors = j.at("n_anchors").get<std::size_t>();
    m.source_model_id = j.value("source_model_id", "");
    m.target_model_id = j.value("target_model_id", "");
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptVector, fmt::format("malformed space map: {}", e.what()));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CorruptVector) throw;
    throw Error(ErrorCode::CorruptVector, e.what());
  }
}

void save_space_map(const SpaceMap& m, const fs::path& path) {
  write_file(path, space_map_to_json(m));
}

SpaceMap load_space_map(const fs::path& path) { return space_map_from_json(read_file(path)); }

// -------------------------------------------------------------- anchors

std::vector<Anchor> load_anchors(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<Anchor> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      out.push_back({string_field(j, "id"), normalize(to_vec(j.at("embedding"), "embedding"))});
      require_same_dim(out.front().embedding.dim(), out.back().embedding.dim(), "anchor");
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Parse, fmt::format("line {}: {}", line_no, e.what()));
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("line {}: {}", line_no, e.detail()));
    }
  }
  return out;
}

void save_anchors(std::span<const Anchor> anchors, const fs::path& path) {
  std::string out;
  for (const Anchor& a : anchors) {
    json j;
    j["id"] = a.id;
    j["embedding"] = a.embedding.vec();
    out += j.dump();
    out += '\n';
  }
  write_file(path, out);
}

}  // namespace rise
