#pragma once

// On-disk formats.
//
// Pair sets (JSON Lines), one record per line:
//   {"id": str, "language": str, "phenomenon": str,
//    "neutral_text": str?, "variant_text": str?,
//    "neutral_embedding": [f64...], "variant_embedding": [f64...]}
//
// Pair-set binary sidecar:
//   bytes 0..7   "RISEPB01"
//   bytes 8..15  header length H, little-endian u64
//   next H bytes JSON header {"format_version":1,"dim":d,"count":N,
//                "records":[{"id","language","phenomenon"}...]}
//   then N × (neutral d×f64, variant d×f64), IEEE-754 little-endian.
//
// Prototype JSON:
//   {"format_version":1,"dim":d,"backend":str,"phenomenon":str,"language":str,
//    "model_id":str,"created_at":str,"pair_count":M,"vec":[f64...],
//    "source_magnitude":f64?,"mapped_magnitude":f64?}
//
// Space map JSON:
//   {"format_version":1,"d_src":n,"d_tgt":m,"pca_rank":r|null,"ridge":f64,
//    "n_anchors":k,"source_model_id":str,"target_model_id":str,
//    "matrix":[f64...]}  (row-major, d_tgt rows)
//
// Anchor embeddings (JSON Lines): {"id": str, "embedding": [f64...]}
//
// Doubles are written in shortest round-trip decimal form, so every format
// reloads bit-exactly.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rise/core.hpp"
#include "rise/cross_model.hpp"
#include "rise/error.hpp"

namespace rise {

inline constexpr int kPrototypeFormatVersion = 1;
inline constexpr int kSpaceMapFormatVersion = 1;
inline constexpr int kPairBinaryFormatVersion = 1;

struct PairRecord {
  std::string id;
  std::string language;
  std::string phenomenon;
  std::optional<std::string> neutral_text;
  std::optional<std::string> variant_text;
  Vec neutral_embedding;
  Vec variant_embedding;
};

struct LoadDiagnostic {
  std::size_t line = 0;  // 1-based
  bool fatal = false;    // record skipped
  ErrorCode code = ErrorCode::Parse;
  std::string message;
};

struct LoadedPairs {
  std::vector<Pair> pairs;
  std::vector<LoadDiagnostic> diagnostics;
};

// Under `strict` the first failing record throws (message carries the line);
// under `warn` failing records are skipped and reported, and records whose
// norms deviate from 1 by more than 0.01 produce non-fatal warnings.
LoadedPairs load_pairs(const std::filesystem::path& path,
                       NormalizePolicy policy = NormalizePolicy::strict);
LoadedPairs parse_pairs(std::string_view jsonl, NormalizePolicy policy = NormalizePolicy::strict);

std::string pair_to_json_line(const Pair& pair);
void save_pairs(std::span<const Pair> pairs, const std::filesystem::path& path);

void save_pairs_binary(std::span<const Pair> pairs, const std::filesystem::path& path);
std::vector<Pair> load_pairs_binary(const std::filesystem::path& path);

std::string prototype_to_json(const Prototype& p);
Prototype prototype_from_json(std::string_view text);
void save_prototype(const Prototype& p, const std::filesystem::path& path);
Prototype load_prototype(const std::filesystem::path& path);

std::string space_map_to_json(const SpaceMap& m);
SpaceMap space_map_from_json(std::string_view text);
void save_space_map(const SpaceMap& m, const std::filesystem::path& path);
SpaceMap load_space_map(const std::filesystem::path& path);

struct Anchor {
  std::string id;
  UnitVector embedding;
};
std::vector<Anchor> load_anchors(const std::filesystem::path& path);
void save_anchors(std::span<const Anchor> anchors, const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
// Writes via a temporary sibling and rename.
void write_file(const std::filesystem::path& path, std::string_view contents);

std::string sha256_hex(std::string_view data);
std::string file_sha256(const std::filesystem::path& path);

}  // namespace rise
