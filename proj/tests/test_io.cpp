#include <doctest.h>

#include <filesystem>
#include <json.hpp>

#include "rise/error.hpp"
#include "rise/io.hpp"
#include "rise/synth.hpp"
#include "test_support.hpp"

using namespace rise;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& err) {
    return err.code();
  }
  FAIL("expected rise::Error");
  return ErrorCode::InvalidArgument;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& err) {
    return err.what();
  }
  return {};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("rise_io_" + std::to_string(Rng(std::random_device{}()).next_u64()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::vector<Pair> sample_pairs(std::size_t n = 25) {
  SynthSpec spec;
  spec.dim = 9;
  spec.n_pairs = n;
  spec.noise_sigma = 0.1;
  spec.seed = 4;
  spec.language = "de";
  spec.phenomenon = "politeness";
  return generate(spec).pairs;
}

std::string record(const Vec& n, const Vec& v, const std::string& id = "r") {
  nlohmann::json j;
  j["id"] = id;
  j["language"] = "en";
  j["phenomenon"] = "neg";
  j["neutral_embedding"] = n;
  j["variant_embedding"] = v;
  return j.dump() + "\n";
}

}  // namespace

TEST_CASE("prototype round trip is bit-exact") {
  TempDir tmp;
  Rng rng(1);
  Prototype p = random_prototype(17, 0.37, rng, RotorBackend::givens);
  p.meta() = {"negation", "zu", "model/x", "2026-01-01T00:00:00Z", 0.5, 0.49};
  save_prototype(p, tmp.path / "p.json");
  const Prototype q = load_prototype(tmp.path / "p.json");
  CHECK(q == p);
  CHECK(prototype_to_json(q) == prototype_to_json(p));

  const Prototype bare = random_prototype(5, 1.0, rng);
  CHECK(prototype_from_json(prototype_to_json(bare)) == bare);
}

TEST_CASE("truncated prototype is rejected as corrupt") {
  Rng rng(2);
  const std::string text = prototype_to_json(random_prototype(12, 0.3, rng));
  CHECK(code_of([&] { prototype_from_json(text.substr(0, text.size() / 2)); }) ==
        ErrorCode::CorruptVector);
  CHECK(code_of([&] { prototype_from_json(""); }) == ErrorCode::CorruptVector);
}

TEST_CASE("prototype version mismatch names both versions") {
  Rng rng(3);
  nlohmann::json j = nlohmann::json::parse(prototype_to_json(random_prototype(4, 0.3, rng)));
  j["format_version"] = 2;
  const std::string text = j.dump();
  CHECK(code_of([&] { prototype_from_json(text); }) == ErrorCode::Version);
  const std::string msg = message_of([&] { prototype_from_json(text); });
  CHECK(msg.find('2') != std::string::npos);
  CHECK(msg.find('1') != std::string::npos);
}

TEST_CASE("prototype with a wrong vec length is corrupt") {
  Rng rng(4);
  nlohmann::json j = nlohmann::json::parse(prototype_to_json(random_prototype(4, 0.3, rng)));
  j["dim"] = 5;
  CHECK(code_of([&] { prototype_from_json(j.dump()); }) == ErrorCode::CorruptVector);
}

TEST_CASE("space map round trip is bit-exact") {
  TempDir tmp;
  SpaceMap m;
  m.matrix = Eigen::MatrixXd::Random(3, 5);
  m.matrix(1, 2) = 1.0 / 3.0;
  m.source_model_id = "a";
  m.target_model_id = "b";
  m.n_anchors = 40;
  m.pca_rank = 3;
  m.ridge = 1e-4;
  save_space_map(m, tmp.path / "m.json");
  CHECK(load_space_map(tmp.path / "m.json") == m);

  m.pca_rank.reset();
  CHECK(space_map_from_json(space_map_to_json(m)) == m);

  nlohmann::json j = nlohmann::json::parse(space_map_to_json(m));
  j["format_version"] = 7;
  CHECK(code_of([&] { space_map_from_json(j.dump()); }) == ErrorCode::Version);
  const std::string text = space_map_to_json(m);
  CHECK(code_of([&] { space_map_from_json(text.substr(0, 30)); }) == ErrorCode::CorruptVector);
}

TEST_CASE("pair set JSONL round trip is bit-exact") {
  TempDir tmp;
  const std::vector<Pair> pairs = sample_pairs();
  save_pairs(pairs, tmp.path / "p.jsonl");
  const LoadedPairs got = load_pairs(tmp.path / "p.jsonl");
  CHECK(got.pairs == pairs);
  CHECK(got.diagnostics.empty());
}

TEST_CASE("pair set binary round trip is bit-exact") {
  TempDir tmp;
  const std::vector<Pair> pairs = sample_pairs();
  save_pairs_binary(pairs, tmp.path / "p.bin");
  CHECK(load_pairs_binary(tmp.path / "p.bin") == pairs);

  const std::string bytes = read_file(tmp.path / "p.bin");
  write_file(tmp.path / "cut.bin", std::string_view(bytes).substr(0, bytes.size() - 8));
  CHECK(code_of([&] { load_pairs_binary(tmp.path / "cut.bin"); }) == ErrorCode::CorruptVector);
  write_file(tmp.path / "bad.bin", "NOTRISE!");
  CHECK(code_of([&] { load_pairs_binary(tmp.path / "bad.bin"); }) == ErrorCode::CorruptVector);

  std::string bumped = bytes;
  const auto at = bumped.find("\"format_version\":1");
  REQUIRE(at != std::string::npos);
  bumped[at + 17] = '9';
  write_file(tmp.path / "v.bin", bumped);
  CHECK(code_of([&] { load_pairs_binary(tmp.path / "v.bin"); }) == ErrorCode::Version);
}

TEST_CASE("load_pairs: empty file") {
  const LoadedPairs got = parse_pairs("");
  CHECK(got.pairs.empty());
  CHECK(got.diagnostics.empty());
  CHECK(parse_pairs("\n\n").pairs.empty());
}

TEST_CASE("load_pairs: off-unit record under warn is normalized with one warning") {
  const LoadedPairs got =
      parse_pairs(record({2.0, 0.0, 0.0}, {0.0, 1.0, 0.0}), NormalizePolicy::warn);
  REQUIRE(got.pairs.size() == 1);
  CHECK(got.pairs[0].neutral().vec() == Vec{1.0, 0.0, 0.0});
  REQUIRE(got.diagnostics.size() == 1);
  CHECK_FALSE(got.diagnostics[0].fatal);
  CHECK(got.diagnostics[0].line == 1);
}

TEST_CASE("load_pairs: dimension change is reported at line 2") {
  const std::string text = record(Vec(8, std::sqrt(0.125)), Vec(8, std::sqrt(0.125)), "a") +
                           record(Vec(16, 0.25), Vec(16, 0.25), "b");
  CHECK(code_of([&] { parse_pairs(text); }) == ErrorCode::DimensionMismatch);
  CHECK(message_of([&] { parse_pairs(text); }).find("line 2:") != std::string::npos);

  const LoadedPairs warn = parse_pairs(text, NormalizePolicy::warn);
  CHECK(warn.pairs.size() == 1);
  REQUIRE(warn.diagnostics.size() == 1);
  CHECK(warn.diagnostics[0].fatal);
  CHECK(warn.diagnostics[0].line == 2);
  CHECK(warn.diagnostics[0].code == ErrorCode::DimensionMismatch);
}

TEST_CASE("load_pairs: malformed and degenerate records") {
  CHECK(code_of([] { parse_pairs("{not json\n"); }) == ErrorCode::Parse);
  CHECK(code_of([] { parse_pairs("{\"id\":\"x\"}\n"); }) == ErrorCode::Parse);
  CHECK(code_of([] { parse_pairs(record({0.0, 0.0}, {1.0, 0.0})); }) == ErrorCode::ZeroVector);
  CHECK(code_of([] { parse_pairs(record({1.0, 0.0}, {-1.0, 0.0})); }) == ErrorCode::AntipodalPair);
  CHECK(code_of([] { parse_pairs(record({1.0, 0.0}, {1.0, 0.0, 0.0})); }) ==
        ErrorCode::DimensionMismatch);
  CHECK(code_of([] { load_pairs("/nonexistent/rise/pairs.jsonl"); }) == ErrorCode::Io);
}

TEST_CASE("anchors round trip") {
  TempDir tmp;
  Rng rng(5);
  std::vector<Anchor> anchors;
  for (int i = 0; i < 4; ++i) {
    anchors.push_back({"a" + std::to_string(i), testing::random_unit(6, rng)});
  }
  save_anchors(anchors, tmp.path / "a.jsonl");
  const std::vector<Anchor> got = load_anchors(tmp.path / "a.jsonl");
  REQUIRE(got.size() == anchors.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i].id == anchors[i].id);
    CHECK(got[i].embedding == anchors[i].embedding);
  }
}

TEST_CASE("sha256 known answers") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("write_file replaces atomically") {
  TempDir tmp;
  write_file(tmp.path / "f.txt", "one");
  write_file(tmp.path / "f.txt", "two");
  CHECK(read_file(tmp.path / "f.txt") == "two");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(tmp.path)) ++entries;
  CHECK(entries == 1);
}
