// rise: command-line front end for learning, evaluating and porting shift
// prototypes. Data goes to stdout, diagnostics to stderr, and every run writes
// a JSON manifest. Exit codes are the rise::ErrorCode values (see README).

#include <sys/utsname.h>
#include <unistd.h>

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "rise/core.hpp"
#include "rise/cross_model.hpp"
#include "rise/error.hpp"
#include "rise/eval.hpp"
#include "rise/io.hpp"
#include "rise/provider.hpp"
#include "rise/synth.hpp"

#ifndef RISE_VERSION
#define RISE_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace rise;

namespace {

using clock_type = std::chrono::steady_clock;

double ms_since(clock_type::time_point t0) {
  return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

json versions() {
  return {
      {"rise", RISE_VERSION},
      {"prototype_format", kPrototypeFormatVersion},
      {"space_map_format", kSpaceMapFormatVersion},
      {"pair_binary_format", kPairBinaryFormatVersion},
      {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION,
                            EIGEN_MINOR_VERSION)},
      {"fmt", FMT_VERSION},
      {"cli11", CLI11_VERSION},
      {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR,
                                    NLOHMANN_JSON_VERSION_MINOR, NLOHMANN_JSON_VERSION_PATCH)},
      {"compiler", __VERSION__},
  };
}

json machine_info() {
  json m;
  char host[256] = {};
  if (::gethostname(host, sizeof host - 1) == 0) m["hostname"] = host;
  utsname u{};
  if (::uname(&u) == 0) {
    m["os"] = fmt::format("{} {}", u.sysname, u.release);
    m["arch"] = u.machine;
  }
  m["hardware_threads"] = std::thread::hardware_concurrency();
  std::ifstream cpu("/proc/cpuinfo");
  for (std::string line; std::getline(cpu, line);) {
    if (line.rfind("model name", 0) == 0) {
      m["cpu"] = line.substr(line.find(':') + 2);
      break;
    }
  }
  return m;
}

// Collects everything needed to audit or replay one run.
class Manifest {
 public:
  explicit Manifest(std::string command) : start_(clock_type::now()) {
    doc_["command"] = std::move(command);
    doc_["versions"] = versions();
    doc_["inputs"] = json::array();
    doc_["outputs"] = json::array();
    doc_["timings_ms"] = json::object();
  }

  void input(const fs::path& p) {
    doc_["inputs"].push_back({{"path", p.string()}, {"sha256", file_sha256(p)}});
  }
  void output(const fs::path& p) {
    doc_["outputs"].push_back({{"path", p.string()}, {"sha256", file_sha256(p)}});
  }
  void timing(const std::string& name, double ms) { doc_["timings_ms"][name] = ms; }
  json& operator[](const std::string& key) { return doc_[key]; }

  void write(const fs::path& path) {
    timing("total", ms_since(start_));
    write_file(path, doc_.dump(2) + "\n");
  }

 private:
  json doc_;
  clock_type::time_point start_;
};

struct Common {
  std::string manifest;
  std::size_t workers = 1;
  std::string normalize = "strict";
};

void add_common(CLI::App* cmd, Common& c, bool with_normalize = true) {
  cmd->add_option("--manifest", c.manifest, "Manifest path (default: next to the main output)");
  cmd->add_option("--workers", c.workers, "Worker threads; results do not depend on it")
      ->capture_default_str();
  if (with_normalize) {
    cmd->add_option("--normalize", c.normalize, "Off-unit embeddings: strict or warn")
        ->check(CLI::IsMember({"strict", "warn"}))
        ->capture_default_str();
  }
}

fs::path manifest_path(const Common& c, const std::string& command, const std::string& out) {
  if (!c.manifest.empty()) return c.manifest;
  if (!out.empty()) return out + ".manifest.json";
  return "rise_" + command + ".manifest.json";
}

NormalizePolicy policy_of(const Common& c) {
  return c.normalize == "warn" ? NormalizePolicy::warn : NormalizePolicy::strict;
}

std::vector<Pair> read_pairs(const fs::path& path, NormalizePolicy policy, Manifest& m) {
  m.input(path);
  std::vector<Pair> pairs;
  if (path.extension() == ".bin") {
    pairs = load_pairs_binary(path);
  } else {
    LoadedPairs loaded = load_pairs(path, policy);
    for (const LoadDiagnostic& d : loaded.diagnostics) {
      std::cerr << fmt::format("{}:{}: {}: {}\n", path.string(), d.line,
                               d.fatal ? "skipped" : "warning", d.message);
    }
    pairs = std::move(loaded.pairs);
  }
  return pairs;
}

std::vector<Pair> only_phenomenon(std::vector<Pair> pairs, const std::string& phenomenon) {
  if (phenomenon.empty()) return pairs;
  std::erase_if(pairs, [&](const Pair& p) { return p.phenomenon() != phenomenon; });
  return pairs;
}

// Groups pairs by language; records without one take `fallback`.
void group_by_language(const std::vector<Pair>& pairs, const std::string& fallback,
                       std::map<std::string, std::vector<Pair>>& out) {
  for (const Pair& p : pairs) {
    if (p.language().empty()) {
      out[fallback].emplace_back(p.neutral(), p.variant(), p.id(), fallback, p.phenomenon());
    } else {
      out[p.language()].push_back(p);
    }
  }
}

// Writes to `path`, or stdout when it is empty.
void emit(const std::string& path, const std::string& text, Manifest& m) {
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
  } else {
    write_file(path, text);
    m.output(path);
  }
}

std::string csv_number(double x) { return std::isnan(x) ? "nan" : fmt::format("{}", x); }

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// ---------------------------------------------------------------- learn

struct LearnArgs {
  Common common;
  std::string pairs, phenomenon, backend = "householder", out, language, model_id;
};

int run_learn(const LearnArgs& a, const std::string& config) {
  Manifest m("learn");
  m["config"] = config;
  m["seed"] = nullptr;
  const auto t0 = clock_type::now();
  const std::vector<Pair> pairs =
      only_phenomenon(read_pairs(a.pairs, policy_of(a.common), m), a.phenomenon);
  m.timing("load", ms_since(t0));

  LearnOptions opt;
  opt.workers = a.common.workers;
  opt.meta.phenomenon = a.phenomenon;
  opt.meta.model_id = a.model_id;
  opt.meta.language = a.language;
  if (opt.meta.language.empty() && !pairs.empty()) opt.meta.language = pairs.front().language();
  const auto t1 = clock_type::now();
  const Prototype p = learn_prototype(pairs, parse_backend(a.backend), opt);
  m.timing("learn", ms_since(t1));

  save_prototype(p, a.out);
  m.output(a.out);
  const json summary = {{"prototype", a.out},     {"dim", p.dim()},
                        {"pair_count", p.pair_count()}, {"magnitude", p.magnitude()},
                        {"backend", std::string(to_string(p.backend()))}};
  m["results"] = summary;
  m.write(manifest_path(a.common, "learn", a.out));
  std::cout << summary.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------- eval-transfer

struct EvalArgs {
  Common common;
  std::string datasets, phenomenon, backend = "householder", csv, heatmap, model_id;
  double split = 0.8;
  std::uint64_t seed = 0;
};

int run_eval_transfer(const EvalArgs& a, const std::string& config) {
  Manifest m("eval-transfer");
  m["config"] = config;
  m["seed"] = a.seed;
  if (!fs::is_directory(a.datasets)) {
    throw Error(ErrorCode::Io, "not a directory: " + a.datasets);
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a.datasets)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".jsonl" || ext == ".bin")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorCode::EmptySet, "no .jsonl or .bin files in " + a.datasets);

  std::map<std::string, std::vector<Pair>> data;
  const auto t0 = clock_type::now();
  for (const fs::path& f : files) {
    group_by_language(read_pairs(f, policy_of(a.common), m), f.stem().string(), data);
  }
  m.timing("load", ms_since(t0));

  TransferOptions opt;
  opt.phenomenon = a.phenomenon;
  opt.backend = parse_backend(a.backend);
  opt.train_fraction = a.split;
  opt.seed = a.seed;
  opt.workers = a.common.workers;
  opt.model_id = a.model_id;
  const auto t1 = clock_type::now();
  const TransferMatrix tm = transfer_matrix(data, opt);
  m.timing("evaluate", ms_since(t1));

  std::ostringstream csv;
  write_transfer_csv(tm, csv);
  emit(a.csv, csv.str(), m);
  if (!a.heatmap.empty()) {
    std::ostringstream svg;
    write_heatmap_svg(tm, svg);
    write_file(a.heatmap, svg.str());
    m.output(a.heatmap);
  }
  m["results"] = {{"languages", tm.train_languages}};
  m.write(manifest_path(a.common, "eval-transfer", a.csv));
  return 0;
}

// ---------------------------------------------------------------- baseline

struct BaselineArgs {
  Common common;
  std::string pairs, proto, phenomenon, csv;
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  double magnitude = -1.0;
};

int run_baseline(const BaselineArgs& a, const std::string& config) {
  Manifest m("baseline");
  m["config"] = config;
  m["seed"] = a.seed;
  m.input(a.proto);
  const Prototype p = load_prototype(a.proto);
  const std::string phenomenon = a.phenomenon.empty() ? p.meta().phenomenon : a.phenomenon;
  const std::vector<Pair> test =
      only_phenomenon(read_pairs(a.pairs, policy_of(a.common), m), phenomenon);
  if (test.empty()) throw Error(ErrorCode::EmptyPairSet, "no pairs to score");

  const auto t0 = clock_type::now();
  const double rise_score = score_prototype(test, p, p.backend(), a.common.workers).mean_score;
  const double magnitude = a.magnitude >= 0.0 ? a.magnitude : p.magnitude();
  const RandomBaseline rb =
      random_baseline(test, magnitude, a.trials, p.backend(), a.seed, a.common.workers);
  m.timing("baseline", ms_since(t0));

  const BaselineReport rep = make_baseline_report(phenomenon, rise_score, rb);
  std::ostringstream csv;
  write_baseline_csv(std::span(&rep, 1), csv);
  emit(a.csv, csv.str(), m);
  m["results"] = {{"rise_score", rep.rise_score},
                  {"random_mean", rep.random_mean},
                  {"random_sem", rep.random_sem},
                  {"trials", rep.trials},
                  {"magnitude", magnitude},
                  {"advantage_ratio", number_or_null(rep.advantage_ratio)}};
  m.write(manifest_path(a.common, "baseline", a.csv));
  return 0;
}

// ---------------------------------------------------------------- commute

struct CommuteArgs {
  Common common;
  std::string proto_a, proto_b, backend = "householder";
  std::vector<double> scales{0.2, 0.1, 0.05, 0.025};
  std::size_t samples = 50, dim = 64;
  double magnitude = 0.5;
  std::uint64_t seed = 0;
};

// Uniform base point with |n[0]| ≤ 0.9, away from both poles.
UnitVector base_point(std::size_t dim, Rng& rng) {
  for (;;) {
    UnitVector n = sample_uniform_sphere(dim, rng);
    if (std::abs(n[0]) <= 0.9) return n;
  }
}

int run_commute(const CommuteArgs& a, const std::string& config) {
  Manifest m("commute");
  m["config"] = config;
  m["seed"] = a.seed;
  if (a.scales.size() < 3) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("need at least 3 scales, got {}", a.scales.size()));
  }
  if (a.proto_a.empty() != a.proto_b.empty()) {
    throw Error(ErrorCode::InvalidArgument, "give both --proto-a and --proto-b, or neither");
  }
  if (a.samples == 0) throw Error(ErrorCode::InvalidArgument, "--samples must be positive");

  std::optional<Prototype> fixed_a, fixed_b;
  RotorBackend backend = parse_backend(a.backend);
  if (!a.proto_a.empty()) {
    m.input(a.proto_a);
    m.input(a.proto_b);
    fixed_a = load_prototype(a.proto_a);
    fixed_b = load_prototype(a.proto_b);
    require_same_dim(fixed_a->dim(), fixed_b->dim(), "commute prototypes");
    if (fixed_a->backend() != fixed_b->backend()) {
      throw Error(ErrorCode::BackendMismatch, "prototypes use different backends");
    }
    backend = fixed_a->backend();
  }
  const std::size_t dim = fixed_a ? fixed_a->dim() : a.dim;

  const auto t0 = clock_type::now();
  std::vector<CommutativityScaling> results(a.samples);
  for (std::size_t k = 0; k < a.samples; ++k) {
    Rng rng(a.seed, k);
    const UnitVector n0 = base_point(dim, rng);
    const Prototype pa = fixed_a ? *fixed_a : random_prototype(dim, a.magnitude, rng, backend);
    const Prototype pb = fixed_b ? *fixed_b : random_prototype(dim, a.magnitude, rng, backend);
    results[k] = commutativity_scaling(n0, pa, pb, a.scales, backend);
  }
  m.timing("commute", ms_since(t0));

  std::vector<double> slopes;
  std::size_t in_band = 0;
  std::string out = "sample,slope";
  for (double s : a.scales) out += fmt::format(",gap_{}", s);
  out += "\n";
  for (std::size_t k = 0; k < results.size(); ++k) {
    out += fmt::format("{},{}", k, csv_number(results[k].slope));
    for (double g : results[k].gaps) out += "," + csv_number(g);
    out += "\n";
    if (std::isfinite(results[k].slope)) {
      slopes.push_back(results[k].slope);
      if (results[k].slope >= 1.8 && results[k].slope <= 2.2) ++in_band;
    }
  }
  std::cout << out;
  double median = std::nan("");
  if (!slopes.empty()) {
    std::sort(slopes.begin(), slopes.end());
    const std::size_t h = slopes.size() / 2;
    median = slopes.size() % 2 ? slopes[h] : 0.5 * (slopes[h - 1] + slopes[h]);
  }
  std::cerr << fmt::format("median slope {}, {}/{} in [1.8, 2.2]\n", csv_number(median), in_band,
                           results.size());
  m["results"] = {{"median_slope", number_or_null(median)},
                  {"in_band", in_band},
                  {"samples", results.size()}};
  m.write(manifest_path(a.common, "commute", ""));
  return 0;
}

// ---------------------------------------------------------------- cross-model

struct CrossArgs {
  Common common;
  std::string anchors_src, anchors_tgt, proto, tgt_pairs, phenomenon, mode = "tangent", csv,
      out_map, out_proto, src_model, tgt_model;
  std::optional<std::size_t> pca_rank;
  double ridge = 0.0, split = 0.8;
  std::uint64_t seed = 0;
};

int run_cross_model(const CrossArgs& a, const std::string& config) {
  Manifest m("cross-model");
  m["config"] = config;
  m["seed"] = a.seed;
  m.input(a.anchors_src);
  m.input(a.anchors_tgt);
  m.input(a.proto);
  const std::vector<Anchor> src = load_anchors(a.anchors_src);
  const std::vector<Anchor> tgt = load_anchors(a.anchors_tgt);
  std::map<std::string, const UnitVector*> by_id;
  for (const Anchor& t : tgt) by_id.emplace(t.id, &t.embedding);
  std::vector<UnitVector> xs, ys;
  for (const Anchor& s : src) {
    const auto it = by_id.find(s.id);
    if (it == by_id.end()) {
      std::cerr << fmt::format("warning: anchor '{}' has no target embedding\n", s.id);
      continue;
    }
    xs.push_back(s.embedding);
    ys.push_back(*it->second);
  }
  if (xs.empty()) throw Error(ErrorCode::RankDeficient, "no anchors shared by both files");

  const auto t0 = clock_type::now();
  FitOptions fo;
  fo.pca_rank = a.pca_rank;
  fo.ridge = a.ridge;
  fo.source_model_id = a.src_model;
  fo.target_model_id = a.tgt_model;
  const SpaceMap map = fit_map(xs, ys, fo);
  m.timing("fit", ms_since(t0));
  if (!a.out_map.empty()) {
    save_space_map(map, a.out_map);
    m.output(a.out_map);
  }

  const Prototype p = load_prototype(a.proto);
  const PortMode mode = a.mode == "ambient" ? PortMode::ambient : PortMode::tangent;
  if (!a.out_proto.empty()) {
    save_prototype(port_prototype(p, map, mode), a.out_proto);
    m.output(a.out_proto);
  }

  const std::string phenomenon = a.phenomenon.empty() ? p.meta().phenomenon : a.phenomenon;
  std::map<std::string, std::vector<Pair>> data;
  group_by_language(read_pairs(a.tgt_pairs, policy_of(a.common), m), "target", data);

  TransferOptions opt;
  opt.phenomenon = phenomenon;
  opt.backend = p.backend();
  opt.train_fraction = a.split;
  opt.seed = a.seed;
  opt.workers = a.common.workers;
  opt.model_id = a.tgt_model;
  const std::string src_lang = p.meta().language.empty() ? "source" : p.meta().language;
  const auto t1 = clock_type::now();
  const TransferMatrix ported = cross_model_eval({{src_lang, p}}, map, data, opt, mode);
  const TransferMatrix native = transfer_matrix(data, opt);
  m.timing("evaluate", ms_since(t1));

  std::string out = "source_lang,target_lang,ported_mean,ported_std,native_mean,native_std,n\n";
  json rows = json::array();
  for (std::size_t j = 0; j < ported.cols(); ++j) {
    const ScoreReport& pr = ported.at(0, j);
    const ScoreReport& nr = native.at(j, j);
    out += fmt::format("{},{},{},{},{},{},{}\n", src_lang, ported.test_languages[j], pr.mean_score,
                       pr.std, nr.mean_score, nr.std, pr.n_test);
    rows.push_back({{"target_lang", ported.test_languages[j]},
                    {"ported", pr.mean_score},
                    {"native", nr.mean_score}});
  }
  emit(a.csv, out, m);
  m["results"] = {{"n_anchors", map.n_anchors}, {"scores", rows}};
  m.write(manifest_path(a.common, "cross-model", a.csv));
  return 0;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  Common common;
  std::vector<std::size_t> dims{256, 1024, 4096, 16384};
  std::size_t reps = 7;
  std::string backend = "householder";
};

int run_bench(const BenchArgs& a, const std::string& config) {
  Manifest m("bench");
  m["config"] = config;
  m["seed"] = nullptr;
  m["machine"] = machine_info();
  if (a.dims.size() < 4) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("need at least 4 dimensions, got {}", a.dims.size()));
  }
  const auto t0 = clock_type::now();
  const ComplexityReport r = complexity_probe(a.dims, a.reps, parse_backend(a.backend));
  m.timing("probe", ms_since(t0));

  json rows = json::array();
  for (const ComplexityRow& row : r.rows) {
    rows.push_back({{"dim", row.dim}, {"ns_per_op", row.ns_per_op}});
  }
  const json report = {{"rows", rows}, {"slope", r.slope}};
  std::cout << report.dump() << "\n";
  m["results"] = report;
  m.write(manifest_path(a.common, "bench", ""));
  return 0;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  Common common;
  SynthSpec spec;
  std::string backend = "householder", out, truth;
};

int run_synth(SynthArgs a, const std::string& config) {
  Manifest m("synth");
  m["config"] = config;
  m["seed"] = a.spec.seed;
  a.spec.backend = parse_backend(a.backend);
  const SynthDataset ds = generate(a.spec);
  if (fs::path(a.out).extension() == ".bin") {
    save_pairs_binary(ds.pairs, a.out);
  } else {
    save_pairs(ds.pairs, a.out);
  }
  m.output(a.out);
  if (!a.truth.empty()) {
    Prototype truth = ds.p_true;
    truth.meta().phenomenon = a.spec.phenomenon;
    truth.meta().language = a.spec.language;
    save_prototype(truth, a.truth);
    m.output(a.truth);
  }
  const json summary = {{"pairs", a.out}, {"count", ds.pairs.size()}, {"dim", a.spec.dim}};
  m["results"] = summary;
  m.write(manifest_path(a.common, "synth", a.out));
  std::cout << summary.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------- embed

struct EmbedArgs {
  Common common;
  std::string input, out, endpoint, model, token_env, wire = "openai", cache_dir;
  std::size_t batch_size = 64, timeout_ms = 30000, max_in_flight = 1, attempts = 3;
};

int run_embed(const EmbedArgs& a, const std::string& config) {
  Manifest m("embed");
  m["config"] = config;
  m["seed"] = nullptr;
  m.input(a.input);

  std::vector<json> records;
  std::vector<std::string> texts;
  std::istringstream in(read_file(a.input));
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json r;
    try {
      r = json::parse(line);
      texts.push_back(r.at("neutral_text").get<std::string>());
      texts.push_back(r.at("variant_text").get<std::string>());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Parse, fmt::format("line {}: {}", line_no, e.what()));
    }
    records.push_back(std::move(r));
  }
  if (records.empty()) throw Error(ErrorCode::EmptyPairSet, "no records in " + a.input);

  ProviderConfig cfg;
  cfg.endpoint_url = a.endpoint;
  cfg.model_id = a.model;
  cfg.auth_token_env_var = a.token_env;
  cfg.batch_size = a.batch_size;
  cfg.timeout_ms = a.timeout_ms;
  cfg.retry.max_attempts = a.attempts;
  cfg.max_in_flight = a.max_in_flight;
  cfg.wire = a.wire == "ollama" ? WireFormat::ollama : WireFormat::openai;
  cfg.cache_dir = a.cache_dir;

  const auto t0 = clock_type::now();
  FetchStats stats;
  const std::vector<Vec> emb = fetch_embeddings(texts, cfg, &stats);
  m.timing("fetch", ms_since(t0));

  std::string out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    json& r = records[i];
    r["neutral_embedding"] = emb[2 * i];
    r["variant_embedding"] = emb[2 * i + 1];
    out += r.dump() + "\n";
  }
  write_file(a.out, out);
  m.output(a.out);
  std::cerr << fmt::format("{} texts, {} requests, {} cache hits\n", texts.size(), stats.requests,
                           stats.cache_hits);
  m["results"] = {{"records", records.size()},
                  {"requests", stats.requests},
                  {"cache_hits", stats.cache_hits}};
  m.write(manifest_path(a.common, "embed", a.out));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rotor-invariant shift estimation on the embedding hypersphere"};
  app.set_version_flag("--version", std::string(RISE_VERSION));
  app.set_config("--config", "", "INI or TOML file; sections are named after subcommands");
  app.require_subcommand(1);
  app.fallthrough();

  const std::vector<std::string> backends{"householder", "givens", "two_step", "two-step"};

  LearnArgs learn;
  auto* c_learn = app.add_subcommand("learn", "Learn a prototype from a pair set");
  c_learn->add_option("--pairs", learn.pairs, "Pair set (.jsonl or .bin)")->required();
  c_learn->add_option("--phenomenon", learn.phenomenon, "Keep only pairs with this tag");
  c_learn->add_option("--backend", learn.backend)->check(CLI::IsMember(backends))
      ->capture_default_str();
  c_learn->add_option("--out", learn.out, "Prototype JSON to write")->required();
  c_learn->add_option("--language", learn.language, "Language recorded in the prototype");
  c_learn->add_option("--model-id", learn.model_id, "Embedding model recorded in the prototype");
  add_common(c_learn, learn.common);

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval-transfer", "Cross-language transfer matrix");
  c_eval->add_option("--datasets", ev.datasets, "Directory of pair sets")->required();
  c_eval->add_option("--phenomenon", ev.phenomenon, "Keep only pairs with this tag");
  c_eval->add_option("--split", ev.split, "Train fraction")->capture_default_str();
  c_eval->add_option("--seed", ev.seed)->capture_default_str();
  c_eval->add_option("--csv", ev.csv, "CSV output (default: stdout)");
  c_eval->add_option("--heatmap", ev.heatmap, "SVG heatmap output");
  c_eval->add_option("--backend", ev.backend)->check(CLI::IsMember(backends))
      ->capture_default_str();
  c_eval->add_option("--model-id", ev.model_id);
  add_common(c_eval, ev.common);

  BaselineArgs bl;
  auto* c_base = app.add_subcommand("baseline", "Random-prototype baseline and advantage ratio");
  c_base->add_option("--pairs", bl.pairs, "Held-out pair set")->required();
  c_base->add_option("--proto", bl.proto, "Learned prototype")->required();
  c_base->add_option("--trials", bl.trials)->capture_default_str();
  c_base->add_option("--seed", bl.seed)->capture_default_str();
  c_base->add_option("--magnitude", bl.magnitude, "Random magnitude (default: the prototype's)");
  c_base->add_option("--phenomenon", bl.phenomenon, "Default: the prototype's phenomenon");
  c_base->add_option("--csv", bl.csv, "CSV output (default: stdout)");
  add_common(c_base, bl.common);

  CommuteArgs cm;
  auto* c_comm = app.add_subcommand("commute", "Commutativity gap scaling");
  c_comm->add_option("--proto-a", cm.proto_a);
  c_comm->add_option("--proto-b", cm.proto_b);
  c_comm->add_option("--scales", cm.scales)->delimiter(',')->capture_default_str();
  c_comm->add_option("--samples", cm.samples, "Base points (and random pairs)")
      ->capture_default_str();
  c_comm->add_option("--dim", cm.dim, "Dimension for random prototypes")->capture_default_str();
  c_comm->add_option("--magnitude", cm.magnitude, "Magnitude of random prototypes")
      ->capture_default_str();
  c_comm->add_option("--backend", cm.backend)->check(CLI::IsMember(backends))
      ->capture_default_str();
  c_comm->add_option("--seed", cm.seed)->capture_default_str();
  add_common(c_comm, cm.common, false);

  CrossArgs cx;
  auto* c_cross = app.add_subcommand("cross-model", "Port a prototype through an anchor-fitted map");
  c_cross->add_option("--anchors-src", cx.anchors_src)->required();
  c_cross->add_option("--anchors-tgt", cx.anchors_tgt)->required();
  c_cross->add_option("--proto", cx.proto, "Source-space prototype")->required();
  c_cross->add_option("--tgt-pairs", cx.tgt_pairs, "Target-space pair set")->required();
  c_cross->add_option("--phenomenon", cx.phenomenon, "Default: the prototype's phenomenon");
  c_cross->add_option("--pca-rank", cx.pca_rank);
  c_cross->add_option("--ridge", cx.ridge)->capture_default_str();
  c_cross->add_option("--mode", cx.mode)->check(CLI::IsMember({"tangent", "ambient"}))
      ->capture_default_str();
  c_cross->add_option("--split", cx.split)->capture_default_str();
  c_cross->add_option("--seed", cx.seed)->capture_default_str();
  c_cross->add_option("--csv", cx.csv, "CSV output (default: stdout)");
  c_cross->add_option("--out-map", cx.out_map, "Write the fitted map");
  c_cross->add_option("--out-proto", cx.out_proto, "Write the ported prototype");
  c_cross->add_option("--src-model", cx.src_model);
  c_cross->add_option("--tgt-model", cx.tgt_model);
  add_common(c_cross, cx.common);

  BenchArgs bn;
  auto* c_bench = app.add_subcommand("bench", "Per-dimension cost of the geometry core");
  c_bench->add_option("--dims", bn.dims)->delimiter(',')->capture_default_str();
  c_bench->add_option("--reps", bn.reps)->capture_default_str();
  c_bench->add_option("--backend", bn.backend)->check(CLI::IsMember(backends))
      ->capture_default_str();
  add_common(c_bench, bn.common, false);

  SynthArgs sy;
  auto* c_synth = app.add_subcommand("synth", "Generate a planted synthetic pair set");
  c_synth->add_option("--dim", sy.spec.dim)->capture_default_str();
  c_synth->add_option("--pairs", sy.spec.n_pairs)->capture_default_str();
  c_synth->add_option("--magnitude", sy.spec.planted_magnitude)->capture_default_str();
  c_synth->add_option("--sigma", sy.spec.noise_sigma)->capture_default_str();
  c_synth->add_option("--seed", sy.spec.seed)->capture_default_str();
  c_synth->add_option("--language", sy.spec.language)->capture_default_str();
  c_synth->add_option("--phenomenon", sy.spec.phenomenon)->capture_default_str();
  c_synth->add_option("--backend", sy.backend)->check(CLI::IsMember(backends))
      ->capture_default_str();
  c_synth->add_option("--out", sy.out, "Pair set to write (.jsonl or .bin)")->required();
  c_synth->add_option("--truth", sy.truth, "Write the planted prototype");
  add_common(c_synth, sy.common, false);

  EmbedArgs em;
  auto* c_embed = app.add_subcommand("embed", "Embed text pairs through an HTTP provider");
  c_embed->add_option("--input", em.input, "JSONL with neutral_text and variant_text")->required();
  c_embed->add_option("--out", em.out, "Pair set to write")->required();
  c_embed->add_option("--endpoint", em.endpoint)->required();
  c_embed->add_option("--model", em.model)->required();
  c_embed->add_option("--token-env", em.token_env, "Environment variable holding the API token");
  c_embed->add_option("--wire", em.wire)->check(CLI::IsMember({"openai", "ollama"}))
      ->capture_default_str();
  c_embed->add_option("--cache-dir", em.cache_dir);
  c_embed->add_option("--batch-size", em.batch_size)->capture_default_str();
  c_embed->add_option("--timeout-ms", em.timeout_ms)->capture_default_str();
  c_embed->add_option("--max-in-flight", em.max_in_flight)->capture_default_str();
  c_embed->add_option("--attempts", em.attempts)->capture_default_str();
  add_common(c_embed, em.common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorCode::InvalidArgument);
  }

  // Effective values of the invoked subcommand, after flags and config merge.
  CLI::App* used = app.get_subcommands().front();
  const std::string config = "[" + used->get_name() + "]\n" + used->config_to_str(true, false);
  try {
    if (*c_learn) return run_learn(learn, config);
    if (*c_eval) return run_eval_transfer(ev, config);
    if (*c_base) return run_baseline(bl, config);
    if (*c_comm) return run_commute(cm, config);
    if (*c_cross) return run_cross_model(cx, config);
    if (*c_bench) return run_bench(bn, config);
    if (*c_synth) return run_synth(sy, config);
    if (*c_embed) return run_embed(em, config);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
