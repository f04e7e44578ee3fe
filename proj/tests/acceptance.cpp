// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and sizes are
// pinned below; the process exits non-zero if any criterion fails.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <fmt/format.h>
#include <json.hpp>

#include "clifford.hpp"
#include "rise/core.hpp"
#include "rise/cross_model.hpp"
#include "rise/error.hpp"
#include "rise/eval.hpp"
#include "rise/io.hpp"
#include "rise/synth.hpp"
#include "test_support.hpp"

// ---------------------------------------------------------------- allocation counting

namespace {
std::atomic<bool> g_counting{false};
std::atomic<std::size_t> g_largest{0};
}  // namespace

void* operator new(std::size_t n) {
  if (g_counting.load(std::memory_order_relaxed)) {
    std::size_t cur = g_largest.load();
    while (n > cur && !g_largest.compare_exchange_weak(cur, n)) {
    }
  }
  if (void* p = std::malloc(n == 0 ? 1 : n)) return p;
  throw std::bad_alloc();
}
void* operator new[](std::size_t n) { return operator new(n); }
void operator delete(void* p) noexcept { std::free(p); }
void operator delete[](void* p) noexcept { std::free(p); }
void operator delete(void* p, std::size_t) noexcept { std::free(p); }
void operator delete[](void* p, std::size_t) noexcept { std::free(p); }

namespace {

using namespace rise;
using testing::random_unit;
using clock_type = std::chrono::steady_clock;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- pinned tolerances

constexpr double kRoundTripTol = 1e-9;
constexpr double kRoundTripSeconds = 10.0;
constexpr double kRotorTol = 1e-12;
constexpr double kCliffordTol = 1e-10;
constexpr double kPlantedAngleTol = 1e-8;
constexpr double kPlantedScoreTol = 1e-9;
constexpr int kMonotoneSeeds = 20;
constexpr int kMoreDataMinWins = 18;
constexpr double kSlopeLo = 1.8, kSlopeHi = 2.2;
constexpr int kCommuteCases = 50, kCommuteMinPass = 45;
constexpr double kCommuteSeconds = 30.0;
constexpr double kComplexityLo = 0.8, kComplexityHi = 1.3;
constexpr std::size_t kBaselineTrials = 10000;
constexpr double kBaselineSeconds = 60.0;
// Frozen from the one-time oracle run (observed advantage ratio 1.0958 on this
// dataset and seed), rounded down with a 0.0158 margin.
constexpr double kAdvantageThreshold = 1.08;
constexpr double kRatioIdentityTol = 1e-12;
constexpr double kMapRecoveryTol = 1e-6;
constexpr double kPortedScoreTol = 1e-6;
constexpr double kRankReducedFraction = 0.95;

struct Result {
  bool pass;
  std::string detail;
};

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

SynthSpec planted_spec(double sigma) {
  SynthSpec spec;
  spec.dim = 512;
  spec.n_pairs = 500;
  spec.planted_magnitude = 0.3;
  spec.noise_sigma = sigma;
  spec.seed = 20260101;
  spec.phenomenon = "planted";
  return spec;
}

// ---------------------------------------------------------------- criteria

Result geometry_round_trip() {
  const auto t0 = clock_type::now();
  Rng rng(1);
  double worst = 0.0;
  for (std::size_t d : {2u, 8u, 768u, 3072u}) {
    int done = 0;
    while (done < 1000) {
      const UnitVector n = random_unit(d, rng);
      const UnitVector v = random_unit(d, rng);
      if (vec::dot(n.coords(), v.coords()) <= -1.0 + 1e-6) continue;
      worst = std::max(worst, vec::distance(exp_map(log_map(n, v)).coords(), v.coords()));
      ++done;
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= kRoundTripTol && secs < kRoundTripSeconds,
          fmt::format("max |exp(log(n,v)) - v| = {:.3g} (tol {:.0e}), {:.2f} s (limit {:.0f} s)",
                      worst, kRoundTripTol, secs, kRoundTripSeconds)};
}

Result rotor_correctness() {
  Rng rng(2);
  double defining = 0.0, isometry = 0.0, involution = 0.0, clifford = 0.0;
  const RotorBackend backends[] = {RotorBackend::householder, RotorBackend::givens,
                                   RotorBackend::two_step};
  for (std::size_t d : {8u, 1024u}) {
    const Vec e1 = UnitVector::basis(d, 0).vec();
    for (int i = 0; i < 1000; ++i) {
      const UnitVector n = random_unit(d, rng);
      const Vec x = random_unit(d, rng).vec();
      const Vec y = random_unit(d, rng).vec();
      const Vec oracle = d <= 8 && n[0] > -1.0 + 1e-6
                             ? testing::sandwich(testing::clifford_rotor(n), n.coords())
                             : Vec{};
      for (RotorBackend b : backends) {
        const Rotor r = Rotor::build(n, b);
        const Vec rn = r.apply(n.coords());
        defining = std::max(defining, vec::distance(rn, e1));
        const Vec rx = r.apply(x), ry = r.apply(y);
        isometry = std::max(isometry, std::abs(vec::dot(rx, ry) - vec::dot(x, y)));
        isometry = std::max(isometry, std::abs(vec::norm(rx) - vec::norm(x)));
        if (b == RotorBackend::householder) {
          involution = std::max(involution, vec::distance(r.apply(rx), x));
        }
        if (!oracle.empty()) clifford = std::max(clifford, testing::max_abs_diff(rn, oracle));
      }
    }
  }
  const bool ok = defining <= kRotorTol && isometry <= kRotorTol && involution <= kRotorTol &&
                  clifford <= kCliffordTol;
  return {ok, fmt::format("|R(n)n - e1| {:.3g}, isometry {:.3g}, involution {:.3g} (tol {:.0e}); "
                          "Clifford oracle d=8 {:.3g} (tol {:.0e})",
                          defining, isometry, involution, kRotorTol, clifford, kCliffordTol)};
}

Result exact_planted_recovery() {
  const SynthDataset ds = generate(planted_spec(0.0));
  const Prototype full = learn_prototype(ds.pairs);
  const double angle = vec::distance(full.vec(), ds.p_true.vec());
  const Split s = split(ds.pairs, 0.8, 7);
  const double score = score_prototype(s.test, learn_prototype(s.train)).mean_score;
  const bool ok = angle <= kPlantedAngleTol && std::abs(score - 1.0) <= kPlantedScoreTol;
  return {ok, fmt::format("angular error {:.3g} (tol {:.0e}), held-out score 1 - {:.3g} (tol {:.0e})",
                          angle, kPlantedAngleTol, 1.0 - score, kPlantedScoreTol)};
}

Result noisy_monotonicity() {
  // Mean held-out score (d=64, M=500, 80/20 split) over seeds 0..19 for each σ.
  const double sigmas[] = {0.01, 0.05, 0.1};
  double means[3] = {0, 0, 0};
  for (int k = 0; k < 3; ++k) {
    for (int seed = 0; seed < kMonotoneSeeds; ++seed) {
      SynthSpec spec;
      spec.dim = 64;
      spec.n_pairs = 500;
      spec.noise_sigma = sigmas[k];
      spec.seed = static_cast<std::uint64_t>(seed);
      const Split s = split(generate(spec).pairs, 0.8, static_cast<std::uint64_t>(seed));
      means[k] += score_prototype(s.test, learn_prototype(s.train)).mean_score / kMonotoneSeeds;
    }
  }
  const bool decreasing = means[0] > means[1] && means[1] > means[2];

  // M=200 vs M=2000 training pairs (prefixes of one stream), scored on the same
  // 2000 held-out pairs at σ=0.1.
  int wins = 0;
  for (int seed = 0; seed < kMonotoneSeeds; ++seed) {
    SynthSpec spec;
    spec.dim = 64;
    spec.n_pairs = 4000;
    spec.noise_sigma = 0.1;
    spec.seed = 1000 + static_cast<std::uint64_t>(seed);
    const std::vector<Pair> all = generate(spec).pairs;
    const std::span<const Pair> test(all.data() + 2000, 2000);
    const double small = score_prototype(test, learn_prototype(std::span(all.data(), 200))).mean_score;
    const double big = score_prototype(test, learn_prototype(std::span(all.data(), 2000))).mean_score;
    if (big > small) ++wins;
  }
  return {decreasing && wins >= kMoreDataMinWins,
          fmt::format("mean scores {:.6f} > {:.6f} > {:.6f}: {}; M=2000 beats M=200 in {}/{} "
                      "seeds (need {})",
                      means[0], means[1], means[2], decreasing ? "yes" : "no", wins,
                      kMonotoneSeeds, kMoreDataMinWins)};
}

Result commutativity_law() {
  const auto t0 = clock_type::now();
  Rng rng(5);
  const double scales[] = {0.2, 0.1, 0.05, 0.025};
  int in_band = 0;
  double lo = 1e9, hi = -1e9;
  for (int i = 0; i < kCommuteCases; ++i) {
    const std::size_t d = 3 + rng.below(62);
    const UnitVector n0 = testing::random_unit_away_from_poles(d, rng);
    const Prototype a = random_prototype(d, 0.5, rng);
    const Prototype b = random_prototype(d, 0.5, rng);
    const double slope = commutativity_scaling(n0, a, b, scales).slope;
    lo = std::min(lo, slope);
    hi = std::max(hi, slope);
    if (slope >= kSlopeLo && slope <= kSlopeHi) ++in_band;
  }
  const double secs = seconds_since(t0);
  return {in_band >= kCommuteMinPass && secs < kCommuteSeconds,
          fmt::format("{}/{} slopes in [{}, {}] (need {}), d in [3, 64], range [{:.3f}, {:.3f}], {:.2f} s", in_band,
                      kCommuteCases, kSlopeLo, kSlopeHi, kCommuteMinPass, lo, hi, secs)};
}

Result complexity() {
  const std::size_t dims[] = {256, 1024, 4096, 16384};
  const ComplexityReport r = complexity_probe(dims, 7);

  // Largest single allocation of every core operation at d = 16384.
  const std::size_t d = 16384;
  Rng rng(6);
  const UnitVector n = sample_uniform_sphere(d, rng);
  const UnitVector v = sample_uniform_sphere(d, rng);
  const Prototype pa = random_prototype(d, 0.3, rng);
  const Prototype pb = random_prototype(d, 0.2, rng);
  const std::vector<Pair> pairs(4, Pair(n, v));
  const TangentVector xi = log_map(n, v);
  g_largest = 0;
  g_counting = true;
  (void)normalize(v.coords());
  (void)exp_map(xi);
  (void)log_map(n, v);
  (void)parallel_transport(xi, v);
  for (RotorBackend b : {RotorBackend::householder, RotorBackend::givens, RotorBackend::two_step}) {
    (void)Rotor::build(n, b).apply(v.coords());
  }
  (void)learn_prototype(pairs);
  (void)predict(n, pa);
  (void)commutativity_gap(n, pa, pb);
  g_counting = false;
  const std::size_t largest = g_largest;
  const bool linear_memory = largest <= 4 * d * sizeof(double);

  std::string rows;
  for (const ComplexityRow& row : r.rows) rows += fmt::format(" {}:{:.0f}ns", row.dim, row.ns_per_op);
  return {r.slope >= kComplexityLo && r.slope <= kComplexityHi && linear_memory,
          fmt::format("log-log slope {:.3f} in [{}, {}];{}; largest allocation {} B at d={} "
                      "(d^2 doubles would be {} B)",
                      r.slope, kComplexityLo, kComplexityHi, rows, largest, d,
                      d * d * sizeof(double))};
}

Result random_baseline_battery() {
  const SynthDataset ds = generate(planted_spec(0.05));
  const Split s = split(ds.pairs, 0.8, 7);
  const Prototype learned = learn_prototype(s.train);
  const double rise_score = score_prototype(s.test, learned).mean_score;
  const auto t0 = clock_type::now();
  const RandomBaseline rb =
      random_baseline(s.test, learned.magnitude(), kBaselineTrials, RotorBackend::householder, 99);
  const double secs = seconds_since(t0);
  const BaselineReport rep = make_baseline_report("planted", rise_score, rb);
  const double identity = std::abs(rep.advantage_ratio * rep.random_mean - rep.rise_score);
  const bool ok = secs < kBaselineSeconds && rep.advantage_ratio > kAdvantageThreshold &&
                  identity <= kRatioIdentityTol;
  return {ok, fmt::format("{} trials in {:.2f} s (limit {:.0f} s); rise {:.6f}, random {:.6f} ± "
                          "{:.2g}, ratio {:.4f} > {:.2f}; |ratio*random - rise| = {:.2g}",
                          rb.trials, secs, kBaselineSeconds, rise_score, rep.random_mean,
                          rep.random_sem, rep.advantage_ratio, kAdvantageThreshold, identity)};
}

UnitVector map_unit(const Eigen::MatrixXd& m, const UnitVector& x) {
  return normalize(testing::to_vec(m * testing::to_eigen(x.coords())));
}

std::vector<Pair> map_pairs(const Eigen::MatrixXd& m, std::span<const Pair> pairs) {
  std::vector<Pair> out;
  for (const Pair& p : pairs) {
    out.emplace_back(map_unit(m, p.neutral()), map_unit(m, p.variant()), p.id(), p.language(),
                     p.phenomenon());
  }
  return out;
}

// d × k orthonormal frame whose first column is e1.
Eigen::MatrixXd frame_with_e1(std::size_t d, std::size_t k, Rng& rng) {
  Eigen::MatrixXd a(d, k);
  a.col(0) = Eigen::VectorXd::Unit(d, 0);
  for (std::size_t j = 1; j < k; ++j) a.col(j) = testing::to_eigen(random_unit(d, rng).coords());
  Eigen::MatrixXd q =
      Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ() * Eigen::MatrixXd::Identity(d, k);
  if (q(0, 0) < 0) q.col(0) = -q.col(0);
  return q;
}

Result cross_model_oracle() {
  Rng rng(8);
  const std::size_t d = 48;
  // Q fixes e1: product of reflections with vectors orthogonal to e1.
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(d, d);
  for (int i = 0; i < 8; ++i) {
    Vec w = random_unit(d, rng).vec();
    w[0] = 0.0;
    const Eigen::VectorXd u = testing::to_eigen(w).normalized();
    q = (Eigen::MatrixXd::Identity(d, d) - 2.0 * u * u.transpose()) * q;
  }
  std::vector<UnitVector> a_src, a_tgt;
  for (std::size_t i = 0; i < 3 * d; ++i) {
    a_src.push_back(random_unit(d, rng));
    a_tgt.push_back(map_unit(q, a_src.back()));
  }
  const SpaceMap m = fit_map(a_src, a_tgt);
  const double recovery = (m.matrix - q).cwiseAbs().maxCoeff();

  SynthSpec spec;
  spec.dim = d;
  spec.n_pairs = 400;
  spec.seed = 9;
  const std::vector<Pair> src = generate(spec).pairs;
  TransferOptions opt;
  opt.seed = 3;
  const Split s = split(src, 0.8, opt.seed);
  const double diag = cross_model_eval({{"synth", learn_prototype(s.train)}}, m,
                                       {{"synth", map_pairs(q, src)}}, opt)
                          .at(0, 0)
                          .mean_score;

  // Rank-reduced: k-dimensional signal subspace, smaller target space.
  const std::size_t k = 8, d_tgt = 24;
  const Eigen::MatrixXd sf = frame_with_e1(d, k, rng);
  const Eigen::MatrixXd b = frame_with_e1(d_tgt, k, rng) * sf.transpose();
  spec.dim = k;
  spec.noise_sigma = 0.05;
  const std::vector<Pair> low = generate(spec).pairs;
  const std::vector<Pair> lifted = map_pairs(sf, low);
  const std::vector<Pair> target = map_pairs(b, lifted);
  std::vector<UnitVector> r_src, r_tgt;
  for (int i = 0; i < 80; ++i) {
    r_src.push_back(map_unit(sf, random_unit(k, rng)));
    r_tgt.push_back(map_unit(b, r_src.back()));
  }
  const SpaceMap reduced = fit_map(r_src, r_tgt, {.pca_rank = k});
  const std::map<std::string, std::vector<Pair>> tgt_sets{{"synth", target}};
  const double native = transfer_matrix(tgt_sets, opt).at(0, 0).mean_score;
  const Split ls = split(lifted, 0.8, opt.seed);
  const double ported =
      cross_model_eval({{"synth", learn_prototype(ls.train)}}, reduced, tgt_sets, opt)
          .at(0, 0)
          .mean_score;

  const bool ok = recovery <= kMapRecoveryTol && std::abs(diag - 1.0) <= kPortedScoreTol &&
                  ported >= kRankReducedFraction * native;
  return {ok, fmt::format("|W - Q|max {:.3g} (tol {:.0e}); ported diagonal 1 - {:.3g} (tol {:.0e}); "
                          "rank-{} map {}->{}: ported {:.6f} vs native {:.6f} (need >= {:.2f}x)",
                          recovery, kMapRecoveryTol, 1.0 - diag, kPortedScoreTol, k, d, d_tgt,
                          ported, native, kRankReducedFraction)};
}

Result transfer_determinism() {
  std::map<std::string, std::vector<Pair>> data;
  const char* langs[] = {"de", "en", "sw", "zu"};
  for (std::size_t i = 0; i < 4; ++i) {
    SynthSpec spec;
    spec.dim = 96;
    spec.n_pairs = 150;
    spec.noise_sigma = 0.05 * static_cast<double>(i + 1);
    spec.seed = 40 + i;
    spec.language = langs[i];
    spec.phenomenon = "neg";
    data.emplace(langs[i], generate(spec).pairs);
  }
  auto render = [&](std::size_t workers) {
    TransferOptions opt;
    opt.phenomenon = "neg";
    opt.seed = 17;
    opt.workers = workers;
    opt.model_id = "synthetic";
    const TransferMatrix m = transfer_matrix(data, opt);
    std::ostringstream csv, svg;
    write_transfer_csv(m, csv);
    write_heatmap_svg(m, svg);
    return std::pair(csv.str(), svg.str());
  };
  const auto ref = render(1);
  int identical = 0, runs = 0;
  for (std::size_t w : {1u, 1u, 2u, 4u, 8u}) {
    ++runs;
    if (render(w) == ref) ++identical;
  }
  return {identical == runs,
          fmt::format("{}/{} runs (workers 1,1,2,4,8) byte-identical; CSV sha256 {}..., SVG sha256 "
                      "{}...",
                      identical, runs, sha256_hex(ref.first).substr(0, 12),
                      sha256_hex(ref.second).substr(0, 12))};
}

Result persistence() {
  const fs::path dir = fs::temp_directory_path() / fmt::format("rise_accept_{}", ::getpid());
  fs::create_directories(dir);
  Rng rng(10);
  std::vector<std::string> failures;

  Prototype p = random_prototype(300, 0.41, rng, RotorBackend::givens);
  p.meta() = {"neg", "en", "model-a", "", 0.5, 0.25};
  save_prototype(p, dir / "p.json");
  if (!(load_prototype(dir / "p.json") == p)) failures.push_back("prototype");

  SpaceMap m;
  m.matrix = Eigen::MatrixXd::Random(7, 11);
  m.source_model_id = "a";
  m.target_model_id = "b";
  m.n_anchors = 20;
  m.pca_rank = 5;
  m.ridge = 1e-3;
  save_space_map(m, dir / "m.json");
  if (!(load_space_map(dir / "m.json") == m)) failures.push_back("space map");

  SynthSpec spec;
  spec.dim = 33;
  spec.n_pairs = 40;
  spec.noise_sigma = 0.1;
  const std::vector<Pair> pairs = generate(spec).pairs;
  save_pairs(pairs, dir / "p.jsonl");
  if (load_pairs(dir / "p.jsonl").pairs != pairs) failures.push_back("pairs jsonl");
  save_pairs_binary(pairs, dir / "p.bin");
  if (load_pairs_binary(dir / "p.bin") != pairs) failures.push_back("pairs binary");

  auto rejects_version = [](auto&& load) {
    try {
      load();
    } catch (const Error& e) {
      return e.code() == ErrorCode::Version;
    }
    return false;
  };
  nlohmann::json pj = nlohmann::json::parse(prototype_to_json(p));
  pj["format_version"] = kPrototypeFormatVersion + 1;
  if (!rejects_version([&] { prototype_from_json(pj.dump()); })) failures.push_back("proto version");
  nlohmann::json mj = nlohmann::json::parse(space_map_to_json(m));
  mj["format_version"] = kSpaceMapFormatVersion + 1;
  if (!rejects_version([&] { space_map_from_json(mj.dump()); })) failures.push_back("map version");
  std::string bin = read_file(dir / "p.bin");
  bin[bin.find("\"format_version\":1") + 17] = '2';
  write_file(dir / "v.bin", bin);
  if (!rejects_version([&] { load_pairs_binary(dir / "v.bin"); })) failures.push_back("bin version");

  fs::remove_all(dir);
  std::string joined;
  for (const auto& f : failures) joined += " " + f;
  return {failures.empty(),
          failures.empty()
              ? "prototype, space map, pair JSONL and pair binary reload bit-exactly; bumped "
                "format_version rejected for all three formats"
              : "failed:" + joined};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Result()> run;
  };
  const Criterion criteria[] = {
      {"geometry round-trip", geometry_round_trip},
      {"rotor correctness", rotor_correctness},
      {"exact planted recovery", exact_planted_recovery},
      {"noisy recovery monotonicity", noisy_monotonicity},
      {"commutativity scaling law", commutativity_law},
      {"complexity", complexity},
      {"random-baseline battery", random_baseline_battery},
      {"cross-model synthetic oracle", cross_model_oracle},
      {"transfer-matrix determinism", transfer_determinism},
      {"persistence round-trips", persistence},
  };
  int failed = 0;
  int index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    Result r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    if (!r.pass) ++failed;
    std::printf("%s criterion %d (%s): %s\n", r.pass ? "PASS" : "FAIL", index, c.name,
                r.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", index - failed, index);
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
