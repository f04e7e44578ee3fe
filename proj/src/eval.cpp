#include "rise/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numeric>
#include <ostream>

#include "rise/error.hpp"
#include "rise/parallel.hpp"
#include "rise/synth.hpp"

namespace rise {

namespace {

double cosine(std::span<const double> a, std::span<const double> b) {
  const double c = vec::dot(a, b) / (vec::norm(a) * vec::norm(b));
  return std::clamp(c, -1.0, 1.0);
}

UnitVector predict_with(const Rotor& r, const UnitVector& n, const Prototype& p) {
  return exp_map(TangentVector::projected(n, r.apply_transpose(p.vec())));
}

ScoreReport summarize(std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorCode::EmptySet, "no scores to summarize");
  ScoreReport r;
  r.n_test = scores.size();
  double sum = 0.0;
  for (double s : scores) sum += s;
  r.mean_score = sum / static_cast<double>(scores.size());
  if (scores.size() > 1) {
    double ss = 0.0;
    for (double s : scores) ss += (s - r.mean_score) * (s - r.mean_score);
    r.std = std::sqrt(ss / static_cast<double>(scores.size() - 1));
  }
  return r;
}

std::vector<Pair> filter_phenomenon(const std::vector<Pair>& pairs, const std::string& phenomenon) {
  if (phenomenon.empty()) return pairs;
  std::vector<Pair> out;
  for (const Pair& p : pairs) {
    if (p.phenomenon() == phenomenon) out.push_back(p);
  }
  return out;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

ScoreReport rotor_alignment_score(std::span<const UnitVector> predicted,
                                  std::span<const UnitVector> targets) {
  if (predicted.empty()) throw Error(ErrorCode::EmptySet, "no predictions to score");
  require_same_dim(predicted.size(), targets.size(), "prediction/target count");
  std::vector<double> scores(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    require_same_dim(predicted[i].dim(), targets[i].dim(), "score");
    scores[i] = cosine(predicted[i].coords(), targets[i].coords());
  }
  return summarize(scores);
}

ScoreReport score_prototype(std::span<const Pair> test, const Prototype& p, RotorBackend backend,
                            std::size_t workers) {
  if (test.empty()) throw Error(ErrorCode::EmptySet, "empty test set");
  std::vector<double> scores(test.size());
  parallel_for(test.size(), workers, [&](std::size_t i) {
    const UnitVector pred = predict(test[i].neutral(), p, backend);
    scores[i] = cosine(pred.coords(), test[i].variant().coords());
  });
  ScoreReport r = summarize(scores);
  r.phenomenon = p.meta().phenomenon;
  r.train_lang = p.meta().language;
  r.test_lang = test.front().language();
  r.model_id = p.meta().model_id;
  return r;
}

Split split(std::span<const Pair> pairs, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::DegenerateSplit,
                fmt::format("train fraction {} must lie strictly between 0 and 1", train_fraction));
  }
  const std::size_t n = pairs.size();
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train >= n) {
    throw Error(ErrorCode::DegenerateSplit,
                fmt::format("fraction {} of {} pairs leaves an empty side", train_fraction, n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng.below(i + 1)]);
  }
  Split out;
  out.train.reserve(n_train);
  out.test.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_train ? out.train : out.test).push_back(pairs[order[i]]);
  }
  return out;
}

namespace {

std::map<std::string, Split> split_all(const std::map<std::string, std::vector<Pair>>& datasets,
                                       const TransferOptions& options) {
  std::map<std::string, Split> splits;
  std::size_t dim = 0;
  for (const auto& [lang, pairs] : datasets) {
    std::vector<Pair> filtered = filter_phenomenon(pairs, options.phenomenon);
    if (filtered.empty()) {
      throw Error(ErrorCode::EmptyPairSet,
                  fmt::format("language '{}' has no pairs for phenomenon '{}'", lang,
                              options.phenomenon));
    }
    if (dim == 0) dim = filtered.front().dim();
    require_same_dim(dim, filtered.front().dim(), "transfer datasets");
    splits.emplace(lang, split(filtered, options.train_fraction, options.seed));
  }
  return splits;
}

TransferMatrix assemble(const std::vector<std::string>& rows,
                        const std::vector<const Prototype*>& protos,
                        const std::map<std::string, Split>& splits,
                        const TransferOptions& options) {
  TransferMatrix m;
  m.phenomenon = options.phenomenon;
  m.model_id = options.model_id;
  m.train_languages = rows;
  std::vector<const Split*> cols;
  for (const auto& [lang, s] : splits) {
    m.test_languages.push_back(lang);
    cols.push_back(&s);
  }
  const std::size_t R = m.rows();
  const std::size_t C = m.cols();
  m.cells.resize(R * C);
  parallel_for(R * C, options.workers, [&](std::size_t cell) {
    const std::size_t r = cell / C;
    const std::size_t c = cell % C;
    ScoreReport rep = score_prototype(cols[c]->test, *protos[r], options.backend);
    rep.train_lang = rows[r];
    rep.test_lang = m.test_languages[c];
    rep.phenomenon = options.phenomenon;
    rep.model_id = options.model_id;
    m.cells[cell] = std::move(rep);
  });
  return m;
}

}  // namespace

TransferMatrix transfer_matrix(const std::map<std::string, std::vector<Pair>>& datasets,
                               const TransferOptions& options) {
  if (datasets.empty()) throw Error(ErrorCode::EmptySet, "no languages");
  const auto splits = split_all(datasets, options);
  std::vector<std::string> rows;
  std::vector<Prototype> protos;
  for (const auto& [lang, s] : splits) {
    LearnOptions lo;
    lo.workers = options.workers;
    lo.meta.model_id = options.model_id;
    lo.meta.language = lang;
    rows.push_back(lang);
    protos.push_back(learn_prototype(s.train, options.backend, lo));
  }
  std::vector<const Prototype*> ptrs;
  for (const Prototype& p : protos) ptrs.push_back(&p);
  return assemble(rows, ptrs, splits, options);
}

TransferMatrix score_matrix(const std::map<std::string, Prototype>& prototypes,
                            const std::map<std::string, std::vector<Pair>>& datasets,
                            const TransferOptions& options) {
  if (datasets.empty()) throw Error(ErrorCode::EmptySet, "no languages");
  if (prototypes.empty()) throw Error(ErrorCode::EmptySet, "no prototypes");
  const auto splits = split_all(datasets, options);
  std::vector<std::string> rows;
  std::vector<const Prototype*> ptrs;
  for (const auto& [lang, p] : prototypes) {
    rows.push_back(lang);
    ptrs.push_back(&p);
  }
  return assemble(rows, ptrs, splits, options);
}

RandomBaseline random_baseline(std::span<const Pair> test, std::size_t trials,
                               RotorBackend backend, const PrototypeSource& source,
                               std::size_t workers) {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "baseline needs at least one trial");
  if (test.empty()) throw Error(ErrorCode::EmptySet, "empty test set");
  std::vector<Rotor> rotors;
  rotors.reserve(test.size());
  for (const Pair& p : test) rotors.push_back(Rotor::build(p.neutral(), backend));

  RandomBaseline out;
  out.trials = trials;
  out.trial_scores.resize(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    const Prototype p = source(t);
    if (p.backend() != backend) {
      throw Error(ErrorCode::BackendMismatch, "baseline prototype backend differs");
    }
    require_same_dim(p.dim(), test.front().dim(), "baseline prototype");
    double sum = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      const UnitVector pred = predict_with(rotors[i], test[i].neutral(), p);
      sum += cosine(pred.coords(), test[i].variant().coords());
    }
    out.trial_scores[t] = sum / static_cast<double>(test.size());
  });

  const ScoreReport s = summarize(out.trial_scores);
  out.mean = s.mean_score;
  out.sem = s.std / std::sqrt(static_cast<double>(trials));
  return out;
}

RandomBaseline random_baseline(std::span<const Pair> test, double magnitude, std::size_t trials,
                               RotorBackend backend, std::uint64_t seed, std::size_t workers) {
  if (test.empty()) throw Error(ErrorCode::EmptySet, "empty test set");
  const std::size_t d = test.front().dim();
  return random_baseline(
      test, trials, backend,
      [&](std::size_t t) {
        Rng rng(seed, t);
        return random_prototype(d, magnitude, rng, backend);
      },
      workers);
}

BaselineReport make_baseline_report(std::string phenomenon, double rise_score,
                                    const RandomBaseline& baseline) {
  BaselineReport r;
  r.phenomenon = std::move(phenomenon);
  r.rise_score = rise_score;
  r.random_mean = baseline.mean;
  r.random_sem = baseline.sem;
  r.trials = baseline.trials;
  r.advantage_ratio = baseline.mean > 0.0 ? rise_score / baseline.mean
                                          : std::numeric_limits<double>::quiet_NaN();
  return r;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  require_same_dim(x.size(), y.size(), "slope fit");
  if (x.size() < 2) throw Error(ErrorCode::InvalidArgument, "slope fit needs >= 2 points");
  double mx = 0.0, my = 0.0;
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

ComplexityReport complexity_probe(std::span<const std::size_t> dims, std::size_t reps,
                                  RotorBackend backend) {
  if (reps == 0) throw Error(ErrorCode::InvalidArgument, "complexity probe needs reps >= 1");
  if (dims.size() < 4) throw Error(ErrorCode::InvalidArgument, "complexity probe needs >= 4 dims");
  if (!std::is_sorted(dims.begin(), dims.end()) ||
      std::adjacent_find(dims.begin(), dims.end()) != dims.end()) {
    throw Error(ErrorCode::InvalidArgument, "complexity probe dims must be strictly ascending");
  }
  using clock = std::chrono::steady_clock;
  ComplexityReport report;
  std::vector<double> xs, ys;
  for (std::size_t d : dims) {
    Rng rng(d);
    const UnitVector n = sample_uniform_sphere(d, rng);
    const UnitVector v = sample_uniform_sphere(d, rng);
    const Pair pair(n, v);
    // Constant total work per measurement keeps small-d timings above clock noise.
    const std::size_t inner = std::max<std::size_t>(1, (std::size_t{1} << 21) / d);
    std::vector<double> samples;
    double sink = 0.0;
    for (std::size_t r = 0; r <= reps; ++r) {
      const auto t0 = clock::now();
      for (std::size_t k = 0; k < inner; ++k) {
        const Vec xi = canonicalize_pair(pair, backend);
        const Rotor rot = Rotor::build(n, backend);
        const UnitVector back = exp_map(TangentVector::projected(n, rot.apply_transpose(xi)));
        sink += back[0];
      }
      const auto t1 = clock::now();
      if (r == 0) continue;  // warm-up
      samples.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count() /
                        static_cast<double>(inner));
    }
    if (sink == 42.0) samples.push_back(0.0);  // keeps the loop observable
    std::nth_element(samples.begin(), samples.begin() + samples.size() / 2, samples.end());
    const double median = samples[samples.size() / 2];
    report.rows.push_back({d, median});
    xs.push_back(static_cast<double>(d));
    ys.push_back(median);
  }
  report.slope = loglog_slope(xs, ys);
  return report;
}

CommutativityScaling commutativity_scaling(const UnitVector& n0, const Prototype& a,
                                           const Prototype& b, std::span<const double> scales,
                                           RotorBackend backend) {
  if (scales.size() < 3) {
    throw Error(ErrorCode::InvalidArgument, "commutativity scaling needs >= 3 scales");
  }
  CommutativityScaling out;
  out.scales.assign(scales.begin(), scales.end());
  for (double s : scales) {
    if (!(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "scales must be positive");
    out.gaps.push_back(commutativity_gap(n0, a.scaled(s), b.scaled(s), backend));
  }
  out.slope = loglog_slope(out.scales, out.gaps);
  return out;
}

void write_transfer_csv(const TransferMatrix& m, std::ostream& out) {
  out << "train_lang,test_lang,mean,std,n\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const ScoreReport& s = m.at(r, c);
      out << fmt::format("{},{},{:.17g},{:.17g},{}\n", m.train_languages[r], m.test_languages[c],
                         s.mean_score, s.std, s.n_test);
    }
  }
}

void write_baseline_csv(std::span<const BaselineReport> reports, std::ostream& out) {
  out << "phenomenon,rise_score,random_mean,random_sem,trials,advantage_ratio\n";
  for (const BaselineReport& r : reports) {
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{},{:.17g}\n", r.phenomenon, r.rise_score,
                       r.random_mean, r.random_sem, r.trials, r.advantage_ratio);
  }
}

void write_heatmap_svg(const TransferMatrix& m, std::ostream& out) {
  constexpr int cell = 64;
  constexpr int left = 110;
  constexpr int top = 90;
  const int R = static_cast<int>(m.rows());
  const int C = static_cast<int>(m.cols());
  const int width = left + C * cell + 20;
  const int height = top + R * cell + 40;
  // White at 0.0, #08306b at 1.0.
  constexpr int lo[3] = {255, 255, 255};
  constexpr int hi[3] = {8, 48, 107};

  out << fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"12\">\n",
      width, height, width, height);
  out << fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n", width, height);
  std::string title = m.phenomenon.empty() ? "transfer" : m.phenomenon;
  if (!m.model_id.empty()) title += " / " + m.model_id;
  out << fmt::format("<text x=\"{}\" y=\"24\" font-size=\"14\">{}</text>\n", left,
                     xml_escape(title));
  out << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">test language</text>\n",
                     left + C * cell / 2, top - 40);
  out << fmt::format(
      "<text x=\"20\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">train "
      "language</text>\n",
      top + R * cell / 2, top + R * cell / 2);
  for (int c = 0; c < C; ++c) {
    out << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                       left + c * cell + cell / 2, top - 8,
                       xml_escape(m.test_languages[static_cast<std::size_t>(c)]));
  }
  for (int r = 0; r < R; ++r) {
    out << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", left - 8,
                       top + r * cell + cell / 2 + 4,
                       xml_escape(m.train_languages[static_cast<std::size_t>(r)]));
  }
  for (int r = 0; r < R; ++r) {
    for (int c = 0; c < C; ++c) {
      const double v = m.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)).mean_score;
      const double t = std::clamp(v, 0.0, 1.0);
      int rgb[3];
      for (int k = 0; k < 3; ++k) {
        rgb[k] = static_cast<int>(std::lround(lo[k] + t * (hi[k] - lo[k])));
      }
      const int x = left + c * cell;
      const int y = top + r * cell;
      out << fmt::format(
          "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#{:02x}{:02x}{:02x}\" "
          "stroke=\"#cccccc\"/>\n",
          x, y, cell, cell, rgb[0], rgb[1], rgb[2]);
      out << fmt::format(
          "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" fill=\"{}\">{:.3f}</text>\n",
          x + cell / 2, y + cell / 2 + 4, t > 0.5 ? "#ffffff" : "#000000", v);
    }
  }
  out << "</svg>\n";
}

}  // namespace rise
