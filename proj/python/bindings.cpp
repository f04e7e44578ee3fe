// Python module `_rise`. Vectors cross the boundary as 1-D float64 numpy
// arrays, pair sets as two (M, d) arrays of neutral and variant rows.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rise/core.hpp"
#include "rise/cross_model.hpp"
#include "rise/error.hpp"
#include "rise/eval.hpp"
#include "rise/io.hpp"
#include "rise/synth.hpp"

namespace py = pybind11;
using namespace rise;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Vec to_vec(const Array& a) {
  if (a.ndim() != 1) throw Error(ErrorCode::InvalidArgument, "expected a 1-D array");
  return Vec(a.data(), a.data() + a.shape(0));
}

Array to_array(std::span<const double> v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

UnitVector unit(const Array& a) { return UnitVector::from_unit(to_vec(a)); }

std::vector<UnitVector> unit_rows(const Array& a) {
  if (a.ndim() != 2) throw Error(ErrorCode::InvalidArgument, "expected a 2-D array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  std::vector<UnitVector> out;
  out.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    out.push_back(UnitVector::from_unit(Vec(a.data() + i * cols, a.data() + (i + 1) * cols)));
  }
  return out;
}

Array stack(const std::vector<UnitVector>& rows, std::size_t dim) {
  Array out({static_cast<py::ssize_t>(rows.size()), static_cast<py::ssize_t>(dim)});
  double* p = out.mutable_data();
  for (const UnitVector& r : rows) p = std::copy(r.coords().begin(), r.coords().end(), p);
  return out;
}

std::vector<Pair> make_pairs(const Array& neutral, const Array& variant,
                             const std::string& language, const std::string& phenomenon) {
  const std::vector<UnitVector> n = unit_rows(neutral), v = unit_rows(variant);
  if (n.size() != v.size()) {
    throw Error(ErrorCode::DimensionMismatch, "neutral and variant row counts differ");
  }
  std::vector<Pair> pairs;
  pairs.reserve(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    pairs.emplace_back(n[i], v[i], std::to_string(i), language, phenomenon);
  }
  return pairs;
}

}  // namespace

PYBIND11_MODULE(_rise, m) {
  m.doc() = "Rotor-invariant shift estimation on the unit hypersphere";

  static py::exception<Error> rise_error(m, "RiseError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      // args = (message, exit code)
      const py::tuple args = py::make_tuple(e.what(), static_cast<int>(e.code()));
      PyErr_SetObject(rise_error.ptr(), args.ptr());
    }
  });

  py::enum_<RotorBackend>(m, "Backend")
      .value("householder", RotorBackend::householder)
      .value("givens", RotorBackend::givens)
      .value("two_step", RotorBackend::two_step);

  py::enum_<PortMode>(m, "PortMode")
      .value("tangent", PortMode::tangent)
      .value("ambient", PortMode::ambient);

  // ---- geometry
  m.def("normalize", [](const Array& x) { return to_array(normalize(to_vec(x)).coords()); },
        py::arg("x"));
  m.def(
      "exp_map",
      [](const Array& n, const Array& xi) {
        return to_array(exp_map(TangentVector(unit(n), to_vec(xi))).coords());
      },
      py::arg("n"), py::arg("xi"));
  m.def(
      "log_map", [](const Array& n, const Array& v) { return to_array(log_map(unit(n), unit(v)).vec()); },
      py::arg("n"), py::arg("v"));
  m.def(
      "geodesic_distance",
      [](const Array& a, const Array& b) { return geodesic_distance(unit(a), unit(b)); },
      py::arg("a"), py::arg("b"));
  m.def(
      "parallel_transport",
      [](const Array& n, const Array& xi, const Array& to) {
        return to_array(parallel_transport(TangentVector(unit(n), to_vec(xi)), unit(to)).vec());
      },
      py::arg("n"), py::arg("xi"), py::arg("to"));

  py::class_<Rotor>(m, "Rotor")
      .def(py::init([](const Array& n, RotorBackend b) { return Rotor::build(unit(n), b); }),
           py::arg("n"), py::arg("backend") = RotorBackend::householder)
      .def_property_readonly("dim", &Rotor::dim)
      .def_property_readonly("kind",
                             [](const Rotor& r) {
                               switch (r.kind()) {
                                 case Rotor::Kind::identity: return "identity";
                                 case Rotor::Kind::householder: return "householder";
                                 case Rotor::Kind::givens: return "givens";
                                 case Rotor::Kind::two_step: return "two_step";
                               }
                               return "";
                             })
      .def("apply", [](const Rotor& r, const Array& x) { return to_array(r.apply(to_vec(x))); })
      .def("apply_transpose",
           [](const Rotor& r, const Array& x) { return to_array(r.apply_transpose(to_vec(x))); });

  // ---- prototypes
  py::class_<Prototype>(m, "Prototype")
      .def_property_readonly("vec", [](const Prototype& p) { return to_array(p.vec()); })
      .def_property_readonly("dim", &Prototype::dim)
      .def_property_readonly("pair_count", &Prototype::pair_count)
      .def_property_readonly("backend", &Prototype::backend)
      .def_property_readonly("magnitude", &Prototype::magnitude)
      .def_property(
          "phenomenon", [](const Prototype& p) { return p.meta().phenomenon; },
          [](Prototype& p, std::string s) { p.meta().phenomenon = std::move(s); })
      .def_property(
          "language", [](const Prototype& p) { return p.meta().language; },
          [](Prototype& p, std::string s) { p.meta().language = std::move(s); })
      .def_property(
          "model_id", [](const Prototype& p) { return p.meta().model_id; },
          [](Prototype& p, std::string s) { p.meta().model_id = std::move(s); })
      .def("scaled", &Prototype::scaled, py::arg("factor"))
      .def("to_json", [](const Prototype& p) { return prototype_to_json(p); })
      .def_static("from_json", [](const std::string& s) { return prototype_from_json(s); })
      .def("save", [](const Prototype& p, const std::filesystem::path& f) { save_prototype(p, f); })
      .def_static("load", [](const std::filesystem::path& f) { return load_prototype(f); })
      .def_static(
          "zero", [](std::size_t d, RotorBackend b) { return Prototype::zero(d, b); },
          py::arg("dim"), py::arg("backend") = RotorBackend::householder)
      .def("__eq__", [](const Prototype& a, const Prototype& b) { return a == b; })
      .def("__repr__", [](const Prototype& p) {
        return "<Prototype dim=" + std::to_string(p.dim()) +
               " pairs=" + std::to_string(p.pair_count()) + ">";
      });

  m.def(
      "learn_prototype",
      [](const Array& neutral, const Array& variant, RotorBackend backend, std::size_t workers,
         const std::string& phenomenon) {
        const std::vector<Pair> pairs = make_pairs(neutral, variant, "", phenomenon);
        LearnOptions opt;
        opt.workers = workers;
        opt.meta.phenomenon = phenomenon;
        py::gil_scoped_release release;
        return learn_prototype(pairs, backend, opt);
      },
      py::arg("neutral"), py::arg("variant"), py::arg("backend") = RotorBackend::householder,
      py::arg("workers") = 1, py::arg("phenomenon") = "");

  m.def(
      "predict",
      [](const Array& n, const Prototype& p) { return to_array(predict(unit(n), p).coords()); },
      py::arg("n"), py::arg("prototype"));
  m.def(
      "predict_batch",
      [](const Array& neutral, const Prototype& p) {
        std::vector<UnitVector> out;
        for (const UnitVector& n : unit_rows(neutral)) out.push_back(predict(n, p));
        return stack(out, p.dim());
      },
      py::arg("neutral"), py::arg("prototype"));
  m.def(
      "commutativity_gap",
      [](const Array& n0, const Prototype& a, const Prototype& b) {
        return commutativity_gap(unit(n0), a, b);
      },
      py::arg("n0"), py::arg("a"), py::arg("b"));

  // ---- evaluation
  m.def(
      "score",
      [](const Array& neutral, const Array& variant, const Prototype& p, std::size_t workers) {
        const std::vector<Pair> pairs = make_pairs(neutral, variant, "", "");
        py::gil_scoped_release release;
        return score_prototype(pairs, p, p.backend(), workers);
      },
      py::arg("neutral"), py::arg("variant"), py::arg("prototype"), py::arg("workers") = 1);
  m.def(
      "random_baseline",
      [](const Array& neutral, const Array& variant, double rise_score, double magnitude,
         std::size_t trials, RotorBackend backend, std::uint64_t seed, std::size_t workers) {
        const std::vector<Pair> pairs = make_pairs(neutral, variant, "", "");
        RandomBaseline rb;
        {
          py::gil_scoped_release release;
          rb = random_baseline(pairs, magnitude, trials, backend, seed, workers);
        }
        const BaselineReport r = make_baseline_report("", rise_score, rb);
        py::dict d;
        d["rise_score"] = r.rise_score;
        d["random_mean"] = r.random_mean;
        d["random_sem"] = r.random_sem;
        d["trials"] = r.trials;
        d["advantage_ratio"] = r.advantage_ratio;
        return d;
      },
      py::arg("neutral"), py::arg("variant"), py::arg("rise_score"), py::arg("magnitude"),
      py::arg("trials") = 10000, py::arg("backend") = RotorBackend::householder,
      py::arg("seed") = 0, py::arg("workers") = 1);

  // ---- synthetic data
  m.def(
      "synth",
      [](std::size_t dim, std::size_t n_pairs, double magnitude, double sigma, std::uint64_t seed,
         RotorBackend backend) {
        SynthSpec spec;
        spec.dim = dim;
        spec.n_pairs = n_pairs;
        spec.planted_magnitude = magnitude;
        spec.noise_sigma = sigma;
        spec.seed = seed;
        spec.backend = backend;
        const SynthDataset ds = generate(spec);
        std::vector<UnitVector> n, v;
        for (const Pair& p : ds.pairs) {
          n.push_back(p.neutral());
          v.push_back(p.variant());
        }
        return py::make_tuple(stack(n, dim), stack(v, dim), ds.p_true);
      },
      py::arg("dim") = 64, py::arg("n_pairs") = 100, py::arg("magnitude") = 0.3,
      py::arg("sigma") = 0.0, py::arg("seed") = 0, py::arg("backend") = RotorBackend::householder,
      "Planted pair set; returns (neutral, variant, planted prototype).");

  // ---- cross-model
  py::class_<SpaceMap>(m, "SpaceMap")
      .def_readonly("matrix", &SpaceMap::matrix)
      .def_readonly("n_anchors", &SpaceMap::n_anchors)
      .def_readonly("pca_rank", &SpaceMap::pca_rank)
      .def_readonly("ridge", &SpaceMap::ridge)
      .def_property_readonly("d_src", &SpaceMap::d_src)
      .def_property_readonly("d_tgt", &SpaceMap::d_tgt)
      .def("save", [](const SpaceMap& s, const std::filesystem::path& f) { save_space_map(s, f); })
      .def_static("load", [](const std::filesystem::path& f) { return load_space_map(f); });

  m.def(
      "fit_map",
      [](const Array& src, const Array& tgt, std::optional<std::size_t> pca_rank, double ridge) {
        FitOptions opt;
        opt.pca_rank = pca_rank;
        opt.ridge = ridge;
        return fit_map(unit_rows(src), unit_rows(tgt), opt);
      },
      py::arg("anchors_src"), py::arg("anchors_tgt"), py::arg("pca_rank") = py::none(),
      py::arg("ridge") = 0.0);
  m.def("port_prototype", &port_prototype, py::arg("prototype"), py::arg("map"),
        py::arg("mode") = PortMode::tangent);

  py::class_<ScoreReport>(m, "ScoreReport")
      .def_readonly("mean", &ScoreReport::mean_score)
      .def_readonly("std", &ScoreReport::std)
      .def_readonly("n", &ScoreReport::n_test);
}
