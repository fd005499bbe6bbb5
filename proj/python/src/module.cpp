#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "hls/energy.hpp"
#include "hls/errors.hpp"
#include "hls/lizhu.hpp"
#include "hls/parallel.hpp"
#include "hls/positivity.hpp"
#include "hls/symmetrize.hpp"
#include "run.hpp"

namespace py = pybind11;

// Points travel as tuples; a bare float is accepted for N = 1.
namespace pybind11::detail {
template <>
struct type_caster<hls::Point> {
  PYBIND11_TYPE_CASTER(hls::Point, const_name("Sequence[float]"));

  bool load(handle src, bool) {
    if (PyFloat_Check(src.ptr()) || PyLong_Check(src.ptr())) {
      value = hls::Point{src.cast<double>()};
      return true;
    }
    if (!isinstance<sequence>(src)) return false;
    const auto seq = reinterpret_borrow<sequence>(src);
    if (seq.size() < 1 || seq.size() > static_cast<std::size_t>(hls::kMaxDim)) return false;
    hls::Point p(static_cast<int>(seq.size()));
    for (std::size_t i = 0; i < seq.size(); ++i) p[static_cast<int>(i)] = seq[i].cast<double>();
    value = p;
    return true;
  }

  static handle cast(const hls::Point& p, return_value_policy, handle) {
    py::tuple t(p.dim());
    for (int i = 0; i < p.dim(); ++i) t[i] = p[i];
    return t.release();
  }
};
}  // namespace pybind11::detail

namespace {

using namespace hls;

py::array_t<double> values_of(const Field& f) {
  const Grid& g = f.grid();
  std::vector<py::ssize_t> shape;
  for (int d = 0; d < g.dim; ++d) shape.push_back(g.extent[d]);
  py::array_t<double> a(shape);
  std::copy(f.values().begin(), f.values().end(), a.mutable_data());
  return a;
}

Field field_from(const Grid& g, py::array_t<double, py::array::c_style | py::array::forcecast> values) {
  if (static_cast<std::size_t>(values.size()) != g.size())
    throw InvalidArgument("expected " + std::to_string(g.size()) + " values, got " + std::to_string(values.size()));
  return Field(g, std::vector<double>(values.data(), values.data() + values.size()));
}

}  // namespace

PYBIND11_MODULE(_hls, m) {
  m.doc() = "Numerical checks for the sharp Hardy-Littlewood-Sobolev inequality";

  auto base = py::register_exception<Error>(m, "HlsError", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<GridMismatch>(m, "GridMismatch", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<NumericalFailure>(m, "NumericalFailure", base.ptr());

  m.def("set_num_threads", &set_num_threads, py::arg("n"));
  m.def("num_threads", &num_threads);

  py::class_<KernelParams>(m, "KernelParams")
      .def(py::init<int, double>(), py::arg("dim"), py::arg("lam"))
      .def_readonly("dim", &KernelParams::dim)
      .def_readonly("lam", &KernelParams::lambda)
      .def_property_readonly("p", &KernelParams::p)
      .def_property_readonly("positivity_valid", &KernelParams::positivity_valid)
      .def_property_readonly("strict", &KernelParams::strict)
      .def("__repr__", [](const KernelParams& k) {
        std::ostringstream os;
        os << "KernelParams(dim=" << k.dim << ", lam=" << k.lambda << ")";
        return os.str();
      });

  py::class_<Grid>(m, "Grid")
      .def_static("cube", &Grid::cube, py::arg("dim"), py::arg("lo"), py::arg("hi"), py::arg("points"))
      .def_readonly("dim", &Grid::dim)
      .def_readonly("origin", &Grid::origin)
      .def_readonly("spacing", &Grid::spacing)
      .def_property_readonly("shape",
                             [](const Grid& g) {
                               py::tuple t(g.dim);
                               for (int d = 0; d < g.dim; ++d) t[d] = g.extent[d];
                               return t;
                             })
      .def("__len__", &Grid::size)
      .def("point", py::overload_cast<std::size_t>(&Grid::point, py::const_), py::arg("flat"));

  py::class_<Field>(m, "Field")
      .def(py::init(&field_from), py::arg("grid"), py::arg("values"))
      .def_property_readonly("grid", &Field::grid)
      .def_property_readonly("values", &values_of)
      .def_property_readonly("has_tail", [](const Field& f) { return f.tail().has_value(); })
      .def("eval", &Field::eval, py::arg("x"))
      .def("__len__", &Field::size);

  py::class_<Ball>(m, "Ball")
      .def(py::init<Point, double>(), py::arg("center"), py::arg("radius"))
      .def_readonly("center", &Ball::center)
      .def_readonly("radius", &Ball::radius)
      .def("__repr__", [](const Ball& b) { return region_str(b); });
  py::class_<HalfSpace>(m, "HalfSpace")
      .def(py::init(&HalfSpace::from_direction), py::arg("normal"), py::arg("offset"))
      .def_readonly("normal", &HalfSpace::normal)
      .def_readonly("offset", &HalfSpace::offset)
      .def("__repr__", [](const HalfSpace& h) { return region_str(h); });

  m.def(
      "extremizer",
      [](const KernelParams& kp, const Grid& g, double alpha, double beta, std::optional<Point> center,
         bool density) {
        const Point y = center ? *center : Point::zeros(g.dim);
        return make_extremizer(
            ExtremizerSpec(alpha, beta, y, density ? ExtremizerSpec::Role::density : ExtremizerSpec::Role::optimizer),
            kp, g);
      },
      py::arg("kp"), py::arg("grid"), py::arg("alpha") = 1.0, py::arg("beta") = 1.0, py::arg("center") = py::none(),
      py::arg("density") = false,
      "alpha (beta + |x - y|^2)^(-(2N - lambda)/2), or exponent N with density=True");
  m.def("lp_norm", &lp_norm, py::arg("f"), py::arg("p"));
  m.def("apply_region_map", &apply_region_map, py::arg("region"), py::arg("f"), py::arg("kp"));

  py::class_<EnergyResult>(m, "EnergyResult")
      .def_readonly("value", &EnergyResult::value)
      .def_readonly("est_error", &EnergyResult::est_error)
      .def_property_readonly("quadrature", [](const EnergyResult& e) { return to_string(e.quadrature); });
  m.def("energy", &energy_direct, py::arg("f"), py::arg("g"), py::arg("kp"));
  m.def("transformed_energy", &transformed_energy, py::arg("region"), py::arg("f"), py::arg("kp"));
  m.def("sharp_constant", &sharp_constant, py::arg("kp"));
  m.def("rayleigh_quotient", &rayleigh_quotient, py::arg("f"), py::arg("kp"));
  m.def("rayleigh_estimate", &rayleigh_estimate, py::arg("f"), py::arg("kp"));

  py::class_<PositivityReport>(m, "PositivityReport")
      .def_readonly("defect", &PositivityReport::defect)
      .def_readonly("defect_via_g", &PositivityReport::defect_via_g)
      .def_readonly("est_error", &PositivityReport::est_error)
      .def_readonly("oracle_value", &PositivityReport::oracle_value)
      .def_readonly("strict_flag", &PositivityReport::strict_flag)
      .def_readonly("asymmetry", &PositivityReport::asymmetry);
  m.def("positivity_defect", &positivity_defect, py::arg("region"), py::arg("f"), py::arg("kp"));

  py::class_<RepresentationResult>(m, "RepresentationResult")
      .def_readonly("value", &RepresentationResult::value)
      .def_readonly("est_error", &RepresentationResult::est_error);
  m.def("halfspace_representation", &halfspace_representation, py::arg("f"), py::arg("kp"));

  py::class_<ExtremizerFit>(m, "ExtremizerFit")
      .def_readonly("alpha", &ExtremizerFit::alpha)
      .def_readonly("beta", &ExtremizerFit::beta)
      .def_readonly("center", &ExtremizerFit::center)
      .def_readonly("rel_error", &ExtremizerFit::rel_error);
  m.def("fit_extremizer", &fit_extremizer, py::arg("f"), py::arg("kp"));

  py::class_<SymmetrizationTrace>(m, "SymmetrizationTrace")
      .def_readonly("sweeps", &SymmetrizationTrace::sweeps)
      .def_readonly("converged", &SymmetrizationTrace::converged)
      .def_readonly("final_field", &SymmetrizationTrace::final_field)
      .def_readonly("final_fit", &SymmetrizationTrace::final_fit)
      .def_property_readonly("quotients",
                             [](const SymmetrizationTrace& t) {
                               std::vector<double> q;
                               for (const StepRecord& s : t.steps) q.push_back(s.quotient_after);
                               return q;
                             })
      .def_property_readonly("est_errors", [](const SymmetrizationTrace& t) {
        std::vector<double> e;
        for (const StepRecord& s : t.steps) e.push_back(s.est_error);
        return e;
      });
  m.def(
      "symmetrize",
      [](const Field& f, const KernelParams& kp, int max_sweeps, double tol_stop, bool randomized,
         std::uint64_t seed) {
        Schedule s;
        s.max_sweeps = max_sweeps;
        s.tol_stop = tol_stop;
        s.randomized = randomized;
        s.seed = seed;
        return run_symmetrization(f, kp, s);
      },
      py::arg("f"), py::arg("kp"), py::arg("max_sweeps") = 50, py::arg("tol_stop") = 1e-5,
      py::arg("randomized") = false, py::arg("seed") = 0);

  py::class_<Measure>(m, "Measure")
      .def_static("density", &Measure::density, py::arg("v"))
      .def_static("cloud", &Measure::cloud, py::arg("points"), py::arg("weights"))
      .def_property_readonly("dim", &Measure::dim)
      .def_property_readonly("total_mass", &Measure::total_mass)
      .def("mass_in", py::overload_cast<const Region&>(&Measure::mass_in, py::const_), py::arg("region"));
  py::class_<HemiBallResult>(m, "HemiBall")
      .def_readonly("center", &HemiBallResult::center)
      .def_readonly("radius", &HemiBallResult::radius)
      .def_readonly("mass_imbalance", &HemiBallResult::mass_imbalance);
  m.def("hemiball_centered", &hemiball_centered, py::arg("m"), py::arg("a"));
  m.def("hemiball_on_ray", &hemiball_on_ray, py::arg("m"), py::arg("e"), py::arg("u"));
  m.def("check_pointwise_invariance", &check_pointwise_invariance, py::arg("v"), py::arg("ball"));
  m.def("check_mass_identity", &check_mass_identity, py::arg("v"), py::arg("centers"));
  py::class_<InvariantFit>(m, "InvariantFit")
      .def_readonly("alpha", &InvariantFit::alpha)
      .def_readonly("beta", &InvariantFit::beta)
      .def_readonly("center", &InvariantFit::center)
      .def_readonly("fit_error", &InvariantFit::fit_error)
      .def_readonly("mass_divergent", &InvariantFit::mass_divergent);
  m.def("fit_invariant_density", &fit_invariant_density, py::arg("v"));

  m.def(
      "cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "hlsinv");
        std::vector<char*> argv;
        for (std::string& a : args) argv.push_back(a.data());
        return hls::cli::cli_main(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"), "Runs the command-line tool in-process and returns its exit code.");
}
