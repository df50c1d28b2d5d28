#include <memory>
#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sigmalab/composite_bounds.hpp"
#include "sigmalab/descriptors.hpp"
#include "sigmalab/elliptic_solver.hpp"
#include "sigmalab/error.hpp"
#include "sigmalab/experiments.hpp"
#include "sigmalab/jacobian_lab.hpp"
#include "sigmalab/oracles.hpp"

namespace py = pybind11;
using namespace sigmalab;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using PyScalar = std::function<double(double, double)>;

RowMatrix points_of(const std::vector<Vec2>& p) {
  RowMatrix m(p.size(), 2);
  for (std::size_t i = 0; i < p.size(); ++i) m.row(i) = p[i].transpose();
  return m;
}

BoundaryFunction wrap(const PyScalar& f) {
  return [f](const Vec2& x) { return f(x.x(), x.y()); };
}

py::dict as_dict(const OracleEvaluation& e) {
  py::dict d;
  d["U"] = e.U;
  d["DU"] = e.DU;
  d["det"] = e.det;
  if (e.residual) d["residual"] = *e.residual;
  return d;
}

py::dict as_dict(const BoundResult& r) {
  py::dict d;
  d["value"] = r.value;
  d["certified"] = r.certified;
  d["infeasible"] = r.infeasible;
  d["min_det"] = r.min_det;
  d["mean_residual"] = r.mean_residual;
  d["dual_bound"] = r.dual_bound ? py::cast(*r.dual_bound) : py::none();
  d["message"] = r.message;
  return d;
}

}  // namespace

PYBIND11_MODULE(_sigmalab, m) {
  m.doc() = "sigma-harmonic mappings: meshes, solvers, Jacobian diagnostics and composite bounds";

  py::register_exception<Error>(m, "Error");

  py::class_<DomainSpec>(m, "Domain")
      .def_static("from_json", [](const std::string& text) { return domain_from_json(parse_json_text(text, "domain")); })
      .def_static("disk", &make_disk_domain, py::arg("n_boundary") = 256)
      .def_static("ellipse", &make_ellipse_domain, py::arg("a"), py::arg("b"), py::arg("n_boundary") = 256)
      .def_property_readonly("boundary_points", [](const DomainSpec& d) {
        std::vector<Vec2> p;
        for (const auto& s : d.boundary.samples) p.push_back(s.point);
        return points_of(p);
      })
      .def_property_readonly("length", [](const DomainSpec& d) { return d.boundary.total_length; })
      .def("character", [](const DomainSpec& d, int directions) {
        return character_report(d, directions).dump();
      }, py::arg("directions") = 64);

  py::class_<Mesh, std::shared_ptr<Mesh>>(m, "Mesh")
      .def_property_readonly("nodes", [](const Mesh& mesh) { return points_of(mesh.nodes); })
      .def_property_readonly("triangles", [](const Mesh& mesh) {
        IntMatrix t(mesh.num_triangles(), 3);
        for (std::size_t i = 0; i < mesh.num_triangles(); ++i) {
          for (int k = 0; k < 3; ++k) t(i, k) = mesh.triangles[i][k];
        }
        return t;
      })
      .def_property_readonly("boundary_nodes", [](const Mesh& mesh) {
        std::vector<int> b;
        for (const auto& n : mesh.boundary_nodes) b.push_back(n.node);
        return b;
      })
      .def_readonly("h", &Mesh::h)
      .def("valid", [](const Mesh& mesh) { return validate_mesh(mesh).ok(); })
      .def("min_angle", [](const Mesh& mesh) { return validate_mesh(mesh).min_angle_deg; })
      .def("to_text", [](const Mesh& mesh) {
        std::ostringstream out;
        write_mesh(out, mesh);
        return out.str();
      })
      .def_static("from_text", [](const std::string& text) {
        std::istringstream in(text);
        return std::make_shared<Mesh>(read_mesh(in));
      });

  m.def("triangulate", [](const DomainSpec& d, double h) { return std::make_shared<Mesh>(triangulate(d, h)); },
        py::arg("domain"), py::arg("h"));
  m.def("unit_square_mesh", [](int n) { return std::make_shared<Mesh>(triangulate_unit_square(n)); });

  py::class_<CoefficientField>(m, "Coefficient")
      .def_static("from_json", [](const std::string& text) {
        return coefficient_from_json(parse_json_text(text, "coefficient"));
      })
      .def_property_readonly("K", &CoefficientField::K)
      .def_property_readonly("dim", &CoefficientField::dim)
      .def_property_readonly("symmetric", &CoefficientField::symmetric)
      .def_property_readonly("description", &CoefficientField::description)
      .def("__call__", [](const CoefficientField& f, double x, double y) { return Mat2(f.eval(Vec2(x, y))); })
      .def("eval3", [](const CoefficientField& f, double x, double y, double z) { return Mat3(f.eval3(Vec3(x, y, z))); });

  m.def("meyers", &family_meyers, py::arg("alpha"));
  m.def("isotropic", &family_isotropic, py::arg("value") = 1.0);
  m.def("constant", &family_constant, py::arg("sigma"));
  m.def("jin_kazdan", py::overload_cast<double, bool>(&family_jin_kazdan), py::arg("a0"), py::arg("smooth") = true);
  m.def("smooth_random", [](std::uint64_t seed, double K, double skew, int modes) {
    SmoothRandomOptions o;
    o.seed = seed;
    o.K_target = K;
    o.skew = skew;
    o.modes = modes;
    return family_smooth_random(o);
  }, py::arg("seed"), py::arg("K") = 2.0, py::arg("skew") = 0.0, py::arg("modes") = 3);
  m.def("complex_dilatations", [](const Mat2& s) {
    const BeltramiPair p = complex_dilatations(s);
    return py::make_tuple(p.mu, p.nu);
  });
  m.def("ellipticity_constant", &ellipticity_constant);

  py::class_<DiscreteSolution>(m, "Solution")
      .def_readonly("values", &DiscreteSolution::nodal_values)
      .def_property_readonly("gradients", [](const DiscreteSolution& s) { return points_of(s.element_gradients); })
      .def_property_readonly("mesh", [](const DiscreteSolution& s) { return std::const_pointer_cast<Mesh>(s.mesh); })
      .def("l2_error", [](const DiscreteSolution& s, const PyScalar& exact) { return l2_error(s, wrap(exact)); })
      .def("stream_function", [](const DiscreteSolution& s, const CoefficientField& f) {
        const StreamFunction st = stream_function(s, f);
        return py::make_tuple(st.nodal_values, st.loop_residual);
      });

  m.def("solve", [](std::shared_ptr<Mesh> mesh, const CoefficientField& f, const PyScalar& g) {
    return assemble_and_solve(mesh, f, wrap(g));
  }, py::arg("mesh"), py::arg("coefficient"), py::arg("datum"));

  py::class_<JacobianReport>(m, "JacobianReport")
      .def_property_readonly("det", [](const JacobianReport& r) {
        return Eigen::Map<const Eigen::VectorXd>(r.det.data(), r.det.size()).eval();
      })
      .def_readonly("global_min", &JacobianReport::global_min)
      .def_readonly("global_max", &JacobianReport::global_max)
      .def_readonly("sign_changes", &JacobianReport::sign_changes)
      .def("interior_min", &JacobianReport::interior_min)
      .def("quotient_min", &JacobianReport::quotient_min)
      .def("directional_min", [](const JacobianReport& r, int n) { return directional_gradient_bound(r, n).min; },
           py::arg("directions") = 64)
      .def("fit_exponent", [](const JacobianReport& r, double r_min, double r_max, int bins) {
        const PowerLawFit fit = fit_degeneration_rate(r, Vec2::Zero(), r_min, r_max, bins);
        return py::make_tuple(fit.exponent, fit.r_squared);
      }, py::arg("r_min") = 0.2, py::arg("r_max") = 0.8, py::arg("bins") = 12);

  m.def("solve_map", [](std::shared_ptr<Mesh> mesh, const CoefficientField& f, const PyScalar& phi1,
                        const PyScalar& phi2) { return jacobian_field(solve_mapping(mesh, f, wrap(phi1), wrap(phi2))); },
        py::arg("mesh"), py::arg("coefficient"), py::arg("phi1"), py::arg("phi2"));

  m.def("meyers_map", [](double alpha, double x, double y) { return as_dict(meyers_eval(alpha, Vec2(x, y))); });
  m.def("wood_map", [](double x, double y, double z) { return as_dict(wood_eval(Vec3(x, y, z))); });
  m.def("jin_kazdan_map", [](double a0, bool smooth, double x, double y, double z) {
    const JinKazdanProfile p = smooth ? jin_kazdan_smooth(jin_kazdan_amplitude(a0, true), std::max(1.0, z), 4000)
                                      : jin_kazdan_piecewise(a0);
    return as_dict(jin_kazdan_eval(p, Vec3(x, y, z)));
  }, py::arg("a0"), py::arg("smooth"), py::arg("x"), py::arg("y"), py::arg("z"));

  py::class_<PhaseLayout>(m, "Layout")
      .def(py::init([](int nx, int ny, std::vector<int> phases, std::vector<double> sigmas) {
             PhaseLayout l;
             l.nx = nx;
             l.ny = ny;
             l.phase_of_cell = std::move(phases);
             l.sigmas = std::move(sigmas);
             l.validate();
             return l;
           }),
           py::arg("nx"), py::arg("ny"), py::arg("phases"), py::arg("sigmas"))
      .def_static("random", &random_layout, py::arg("n"), py::arg("sigmas"), py::arg("seed"))
      .def_readonly("nx", &PhaseLayout::nx)
      .def_readonly("ny", &PhaseLayout::ny)
      .def_readonly("phases", &PhaseLayout::phase_of_cell)
      .def_readonly("sigmas", &PhaseLayout::sigmas)
      .def("fractions", &PhaseLayout::fractions);

  m.def("wiener_bound", &wiener_bound);
  m.def("translation_bound", [](const PhaseLayout& l, const Mat2& A) { return as_dict(translation_bound(l, A)); });
  m.def("improved_bound", [](const PhaseLayout& l, const Mat2& A) { return as_dict(improved_bound(l, A)); });
  m.def("cell_energy", [](const PhaseLayout& l, const Mat2& A, int resolution) {
    return cell_energy_upper(l, A, resolution).value;
  }, py::arg("layout"), py::arg("A"), py::arg("resolution") = 8);
  m.def("bound_chain", [](const PhaseLayout& l, const Mat2& A, int resolution) {
    const BoundChain c = bound_chain_report(l, A, resolution, 0.0, false);
    py::dict d;
    d["F0"] = c.F0;
    d["F1"] = c.F1;
    d["F2"] = c.f2_defined ? py::cast(c.F2) : py::none();
    d["F_upper"] = c.F_upper;
    d["ordered"] = c.ordered;
    return d;
  }, py::arg("layout"), py::arg("A"), py::arg("resolution") = 8);

  m.def("run_experiment", [](const std::string& config, int threads) {
    py::gil_scoped_release release;
    return run_experiment(ExperimentConfig::from_json(parse_json_text(config, "config")), threads).report.dump(2);
  }, py::arg("config"), py::arg("threads") = 1);
  m.def("canned_names", [] {
    std::vector<std::string> names;
    for (const auto& c : canned_catalog()) names.push_back(c.name);
    return names;
  });
  m.def("canned_config", [](const std::string& name) {
    auto c = canned_config(name);
    if (!c) throw Error(ErrorCode::ConfigError, "unknown canned experiment '" + name + "'");
    return c->dump();
  });
}
