#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "reflpos/cli.hpp"
#include "reflpos/density.hpp"
#include "reflpos/gaussian.hpp"
#include "reflpos/io.hpp"
#include "reflpos/lattice.hpp"
#include "reflpos/rp_verify.hpp"

namespace py = pybind11;
using namespace reflpos;

namespace {

py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json from_python(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

cli::RunResult dispatch(const std::string& command, const cli::ExperimentConfig& cfg,
                        const cli::CommandOptions& opts) {
  if (command == "check-gaussian") return cli::cmd_check_gaussian(cfg, opts);
  if (command == "check-density") return cli::cmd_check_density(cfg, opts);
  if (command == "verify-rp") return cli::cmd_verify_rp(cfg, opts);
  throw py::value_error("unknown command: " + command);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lattice reflection positivity: Gaussian criteria, splitting densities, Gram matrix estimators.";
  m.attr("__version__") = cli::kToolVersion;

  py::register_exception<FactorizationError>(m, "FactorizationError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<Lattice>(m, "Lattice")
      .def(py::init<int, std::vector<int>>(), py::arg("time_extent"), py::arg("spatial_extents") = std::vector<int>{})
      .def_property_readonly("time_extent", &Lattice::time_extent)
      .def_property_readonly("spatial_extents", &Lattice::spatial_extents)
      .def_property_readonly("site_count", &Lattice::site_count)
      .def_property_readonly("half_count", &Lattice::half_count)
      .def("index_of", [](const Lattice& l, int t, std::vector<int> x) { return l.index_of(SiteCoord{t, std::move(x)}); },
           py::arg("t"), py::arg("x") = std::vector<int>{})
      .def("coord_of",
           [](const Lattice& l, Index s) {
             const SiteCoord c = l.coord_of(s);
             return py::make_tuple(c.t, c.x);
           })
      .def("theta", &Lattice::theta)
      .def("is_plus", &Lattice::is_plus)
      .def("__eq__", [](const Lattice& a, const Lattice& b) { return a == b; })
      .def("__repr__", [](const Lattice& l) {
        std::string s = "Lattice(" + std::to_string(l.time_extent()) + ", [";
        for (std::size_t i = 0; i < l.spatial_extents().size(); ++i)
          s += (i ? ", " : "") + std::to_string(l.spatial_extents()[i]);
        return s + "])";
      });

  m.def("reflect", &reflect, py::arg("lattice"), py::arg("v"));
  m.def("restrict_plus", &restrict_plus, py::arg("lattice"), py::arg("v"));
  m.def("embed_plus", &embed_plus, py::arg("lattice"), py::arg("h"));
  m.def("positive_support", &positive_support, py::arg("lattice"), py::arg("v"));

  py::class_<Covariance>(m, "Covariance")
      .def(py::init<Eigen::MatrixXd, double>(), py::arg("matrix"), py::arg("psd_tolerance") = kDefaultPsdTolerance)
      .def_property_readonly("matrix", &Covariance::matrix)
      .def_property_readonly("size", &Covariance::size)
      .def("inner", &Covariance::inner);

  py::class_<InvarianceReport>(m, "InvarianceReport")
      .def_readonly("passed", &InvarianceReport::passed)
      .def_readonly("deviation", &InvarianceReport::deviation)
      .def_readonly("scale", &InvarianceReport::scale)
      .def_readonly("tolerance", &InvarianceReport::tolerance);
  py::class_<PsdReport>(m, "PsdReport")
      .def_readonly("passed", &PsdReport::passed)
      .def_readonly("min_eigenvalue", &PsdReport::min_eigenvalue)
      .def_readonly("spectral_norm", &PsdReport::spectral_norm)
      .def_readonly("tolerance", &PsdReport::tolerance);
  py::class_<GaussianRpReport>(m, "GaussianRpReport")
      .def_readonly("passed", &GaussianRpReport::passed)
      .def_property_readonly("failure",
                             [](const GaussianRpReport& r) -> std::string {
                               switch (r.failure) {
                                 case GaussianRpFailure::none: return "none";
                                 case GaussianRpFailure::not_theta_invariant: return "not_theta_invariant";
                                 case GaussianRpFailure::cross_block_not_psd: return "cross_block_not_psd";
                               }
                               return "";
                             })
      .def_readonly("invariance", &GaussianRpReport::invariance)
      .def_readonly("cross_block", &GaussianRpReport::cross_block);
  py::class_<PQPair>(m, "PQPair")
      .def_readonly("c_p", &PQPair::c_p)
      .def_readonly("c_q", &PQPair::c_q)
      .def_readonly("p_report", &PQPair::p_report)
      .def_readonly("q_report", &PQPair::q_report)
      .def_readonly("adjusted_entries", &PQPair::adjusted_entries);
  py::class_<ConvolutionReport>(m, "ConvolutionReport")
      .def_readonly("passed", &ConvolutionReport::passed)
      .def_readonly("algebraic_passed", &ConvolutionReport::algebraic_passed)
      .def_readonly("algebraic_deviation", &ConvolutionReport::algebraic_deviation)
      .def_readonly("sampling_passed", &ConvolutionReport::sampling_passed)
      .def_readonly("n_samples", &ConvolutionReport::n_samples)
      .def_readonly("seed", &ConvolutionReport::seed)
      .def_readonly("max_abs_z", &ConvolutionReport::max_abs_z);

  m.def("free_field_covariance", &free_field_covariance, py::arg("lattice"), py::arg("mass"));
  m.def("char_fn", &char_fn, py::arg("covariance"), py::arg("phi"));
  m.def("check_theta_invariance", &check_theta_invariance, py::arg("lattice"), py::arg("covariance"),
        py::arg("tol") = kDefaultInvarianceTolerance);
  m.def("cross_block", &cross_block, py::arg("covariance"), py::arg("lattice"));
  m.def("plus_block", &plus_block, py::arg("covariance"), py::arg("lattice"));
  m.def("check_gaussian_rp", &check_gaussian_rp, py::arg("covariance"), py::arg("lattice"),
        py::arg("tol") = kDefaultPsdTolerance);
  m.def("theta_inner", &theta_inner, py::arg("covariance"), py::arg("lattice"), py::arg("phi"));
  m.def("decompose_pq", &decompose_pq, py::arg("covariance"), py::arg("lattice"), py::arg("tol") = kDefaultPsdTolerance);
  m.def("verify_convolution_identity", &verify_convolution_identity, py::arg("covariance"), py::arg("lattice"),
        py::arg("tol") = 1e-12, py::arg("n_samples") = 100000, py::arg("seed") = 0);
  m.def(
      "sample",
      [](const Covariance& c, Index n, std::uint64_t seed) {
        const FieldSample s = sample(c, n, seed);
        Eigen::MatrixXd out(s.count, c.size());
        for (Index k = 0; k < s.count; ++k) out.row(k) = s.configs[static_cast<std::size_t>(k)].transpose();
        return out;
      },
      py::arg("covariance"), py::arg("n"), py::arg("seed"), "Samples as rows of an (n, sites) array.");

  py::class_<Factor>(m, "Factor")
      .def(py::init<Index, int>(), py::arg("site"), py::arg("power") = 1)
      .def_readwrite("site", &Factor::site)
      .def_readwrite("power", &Factor::power)
      .def("__eq__", [](const Factor& a, const Factor& b) { return a == b; });
  py::class_<Term>(m, "Term")
      .def(py::init<double, std::vector<Factor>>(), py::arg("coefficient"), py::arg("factors"))
      .def_readwrite("coefficient", &Term::coefficient)
      .def_readwrite("factors", &Term::factors)
      .def("__eq__", [](const Term& a, const Term& b) { return a == b; });
  py::class_<Potential>(m, "Potential")
      .def(py::init<>())
      .def(py::init([](std::vector<Term> terms, double constant) { return Potential{std::move(terms), constant}; }),
           py::arg("terms"), py::arg("constant") = 0.0)
      .def_readwrite("terms", &Potential::terms)
      .def_readwrite("constant", &Potential::constant)
      .def("__eq__", [](const Potential& a, const Potential& b) { return a == b; })
      .def("__add__", [](const Potential& a, const Potential& b) { return a + b; })
      .def("__sub__", [](const Potential& a, const Potential& b) { return a - b; })
      .def("__rmul__", [](const Potential& p, double s) { return s * p; })
      .def("__call__", [](const Potential& p, const SiteVector& v) { return eval_potential(p, v); })
      .def("to_dict", [](const Potential& p, const Lattice& l) { return to_python(potential_to_json(l, p)); })
      .def_static("from_dict",
                  [](const Lattice& l, const py::object& o) { return potential_from_json(l, from_python(o)); });

  py::class_<Violation>(m, "Violation")
      .def_readonly("term", &Violation::term)
      .def_property_readonly("kind", [](const Violation& v) { return std::string(to_string(v.kind)); });
  py::class_<SplitResult>(m, "SplitResult")
      .def_readonly("is_splitting", &SplitResult::is_splitting)
      .def_readonly("witness_g", &SplitResult::witness_g)
      .def_readonly("violations", &SplitResult::violations);

  m.def("canonicalize", [](const Potential& p) { return canonicalize(p); }, py::arg("potential"));
  m.def("eval_potential", &eval_potential, py::arg("potential"), py::arg("config"));
  m.def("reflect_potential", &reflect_potential, py::arg("lattice"), py::arg("potential"));
  m.def("phi4", &phi4, py::arg("lattice"), py::arg("lam"));
  m.def("split_check", &split_check, py::arg("lattice"), py::arg("f"));

  py::class_<McParams>(m, "McParams")
      .def(py::init<>())
      .def_readwrite("n_samples", &McParams::n_samples)
      .def_readwrite("seed", &McParams::seed)
      .def_readwrite("n_outer", &McParams::n_outer)
      .def_readwrite("n_inner", &McParams::n_inner)
      .def_readwrite("share_inner", &McParams::share_inner)
      .def_readwrite("threads", &McParams::threads)
      .def_readwrite("bootstrap_replicates", &McParams::bootstrap_replicates)
      .def_readwrite("tolerance", &McParams::tolerance);

  py::class_<GramReport>(m, "GramReport")
      .def_readonly("matrix", &GramReport::matrix)
      .def_readonly("std_error", &GramReport::std_error)
      .def_readonly("min_eigenvalue", &GramReport::min_eigenvalue)
      .def_readonly("eig_error_bound", &GramReport::eig_error_bound)
      .def_readonly("tolerance", &GramReport::tolerance)
      .def_property_readonly("verdict", [](const GramReport& r) { return std::string(to_string(r.verdict)); })
      .def_property_readonly("estimator_kind",
                             [](const GramReport& r) { return std::string(to_string(r.estimator_kind)); })
      .def_readonly("n_samples", &GramReport::n_samples)
      .def_readonly("n_outer", &GramReport::n_outer)
      .def_readonly("n_inner", &GramReport::n_inner)
      .def_readonly("seed", &GramReport::seed)
      .def_readonly("effective_sample_size", &GramReport::effective_sample_size)
      .def_readonly("hermitian_defect", &GramReport::hermitian_defect)
      .def_readonly("bootstrap_fail_fraction", &GramReport::bootstrap_fail_fraction)
      .def_readonly("ill_conditioned_weights", &GramReport::ill_conditioned_weights)
      .def("to_dict", [](const GramReport& r) { return to_python(gram_report_to_json(r)); });

  py::class_<GramComparison>(m, "GramComparison")
      .def_readonly("passed", &GramComparison::passed)
      .def_readonly("max_abs_diff", &GramComparison::max_abs_diff)
      .def_readonly("worst_ratio", &GramComparison::worst_ratio);

  py::class_<PsdCheck>(m, "PsdCheck")
      .def_property_readonly("verdict", [](const PsdCheck& r) { return std::string(to_string(r.verdict)); })
      .def_readonly("min_eigenvalue", &PsdCheck::min_eigenvalue)
      .def_readonly("hermitian_defect", &PsdCheck::hermitian_defect);

  m.def("psd_check", &psd_check, py::arg("m"), py::arg("tol"), py::arg("eig_error_bound") = 0.0);
  m.def("gram_exact_gaussian", &gram_exact_gaussian, py::arg("covariance"), py::arg("lattice"), py::arg("phis"),
        py::arg("tol") = kDefaultPsdTolerance);
  m.def("gram_mc_direct", &gram_mc_direct, py::arg("covariance"), py::arg("lattice"), py::arg("f"), py::arg("phis"),
        py::arg("params") = McParams{}, py::call_guard<py::gil_scoped_release>());
  m.def("gram_mc_factorized", &gram_mc_factorized, py::arg("covariance"), py::arg("lattice"), py::arg("g"),
        py::arg("phis"), py::arg("params") = McParams{}, py::call_guard<py::gil_scoped_release>());
  m.def("compare_grams", &compare_grams, py::arg("a"), py::arg("b"), py::arg("bias_allowance") = 0.0);
  m.def("random_test_functions", &random_test_functions, py::arg("lattice"), py::arg("count"), py::arg("seed"),
        py::arg("include_zero") = true);
  m.def("schur_product", &schur_product, py::arg("a"), py::arg("b"));
  m.def("small_lambda_probe", &small_lambda_probe, py::arg("covariance"), py::arg("lattice"), py::arg("phi"),
        py::arg("lambdas"));

  m.def(
      "run_command",
      [](const std::string& command, const py::object& config, std::optional<std::uint64_t> seed) {
        cli::CommandOptions opts;
        opts.seed = seed;
        cli::RunResult r = command == "selftest" ? cli::cmd_selftest(1.0, opts)
                                                 : dispatch(command, cli::parse_config(from_python(config)), opts);
        return py::make_tuple(r.exit_code, to_python(r.report));
      },
      py::arg("command"), py::arg("config") = py::dict(), py::arg("seed") = py::none(),
      "Runs a CLI command on an in-memory config; returns (exit_code, report).");
  m.def(
      "main",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), cli::kToolName);
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        return cli::run(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"));
}
