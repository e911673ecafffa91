#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "reflpos/density.hpp"
#include "reflpos/gaussian.hpp"
#include "reflpos/lattice.hpp"

namespace reflpos {

enum class Verdict { pass, fail, inconclusive };
std::string_view to_string(Verdict v);

enum class EstimatorKind { exact_gaussian, mc_direct, mc_factorized_shared, mc_factorized_independent };
std::string_view to_string(EstimatorKind k);

/**
 * Gram matrix M_mn ~ omega_hat(phi_m - theta phi_n) together with its PSD verdict.
 *
 * `matrix` is stored after hermitization; `hermitian_defect` is the largest
 * |M - M^H| seen before it. For Monte Carlo estimates `eig_error_bound` is
 * K * max entrywise standard error and a fail verdict additionally requires
 * the negative sign to persist in at least 95% of block-bootstrap replicates.
 */
struct GramReport {
  Eigen::MatrixXcd matrix;
  Eigen::MatrixXd std_error;
  double min_eigenvalue = 0.0;
  double eig_error_bound = 0.0;
  double tolerance = 0.0;
  Verdict verdict = Verdict::inconclusive;
  EstimatorKind estimator_kind = EstimatorKind::exact_gaussian;
  Index n_samples = 0;
  Index n_outer = 0;
  Index n_inner = 0;
  std::uint64_t seed = 0;
  double effective_sample_size = 0.0;
  double hermitian_defect = 0.0;
  double bootstrap_fail_fraction = 0.0;
  bool ill_conditioned_weights = false;
  Index n_test_functions = 0;
};

struct McParams {
  Index n_samples = 100000;
  std::uint64_t seed = 0;
  Index n_outer = 10000;
  Index n_inner = 1000;
  bool share_inner = true;
  unsigned threads = 0;  ///< 0 = hardware concurrency; never changes results
  Index bootstrap_replicates = 200;
  double tolerance = kDefaultPsdTolerance;
};

struct PsdCheck {
  Verdict verdict = Verdict::inconclusive;
  double min_eigenvalue = 0.0;
  double hermitian_defect = 0.0;
};

/// Thrown when the P/Q factorization of the Gaussian does not exist.
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hermitizes `m` and applies: pass iff lambda_min >= -tol - 5 * eig_error_bound, else fail.
PsdCheck psd_check(const Eigen::MatrixXcd& m, double tol, double eig_error_bound);

GramReport gram_exact_gaussian(const Covariance& c, const Lattice& lattice,
                               const std::vector<SiteVector>& phis,
                               double tol = kDefaultPsdTolerance);

/// (1/n) sum_k exp(i T_k(phi_m - theta phi_n) + F(T_k)) over T_k ~ mu.
GramReport gram_mc_direct(const Covariance& c, const Lattice& lattice, const Potential& f,
                          const std::vector<SiteVector>& phis, const McParams& params);

/**
 * Outer average over L ~ Q of conj(H_m(L)) H_n(L), where H_m(L) is an inner
 * average over T ~ P of exp(-i (T + L) . phi_m + G(T + L)) on the positive half.
 * With share_inner the same inner draws feed both factors, which makes every
 * outer summand rank one.
 */
GramReport gram_mc_factorized(const Covariance& c, const Lattice& lattice, const Potential& g,
                              const std::vector<SiteVector>& phis, const McParams& params);

struct GramComparison {
  bool passed = false;
  double max_abs_diff = 0.0;
  double worst_ratio = 0.0;  ///< max |diff| / allowance
};

/// Entrywise |a - b| <= 5 * (sqrt(se_a^2 + se_b^2) + bias_allowance).
GramComparison compare_grams(const GramReport& a, const GramReport& b, double bias_allowance);

/// K random positive-support test functions with standard normal entries on the
/// positive half, optionally followed by the zero function.
std::vector<SiteVector> random_test_functions(const Lattice& lattice, Index count,
                                              std::uint64_t seed, bool include_zero = true);

/// Entrywise product.
Eigen::MatrixXd schur_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// lambda^-2 [mu_hat(lambda (phi - theta phi)) - mu_hat(lambda phi) - mu_hat(lambda theta phi) + 1],
/// which tends to (phi, theta phi) as lambda -> 0.
std::vector<double> small_lambda_probe(const Covariance& c, const Lattice& lattice,
                                       const SiteVector& phi, const std::vector<double>& lambdas);

}  // namespace reflpos
