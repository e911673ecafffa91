#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "oracles.hpp"
#include "reflpos/rp_verify.hpp"

namespace reflpos {
namespace {

Covariance two_site(double c) {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, c, c, 1.0;
  return Covariance(m);
}

const std::vector<SiteVector> kTwoSitePhis{SiteVector{{0.0, 1.0}}, SiteVector::Zero(2)};

void expect_entrywise_within(const GramReport& est, const Eigen::MatrixXcd& exact, double sigmas) {
  for (Index i = 0; i < exact.rows(); ++i) {
    for (Index j = 0; j < exact.cols(); ++j) {
      EXPECT_LE(std::abs(est.matrix(i, j) - exact(i, j)), sigmas * est.std_error(i, j))
          << "entry (" << i << "," << j << ")";
    }
  }
}

TEST(PsdCheck, Examples) {
  const PsdCheck id = psd_check(Eigen::MatrixXcd::Identity(2, 2), 1e-10, 0.0);
  EXPECT_EQ(id.verdict, Verdict::pass);
  EXPECT_DOUBLE_EQ(id.min_eigenvalue, 1.0);

  // 2-site Gaussian Grams for c = -0.5 and c = +0.5 with phi1 = (0,1), phi2 = 0.
  Eigen::MatrixXcd bad(2, 2);
  bad << std::exp(-1.5), std::exp(-0.5), std::exp(-0.5), 1.0;
  const PsdCheck neg = psd_check(bad, 1e-10, 0.0);
  EXPECT_EQ(neg.verdict, Verdict::fail);
  EXPECT_NEAR((bad.determinant()).real(), std::exp(-1.5) - std::exp(-1.0), 1e-15);
  EXPECT_LT(neg.min_eigenvalue, 0.0);

  Eigen::MatrixXcd good(2, 2);
  good << std::exp(-0.5), std::exp(-0.5), std::exp(-0.5), 1.0;
  EXPECT_EQ(psd_check(good, 1e-10, 0.0).verdict, Verdict::pass);
  EXPECT_NEAR(good.determinant().real(), 0.2386512185, 1e-9);

  EXPECT_THROW(psd_check(Eigen::MatrixXcd::Zero(2, 3), 0.0, 0.0), std::invalid_argument);
}

TEST(PsdCheck, ErrorBoundWidensPassRegion) {
  Eigen::MatrixXcd m(1, 1);
  m << -0.01;
  EXPECT_EQ(psd_check(m, 0.0, 0.0).verdict, Verdict::fail);
  EXPECT_EQ(psd_check(m, 0.0, 0.002).verdict, Verdict::pass);
}

TEST(GramExact, TwoSiteClosedForms) {
  const Lattice two = build_lattice(1, {});
  for (double c : {0.5, -0.5}) {
    const GramReport g = gram_exact_gaussian(two_site(c), two, kTwoSitePhis);
    EXPECT_NEAR(g.matrix(0, 0).real(), std::exp(-(1.0 - c)), 1e-15);
    EXPECT_NEAR(g.matrix(0, 1).real(), std::exp(-0.5), 1e-15);
    EXPECT_EQ(g.matrix(1, 1).real(), 1.0);
    EXPECT_TRUE(g.matrix.imag().isZero(0.0));
    EXPECT_TRUE(g.std_error.isZero(0.0));
    const double det = (g.matrix(0, 0) * g.matrix(1, 1) - g.matrix(0, 1) * g.matrix(1, 0)).real();
    EXPECT_NEAR(det, std::exp(-(1.0 - c)) - std::exp(-1.0), 1e-12);
    EXPECT_EQ(g.verdict, c > 0 ? Verdict::pass : Verdict::fail);
  }
}

TEST(GramExact, ZeroFunctionOnlyAndSupportCheck) {
  const Lattice l = build_lattice(2, {3});
  const Covariance c = free_field_covariance(l, 1.0);
  const GramReport g = gram_exact_gaussian(c, l, {SiteVector::Zero(12)});
  ASSERT_EQ(g.matrix.rows(), 1);
  EXPECT_EQ(g.matrix(0, 0), std::complex<double>(1.0, 0.0));
  EXPECT_EQ(g.verdict, Verdict::pass);

  SiteVector leaky = SiteVector::Zero(12);
  leaky[0] = 1.0;
  EXPECT_THROW(gram_exact_gaussian(c, l, {leaky}), std::invalid_argument);
}

TEST(GramExact, FreeFieldRandomFamiliesArePsd) {
  const Lattice l = build_lattice(3, {4});
  const Covariance c = free_field_covariance(l, 0.5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GramReport g = gram_exact_gaussian(c, l, random_test_functions(l, 6, seed));
    EXPECT_EQ(g.verdict, Verdict::pass) << "seed " << seed << " min eig " << g.min_eigenvalue;
  }
}

TEST(GramMcDirect, GaussianConsistencyAcrossSeeds) {
  const Lattice l = build_lattice(2, {4});
  const Covariance c = free_field_covariance(l, 1.0);
  const auto phis = random_test_functions(l, 3, 77);
  const Eigen::MatrixXcd exact = gram_exact_gaussian(c, l, phis).matrix;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    McParams p;
    p.n_samples = 20000;
    p.seed = seed;
    const GramReport g = gram_mc_direct(c, l, Potential{}, phis, p);
    expect_entrywise_within(g, exact, 5.0);
    EXPECT_EQ(g.estimator_kind, EstimatorKind::mc_direct);
    EXPECT_DOUBLE_EQ(g.effective_sample_size, 20000.0);
    EXPECT_FALSE(g.ill_conditioned_weights);
  }
}

TEST(GramMcDirect, AgreesWithExactAtHundredThousand) {
  const Lattice two = build_lattice(1, {});
  McParams p;
  p.n_samples = 100000;
  p.seed = 3;
  const GramReport g = gram_mc_direct(two_site(0.5), two, Potential{}, kTwoSitePhis, p);
  expect_entrywise_within(g, gram_exact_gaussian(two_site(0.5), two, kTwoSitePhis).matrix, 5.0);
  EXPECT_EQ(g.verdict, Verdict::pass);
}

TEST(GramMcDirect, DetectsNonReflectionPositiveGaussian) {
  const Lattice two = build_lattice(1, {});
  McParams p;
  p.n_samples = 100000;
  p.seed = 11;
  const GramReport g = gram_mc_direct(two_site(-0.5), two, Potential{}, kTwoSitePhis, p);
  EXPECT_EQ(g.verdict, Verdict::fail);
  EXPECT_GE(g.bootstrap_fail_fraction, 0.95);
}

TEST(GramMcDirect, ResultIndependentOfThreadCount) {
  const Lattice l = build_lattice(2, {4});
  const Covariance c = free_field_covariance(l, 1.0);
  const auto phis = random_test_functions(l, 3, 1);
  McParams p;
  p.n_samples = 30000;
  p.seed = 8;
  p.threads = 1;
  const GramReport one = gram_mc_direct(c, l, phi4(l, 0.1), phis, p);
  p.threads = 4;
  const GramReport four = gram_mc_direct(c, l, phi4(l, 0.1), phis, p);
  EXPECT_EQ(one.matrix, four.matrix);
  EXPECT_EQ(one.std_error, four.std_error);
}

TEST(GramMcDirect, HermitianDefectIsStatistical) {
  const Lattice l = build_lattice(2, {4});
  const Covariance c = free_field_covariance(l, 1.0);
  McParams p;
  p.n_samples = 50000;
  p.seed = 2;
  const GramReport g = gram_mc_direct(c, l, phi4(l, 0.1), random_test_functions(l, 4, 2), p);
  EXPECT_LE(g.hermitian_defect, 5.0 * 2.0 * g.std_error.maxCoeff());
}

TEST(GramMcDirect, OverflowingWeightsAreIllConditioned) {
  const Lattice two = build_lattice(1, {});
  Potential huge;
  huge.constant = 1000.0;
  McParams p;
  p.n_samples = 100;
  const GramReport g = gram_mc_direct(two_site(0.5), two, huge, kTwoSitePhis, p);
  EXPECT_TRUE(g.ill_conditioned_weights);
  EXPECT_EQ(g.verdict, Verdict::inconclusive);
}

TEST(GramMcFactorized, SharedInnerIsStructurallyPsd) {
  const Lattice l = build_lattice(2, {4});
  const Covariance c = free_field_covariance(l, 1.0);
  const Potential g = *split_check(l, phi4(l, 0.5)).witness_g;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    McParams p;
    p.n_outer = 200;
    p.n_inner = 20;
    p.seed = seed;
    const GramReport r = gram_mc_factorized(c, l, g, random_test_functions(l, 6, seed), p);
    EXPECT_GE(r.min_eigenvalue, -1e-10);
    EXPECT_EQ(r.estimator_kind, EstimatorKind::mc_factorized_shared);
  }
}

TEST(GramMcFactorized, GaussianConsistencyBothModes) {
  const Lattice l = build_lattice(2, {4});
  const Covariance c = free_field_covariance(l, 1.0);
  const auto phis = random_test_functions(l, 3, 9);
  const Eigen::MatrixXcd exact = gram_exact_gaussian(c, l, phis).matrix;
  for (bool share : {true, false}) {
    McParams p;
    p.n_outer = 10000;
    p.n_inner = 1000;
    p.share_inner = share;
    p.seed = 21;
    const GramReport r = gram_mc_factorized(c, l, Potential{}, phis, p);
    for (Index i = 0; i < exact.rows(); ++i) {
      for (Index j = 0; j < exact.cols(); ++j) {
        EXPECT_LE(std::abs(r.matrix(i, j) - exact(i, j)), 5.0 * r.std_error(i, j) + (share ? 2e-3 : 0.0))
            << (share ? "shared" : "independent") << " (" << i << "," << j << ")";
      }
    }
  }
}

TEST(GramMcFactorized, RefusesNonReflectionPositiveGaussian) {
  const Lattice two = build_lattice(1, {});
  McParams p;
  p.n_outer = 10;
  p.n_inner = 10;
  EXPECT_THROW(gram_mc_factorized(two_site(-0.5), two, Potential{}, kTwoSitePhis, p), FactorizationError);
}

TEST(GramMcFactorized, RejectsWitnessOffPositiveHalf) {
  const Lattice two = build_lattice(1, {});
  Potential g;
  g.terms.push_back({-1.0, {{0, 4}}});
  McParams p;
  p.n_outer = 10;
  p.n_inner = 10;
  EXPECT_THROW(gram_mc_factorized(two_site(0.5), two, g, kTwoSitePhis, p), std::invalid_argument);
}

TEST(CompareGrams, UsesCombinedStderrAndBias) {
  GramReport a, b;
  a.matrix = Eigen::MatrixXcd::Constant(1, 1, 1.0);
  b.matrix = Eigen::MatrixXcd::Constant(1, 1, 1.1);
  a.std_error = Eigen::MatrixXd::Constant(1, 1, 0.012);
  b.std_error = Eigen::MatrixXd::Constant(1, 1, 0.016);
  EXPECT_FALSE(compare_grams(a, b, 0.0).passed);  // 5 * 0.02 = 0.1 < 0.1 + eps
  EXPECT_TRUE(compare_grams(a, b, 0.001).passed);
}

TEST(RandomTestFunctions, PositiveSupportDeterministicAndZeroLast) {
  const Lattice l = build_lattice(2, {3});
  const auto a = random_test_functions(l, 4, 5);
  const auto b = random_test_functions(l, 4, 5);
  ASSERT_EQ(a.size(), 5u);
  EXPECT_EQ(a, b);
  for (const auto& phi : a) EXPECT_TRUE(positive_support(l, phi));
  EXPECT_TRUE(a.back().isZero(0.0));
  EXPECT_EQ(random_test_functions(l, 4, 5, false).size(), 4u);
}

TEST(Schur, Examples) {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 2, 1, 1, 2;
  b << 3, 0, 0, 3;
  EXPECT_EQ(schur_product(a, b), Eigen::MatrixXd(Eigen::MatrixXd::Identity(2, 2) * 6.0));
  a << 1, 1, 1, 1;
  b << 1, -1, -1, 1;
  const Eigen::MatrixXd p = schur_product(a, b);
  EXPECT_EQ(p, b);
  EXPECT_NEAR(oracle::min_eig(p), 0.0, 1e-15);
  EXPECT_THROW(schur_product(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(3, 3)), std::invalid_argument);
}

TEST(Schur, RandomPsdPairsStayPsd) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> dim(1, 8);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = dim(rng);
    const Eigen::MatrixXd a = oracle::random_psd(rng, n), b = oracle::random_psd(rng, n);
    const double scale = a.operatorNorm() * b.operatorNorm();
    EXPECT_GE(oracle::min_eig(schur_product(a, b)), -1e-10 * scale);
  }
}

TEST(Schur, DiagonalizationIdentity) {
  // c^T (A o B) c = sum_a lambda_a (c o u_a)^T B (c o u_a) with A = sum_a lambda_a u_a u_a^T.
  std::mt19937_64 rng(37);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 6;
    const Eigen::MatrixXd a = oracle::random_psd(rng, n), b = oracle::random_psd(rng, n);
    Eigen::VectorXd c(n);
    for (int i = 0; i < n; ++i) c[i] = normal(rng);
    const double lhs = c.dot(schur_product(a, b) * c);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    double rhs = 0.0;
    for (int k = 0; k < n; ++k) {
      const Eigen::VectorXd w = c.cwiseProduct(es.eigenvectors().col(k));
      const double term = es.eigenvalues()[k] * w.dot(b * w);
      EXPECT_GE(term, -1e-10 * a.operatorNorm() * b.operatorNorm() * c.squaredNorm());
      rhs += term;
    }
    EXPECT_NEAR(lhs, rhs, 1e-9 * std::max(1.0, std::abs(lhs)));
  }
}

TEST(SmallLambdaProbe, TwoSiteClosedFormAndRichardson) {
  const Lattice two = build_lattice(1, {});
  const SiteVector phi{{0.0, 1.0}};
  const auto v = small_lambda_probe(two_site(0.5), two, phi, {0.2, 0.1, 0.05, 0.025});
  EXPECT_NEAR(v[1], 100.0 * (1.0 - std::exp(-0.005)), 1e-12);
  EXPECT_NEAR(v[1], 0.49875, 1e-5);
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double ratio = (0.5 - v[i]) / (0.5 - v[i + 1]);
    EXPECT_NEAR(ratio, 4.0, 0.8);
  }
}

TEST(SmallLambdaProbe, ConvergesToThetaInnerWithStableConstant) {
  const Lattice l = build_lattice(2, {3});
  const Covariance c = free_field_covariance(l, 0.7);
  const SiteVector phi = random_test_functions(l, 1, 4, false).front();
  const double target = theta_inner(c, l, phi);
  const std::vector<double> lambdas{0.2, 0.1, 0.05, 0.025};
  const auto v = small_lambda_probe(c, l, phi, lambdas);
  std::vector<double> k;
  for (std::size_t i = 0; i < v.size(); ++i) k.push_back(std::abs(v[i] - target) / (lambdas[i] * lambdas[i]));
  const auto [lo, hi] = std::minmax_element(k.begin(), k.end());
  EXPECT_LT(*hi / *lo, 1.5);
}

TEST(SmallLambdaProbe, ZeroAndErrors) {
  const Lattice two = build_lattice(1, {});
  for (double x : small_lambda_probe(two_site(0.5), two, SiteVector::Zero(2), {0.3, 0.01})) EXPECT_EQ(x, 0.0);
  EXPECT_THROW(small_lambda_probe(two_site(0.5), two, SiteVector{{0.0, 1.0}}, {0.0}), std::invalid_argument);
  EXPECT_THROW(small_lambda_probe(two_site(0.5), two, SiteVector{{1.0, 0.0}}, {0.1}), std::invalid_argument);
}

}  // namespace
}  // namespace reflpos
