#include "reflpos/rp_verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "reflpos/linalg.hpp"
#include "reflpos/parallel.hpp"
#include "reflpos/random.hpp"

namespace reflpos {

namespace {

constexpr double kStableFailFraction = 0.95;
constexpr Index kOuterBlockSize = 64;
// exp overflows past ~709.78
constexpr double kMaxExponent = 700.0;

struct BlockSums {
  Eigen::MatrixXcd sum;
  Eigen::MatrixXd sq_re;
  Eigen::MatrixXd sq_im;
  Index count = 0;
  double weight_sum = 0.0;
  double weight_max = 0.0;
  bool overflow = false;

  explicit BlockSums(Index k = 0)
      : sum(Eigen::MatrixXcd::Zero(k, k)),
        sq_re(Eigen::MatrixXd::Zero(k, k)),
        sq_im(Eigen::MatrixXd::Zero(k, k)) {}

  void add(const Eigen::MatrixXcd& x) {
    sum += x;
    sq_re += x.real().cwiseAbs2();
    sq_im += x.imag().cwiseAbs2();
    ++count;
  }
};

void require_test_functions(const Lattice& lattice, const std::vector<SiteVector>& phis) {
  for (std::size_t i = 0; i < phis.size(); ++i) {
    if (phis[i].size() != lattice.site_count()) {
      throw std::invalid_argument("test function " + std::to_string(i) + " has length " +
                                  std::to_string(phis[i].size()) + ", expected " +
                                  std::to_string(lattice.site_count()));
    }
    if (!positive_support(lattice, phis[i])) {
      throw std::invalid_argument("test function " + std::to_string(i) +
                                  " does not vanish at negative times");
    }
  }
}

Eigen::MatrixXcd hermitize(const Eigen::MatrixXcd& m, double* defect) {
  if (defect) *defect = m.size() == 0 ? 0.0 : (m - m.adjoint()).cwiseAbs().maxCoeff();
  return 0.5 * (m + m.adjoint());
}

// Merges blocks in index order, fills matrix/std_error/verdict.
void finalize(GramReport& r, const std::vector<BlockSums>& blocks, const McParams& params) {
  const Index k = static_cast<Index>(r.n_test_functions);
  BlockSums total(k);
  for (const auto& b : blocks) {
    total.sum += b.sum;
    total.sq_re += b.sq_re;
    total.sq_im += b.sq_im;
    total.count += b.count;
    total.weight_sum += b.weight_sum;
    total.weight_max = std::max(total.weight_max, b.weight_max);
    total.overflow = total.overflow || b.overflow;
  }
  const double n = static_cast<double>(total.count);
  const Eigen::MatrixXcd mean = total.sum / n;
  r.std_error.resize(k, k);
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < k; ++j) {
      const double denom = std::max(1.0, n - 1.0);
      const double var_re = std::max(0.0, (total.sq_re(i, j) - n * std::norm(mean(i, j).real())) / denom);
      const double var_im = std::max(0.0, (total.sq_im(i, j) - n * std::norm(mean(i, j).imag())) / denom);
      r.std_error(i, j) = std::sqrt((var_re + var_im) / n);
    }
  }
  r.matrix = hermitize(mean, &r.hermitian_defect);
  r.tolerance = params.tolerance;
  r.eig_error_bound = static_cast<double>(k) * (k == 0 ? 0.0 : r.std_error.maxCoeff());
  if (total.weight_max > 0.0) r.effective_sample_size = total.weight_sum / total.weight_max;
  r.ill_conditioned_weights = total.overflow || !(total.weight_max > 0.0) || !r.matrix.allFinite();
  if (r.ill_conditioned_weights) {
    r.min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
    r.verdict = Verdict::inconclusive;
    return;
  }

  const PsdCheck chk = psd_check(r.matrix, params.tolerance, r.eig_error_bound);
  r.min_eigenvalue = chk.min_eigenvalue;
  r.verdict = chk.verdict;
  if (chk.verdict != Verdict::fail) return;

  // Sign stability of the negative eigenvalue under block resampling.
  const auto n_blocks = static_cast<Index>(blocks.size());
  auto engine = substream(params.seed, StreamTag::bootstrap, 0);
  std::uniform_int_distribution<Index> pick(0, n_blocks - 1);
  Index negative = 0;
  for (Index rep = 0; rep < params.bootstrap_replicates; ++rep) {
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(k, k);
    Index cnt = 0;
    for (Index b = 0; b < n_blocks; ++b) {
      const auto& blk = blocks[static_cast<std::size_t>(pick(engine))];
      s += blk.sum;
      cnt += blk.count;
    }
    if (cnt == 0) continue;
    if (min_eigenvalue(hermitize(s / static_cast<double>(cnt), nullptr)) < -params.tolerance) {
      ++negative;
    }
  }
  r.bootstrap_fail_fraction =
      params.bootstrap_replicates > 0
          ? static_cast<double>(negative) / static_cast<double>(params.bootstrap_replicates)
          : 1.0;
  if (r.bootstrap_fail_fraction < kStableFailFraction) r.verdict = Verdict::inconclusive;
}

void require_params(const McParams& p) {
  if (p.n_samples < 1 || p.n_outer < 1 || p.n_inner < 1) {
    throw std::invalid_argument("Monte Carlo sample counts must be >= 1");
  }
  if (p.bootstrap_replicates < 0) throw std::invalid_argument("bootstrap replicates must be >= 0");
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

std::string_view to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::exact_gaussian: return "exact_gaussian";
    case EstimatorKind::mc_direct: return "mc_direct";
    case EstimatorKind::mc_factorized_shared: return "mc_factorized_shared";
    case EstimatorKind::mc_factorized_independent: return "mc_factorized_independent";
  }
  return "unknown";
}

PsdCheck psd_check(const Eigen::MatrixXcd& m, double tol, double eig_error_bound) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("psd_check: matrix is " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + ", expected square");
  }
  PsdCheck out;
  const Eigen::MatrixXcd h = hermitize(m, &out.hermitian_defect);
  out.min_eigenvalue = min_eigenvalue(h);
  out.verdict = out.min_eigenvalue >= -tol - 5.0 * eig_error_bound ? Verdict::pass : Verdict::fail;
  return out;
}

GramReport gram_exact_gaussian(const Covariance& c, const Lattice& lattice,
                               const std::vector<SiteVector>& phis, double tol) {
  require_test_functions(lattice, phis);
  const auto k = static_cast<Index>(phis.size());
  std::vector<SiteVector> reflected;
  for (const auto& phi : phis) reflected.push_back(reflect(lattice, phi));

  GramReport r;
  r.estimator_kind = EstimatorKind::exact_gaussian;
  r.n_test_functions = k;
  r.tolerance = tol;
  r.matrix.resize(k, k);
  for (Index m = 0; m < k; ++m) {
    for (Index n = 0; n < k; ++n) {
      r.matrix(m, n) = char_fn(c, phis[static_cast<std::size_t>(m)] - reflected[static_cast<std::size_t>(n)]);
    }
  }
  r.std_error = Eigen::MatrixXd::Zero(k, k);
  const PsdCheck chk = psd_check(r.matrix, tol, 0.0);
  r.matrix = hermitize(r.matrix, &r.hermitian_defect);
  r.min_eigenvalue = chk.min_eigenvalue;
  r.verdict = chk.verdict;
  r.bootstrap_fail_fraction = chk.verdict == Verdict::fail ? 1.0 : 0.0;
  return r;
}

GramReport gram_mc_direct(const Covariance& c, const Lattice& lattice, const Potential& f,
                          const std::vector<SiteVector>& phis, const McParams& params) {
  require_params(params);
  require_test_functions(lattice, phis);
  if (c.size() != lattice.site_count()) {
    throw std::invalid_argument("covariance does not match lattice");
  }
  const auto k = static_cast<Index>(phis.size());
  const Index n = lattice.site_count();
  Eigen::MatrixXd plain(n, k), mirrored(n, k);
  for (Index m = 0; m < k; ++m) {
    plain.col(m) = phis[static_cast<std::size_t>(m)];
    mirrored.col(m) = reflect(lattice, phis[static_cast<std::size_t>(m)]);
  }
  const PotentialEvaluator density(canonicalize(f));
  const GaussianSampler sampler(c.matrix());

  const Index n_blocks = (params.n_samples + GaussianSampler::kBlockSize - 1) / GaussianSampler::kBlockSize;
  std::vector<BlockSums> blocks(static_cast<std::size_t>(n_blocks));
  for_each_block(n_blocks, params.threads, [&](std::int64_t blk) {
    auto engine = substream(params.seed, StreamTag::field_sample, static_cast<std::uint64_t>(blk));
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(n), field(n);
    Eigen::VectorXcd left(k), right(k);
    Eigen::MatrixXcd contrib(k, k);
    BlockSums acc(k);
    const Index begin = blk * GaussianSampler::kBlockSize;
    const Index end = std::min(params.n_samples, begin + GaussianSampler::kBlockSize);
    for (Index s = begin; s < end; ++s) {
      sampler.draw(engine, normal, z, field);
      const double exponent = density(field);
      if (!(exponent <= kMaxExponent)) {
        acc.overflow = true;
        ++acc.count;
        continue;
      }
      const double w = std::exp(exponent);
      acc.weight_sum += w;
      acc.weight_max = std::max(acc.weight_max, w);
      const Eigen::VectorXd a = plain.transpose() * field;
      const Eigen::VectorXd b = mirrored.transpose() * field;
      for (Index m = 0; m < k; ++m) {
        left[m] = std::polar(w, a[m]);
        right[m] = std::polar(1.0, -b[m]);
      }
      contrib.noalias() = left * right.transpose();
      acc.add(contrib);
    }
    blocks[static_cast<std::size_t>(blk)] = std::move(acc);
  });

  GramReport r;
  r.estimator_kind = EstimatorKind::mc_direct;
  r.n_test_functions = k;
  r.n_samples = params.n_samples;
  r.seed = params.seed;
  finalize(r, blocks, params);
  return r;
}

GramReport gram_mc_factorized(const Covariance& c, const Lattice& lattice, const Potential& g,
                              const std::vector<SiteVector>& phis, const McParams& params) {
  require_params(params);
  require_test_functions(lattice, phis);
  const PQPair pq = decompose_pq(c, lattice, params.tolerance);
  if (!pq.q_report.passed) {
    throw FactorizationError("cross block is not positive semidefinite (min eigenvalue " +
                             std::to_string(pq.q_report.min_eigenvalue) +
                             "); the measure Q does not exist");
  }
  if (!pq.p_report.passed) {
    throw FactorizationError("A - B is not positive semidefinite (min eigenvalue " +
                             std::to_string(pq.p_report.min_eigenvalue) +
                             "); the measure P does not exist");
  }
  const auto k = static_cast<Index>(phis.size());
  const Index h = lattice.half_count();
  Eigen::MatrixXd halves(h, k);
  for (Index m = 0; m < k; ++m) halves.col(m) = restrict_plus(lattice, phis[static_cast<std::size_t>(m)]);
  const PotentialEvaluator half_density(lattice, canonicalize(g));
  const GaussianSampler p_sampler(pq.c_p);
  const GaussianSampler q_sampler(pq.c_q);

  const Index n_blocks = (params.n_outer + kOuterBlockSize - 1) / kOuterBlockSize;
  std::vector<BlockSums> blocks(static_cast<std::size_t>(n_blocks));
  for_each_block(n_blocks, params.threads, [&](std::int64_t blk) {
    auto engine = substream(params.seed, StreamTag::factorized_outer, static_cast<std::uint64_t>(blk));
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(h), outer_draw(h), inner_draw(h), point(h);
    Eigen::VectorXcd h_first(k), h_second(k);
    Eigen::MatrixXcd contrib(k, k);
    BlockSums acc(k);
    bool overflow = false;

    // Inner average of exp(-i X . phi_m + G(X)) over X = T + L, T ~ P.
    auto inner_average = [&](Eigen::VectorXcd& out) {
      out.setZero();
      for (Index s = 0; s < params.n_inner; ++s) {
        p_sampler.draw(engine, normal, z, inner_draw);
        point = inner_draw + outer_draw;
        const double exponent = half_density(point);
        if (!(exponent <= kMaxExponent)) {
          overflow = true;
          continue;
        }
        const double w = std::exp(exponent);
        acc.weight_sum += w;
        acc.weight_max = std::max(acc.weight_max, w);
        const Eigen::VectorXd pairing = halves.transpose() * point;
        for (Index m = 0; m < k; ++m) out[m] += std::polar(w, -pairing[m]);
      }
      out /= static_cast<double>(params.n_inner);
    };

    const Index begin = blk * kOuterBlockSize;
    const Index end = std::min(params.n_outer, begin + kOuterBlockSize);
    for (Index s = begin; s < end; ++s) {
      q_sampler.draw(engine, normal, z, outer_draw);
      inner_average(h_first);
      if (params.share_inner) {
        contrib.noalias() = h_first.conjugate() * h_first.transpose();
      } else {
        inner_average(h_second);
        contrib.noalias() = h_first.conjugate() * h_second.transpose();
      }
      acc.add(contrib);
    }
    acc.overflow = overflow;
    blocks[static_cast<std::size_t>(blk)] = std::move(acc);
  });

  GramReport r;
  r.estimator_kind = params.share_inner ? EstimatorKind::mc_factorized_shared
                                        : EstimatorKind::mc_factorized_independent;
  r.n_test_functions = k;
  r.n_samples = params.n_outer * params.n_inner * (params.share_inner ? 1 : 2);
  r.n_outer = params.n_outer;
  r.n_inner = params.n_inner;
  r.seed = params.seed;
  finalize(r, blocks, params);
  return r;
}

GramComparison compare_grams(const GramReport& a, const GramReport& b, double bias_allowance) {
  if (a.matrix.rows() != b.matrix.rows() || a.matrix.cols() != b.matrix.cols()) {
    throw std::invalid_argument("compare_grams: shape mismatch");
  }
  GramComparison out;
  out.passed = true;
  for (Index i = 0; i < a.matrix.rows(); ++i) {
    for (Index j = 0; j < a.matrix.cols(); ++j) {
      const double diff = std::abs(a.matrix(i, j) - b.matrix(i, j));
      const double se = std::hypot(a.std_error(i, j), b.std_error(i, j));
      const double allowance = 5.0 * (se + bias_allowance);
      out.max_abs_diff = std::max(out.max_abs_diff, diff);
      if (allowance > 0.0) {
        out.worst_ratio = std::max(out.worst_ratio, diff / allowance);
      } else if (diff > 0.0) {
        out.worst_ratio = std::numeric_limits<double>::infinity();
      }
      if (diff > allowance) out.passed = false;
    }
  }
  return out;
}

std::vector<SiteVector> random_test_functions(const Lattice& lattice, Index count,
                                              std::uint64_t seed, bool include_zero) {
  if (count < 0) throw std::invalid_argument("test function count must be >= 0");
  auto engine = substream(seed, StreamTag::test_functions, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<SiteVector> out;
  for (Index i = 0; i < count; ++i) {
    HalfVector h(lattice.half_count());
    for (Index j = 0; j < h.size(); ++j) h[j] = normal(engine);
    out.push_back(embed_plus(lattice, h));
  }
  if (include_zero) out.push_back(SiteVector::Zero(lattice.site_count()));
  return out;
}

Eigen::MatrixXd schur_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("schur_product: shapes " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " and " + std::to_string(b.rows()) +
                                "x" + std::to_string(b.cols()) + " differ");
  }
  if (a.rows() != a.cols()) throw std::invalid_argument("schur_product: matrices must be square");
  return a.cwiseProduct(b);
}

std::vector<double> small_lambda_probe(const Covariance& c, const Lattice& lattice,
                                       const SiteVector& phi, const std::vector<double>& lambdas) {
  if (!positive_support(lattice, phi)) {
    throw std::invalid_argument("small_lambda_probe: test function must vanish at negative times");
  }
  const SiteVector mirrored = reflect(lattice, phi);
  std::vector<double> out;
  out.reserve(lambdas.size());
  for (double lambda : lambdas) {
    if (!(lambda > 0.0)) {
      throw std::invalid_argument("small_lambda_probe: lambda must be positive, got " +
                                  std::to_string(lambda));
    }
    const double form = char_fn(c, lambda * (phi - mirrored)) - char_fn(c, lambda * phi) -
                        char_fn(c, lambda * mirrored) + 1.0;
    out.push_back(form / (lambda * lambda));
  }
  return out;
}

}  // namespace reflpos
