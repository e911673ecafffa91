#include "reflpos/gaussian.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

#include "reflpos/linalg.hpp"
#include "reflpos/parallel.hpp"
#include "reflpos/random.hpp"

namespace reflpos {

namespace {

void require_size(const Covariance& c, Index len, const char* what) {
  if (len != c.size()) {
    throw std::invalid_argument(std::string(what) + ": vector length " + std::to_string(len) +
                                " does not match covariance size " + std::to_string(c.size()));
  }
}

void require_lattice(const Covariance& c, const Lattice& lattice) {
  if (c.size() != lattice.site_count()) {
    throw std::invalid_argument("covariance size " + std::to_string(c.size()) +
                                " does not match lattice site count " +
                                std::to_string(lattice.site_count()));
  }
}

// Finds (p, q) with p ~ a - b, q ~ b and fl(p + q) == a. Returns false if the
// naive split already works. The smaller of the two is walked one ulp at a
// time; each step moves the rounded sum by at most one ulp of a.
bool exact_split(double a, double b, double& p, double& q) {
  q = b;
  p = a - b;
  if (p + q == a) return false;
  double& nudge = std::abs(p) <= std::abs(q) ? p : q;
  const double start = nudge;
  for (int step = 0; step < 64 && p + q != a; ++step) {
    nudge = std::nextafter(nudge, (p + q < a) ? std::numeric_limits<double>::infinity()
                                              : -std::numeric_limits<double>::infinity());
  }
  if (p + q != a) nudge = start;
  return true;
}

}  // namespace

Covariance::Covariance(Eigen::MatrixXd matrix, double psd_tolerance)
    : matrix_(std::move(matrix)), psd_tolerance_(psd_tolerance) {
  if (matrix_.rows() != matrix_.cols()) {
    throw std::invalid_argument("covariance must be square, got " + std::to_string(matrix_.rows()) +
                                "x" + std::to_string(matrix_.cols()));
  }
  if (!(psd_tolerance_ >= 0.0)) throw std::invalid_argument("psd tolerance must be >= 0");
  if (!matrix_.allFinite()) throw std::invalid_argument("covariance has non-finite entries");
  if (matrix_ != matrix_.transpose()) throw std::invalid_argument("covariance is not symmetric");
  const double lo = min_eigenvalue(matrix_);
  const double bound = -psd_tolerance_ * std::max(1.0, spectral_norm(matrix_));
  if (lo < bound) {
    throw std::invalid_argument("covariance is not positive semidefinite: min eigenvalue " +
                                std::to_string(lo));
  }
}

double Covariance::inner(const SiteVector& phi, const SiteVector& psi) const {
  require_size(*this, phi.size(), "inner");
  require_size(*this, psi.size(), "inner");
  return phi.dot(matrix_ * psi);
}

Covariance free_field_covariance(const Lattice& lattice, double mass) {
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw std::invalid_argument("mass must be positive, got " + std::to_string(mass));
  }
  const Index n = lattice.site_count();
  const Index vol = lattice.spatial_volume();
  const int slices = 2 * lattice.time_extent();
  Eigen::MatrixXd op = Eigen::MatrixXd::Identity(n, n) * (mass * mass);

  // Each link contributes (phi_a - phi_b)^2 to the action.
  auto add_link = [&](Index a, Index b) {
    op(a, a) += 1.0;
    op(b, b) += 1.0;
    op(a, b) -= 1.0;
    op(b, a) -= 1.0;
  };
  for (int tau = 0; tau < slices; ++tau) {
    for (Index s = 0; s < vol; ++s) {
      const Index site = tau * vol + s;
      if (tau + 1 < slices) add_link(site, site + vol);
      for (int dir = 0; dir < lattice.spatial_dimension(); ++dir) {
        const Index fwd = lattice.spatial_shift(s, dir, +1);
        if (fwd != s) add_link(site, tau * vol + fwd);
      }
    }
  }

  Eigen::LLT<Eigen::MatrixXd> llt(op);
  if (llt.info() != Eigen::Success) {
    throw std::logic_error("free field operator is not positive definite");
  }
  Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(n, n));
  cov = (0.5 * (cov + cov.transpose())).eval();
  return Covariance(std::move(cov));
}

double char_fn(const Covariance& c, const SiteVector& phi) {
  require_size(c, phi.size(), "char_fn");
  return std::exp(-0.5 * phi.dot(c.matrix() * phi));
}

InvarianceReport check_theta_invariance(const Lattice& lattice, const Covariance& c, double tol) {
  require_lattice(c, lattice);
  const Eigen::MatrixXd& m = c.matrix();
  InvarianceReport r;
  r.tolerance = tol;
  r.scale = std::max(1.0, max_abs(m));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      r.deviation = std::max(r.deviation, std::abs(m(lattice.theta(i), lattice.theta(j)) - m(i, j)));
    }
  }
  r.passed = r.deviation <= tol * r.scale;
  return r;
}

Eigen::MatrixXd cross_block(const Covariance& c, const Lattice& lattice) {
  require_lattice(c, lattice);
  if (!check_theta_invariance(lattice, c).passed) {
    std::cerr << "warning: cross_block on a covariance that is not theta-invariant\n";
  }
  const Index h = lattice.half_count();
  Eigen::MatrixXd b(h, h);
  for (Index x = 0; x < h; ++x) {
    for (Index y = 0; y < h; ++y) {
      b(x, y) = c.matrix()(lattice.plus_site(x), lattice.theta(lattice.plus_site(y)));
    }
  }
  return b;
}

Eigen::MatrixXd plus_block(const Covariance& c, const Lattice& lattice) {
  require_lattice(c, lattice);
  const Index h = lattice.half_count();
  return c.matrix().bottomRightCorner(h, h);
}

PsdReport psd_report(const Eigen::MatrixXd& m, double tol) {
  PsdReport r;
  r.tolerance = tol;
  r.min_eigenvalue = min_eigenvalue(m);
  r.spectral_norm = spectral_norm(m);
  r.passed = r.min_eigenvalue >= -tol * std::max(1.0, r.spectral_norm);
  return r;
}

GaussianRpReport check_gaussian_rp(const Covariance& c, const Lattice& lattice, double tol) {
  GaussianRpReport r;
  r.invariance = check_theta_invariance(lattice, c);
  if (!r.invariance.passed) {
    r.failure = GaussianRpFailure::not_theta_invariant;
    return r;
  }
  r.cross_block = psd_report(cross_block(c, lattice), tol);
  r.passed = r.cross_block.passed;
  r.failure = r.passed ? GaussianRpFailure::none : GaussianRpFailure::cross_block_not_psd;
  return r;
}

double theta_inner(const Covariance& c, const Lattice& lattice, const SiteVector& phi) {
  require_lattice(c, lattice);
  if (!positive_support(lattice, phi)) {
    throw std::invalid_argument("theta_inner: test function must vanish at negative times");
  }
  return phi.dot(c.matrix() * reflect(lattice, phi));
}

PQPair decompose_pq(const Covariance& c, const Lattice& lattice, double tol) {
  const Eigen::MatrixXd a = plus_block(c, lattice);
  const Eigen::MatrixXd b = cross_block(c, lattice);
  PQPair pq;
  pq.c_p.resize(a.rows(), a.cols());
  pq.c_q.resize(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (exact_split(a(i, j), b(i, j), pq.c_p(i, j), pq.c_q(i, j))) ++pq.adjusted_entries;
    }
  }
  pq.p_report = psd_report(pq.c_p, tol);
  pq.q_report = psd_report(pq.c_q, tol);
  return pq;
}

ConvolutionReport verify_convolution_identity(const Covariance& c, const Lattice& lattice,
                                              double tol, Index n_samples, std::uint64_t seed) {
  ConvolutionReport r;
  r.n_samples = n_samples;
  r.seed = seed;
  const Index h = lattice.half_count();
  const Eigen::MatrixXd a = plus_block(c, lattice);
  const Eigen::MatrixXd b = cross_block(c, lattice);
  const PQPair pq = decompose_pq(c, lattice);

  Eigen::MatrixXd joint(2 * h, 2 * h);
  joint << a, b, b, a;
  Eigen::MatrixXd from_pq(2 * h, 2 * h);
  from_pq << pq.c_p + pq.c_q, pq.c_q, pq.c_q, pq.c_p + pq.c_q;
  r.algebraic_deviation = max_abs(joint - from_pq);
  r.algebraic_passed = r.algebraic_deviation <= tol;

  if (n_samples <= 0) {
    r.sampling_passed = true;
    r.passed = r.algebraic_passed;
    return r;
  }

  // Known zero mean: E[z z^T] estimates the covariance directly.
  const GaussianSampler sampler(c.matrix());
  const Index dim = 2 * h;
  const Index n_blocks = (n_samples + GaussianSampler::kBlockSize - 1) / GaussianSampler::kBlockSize;
  std::vector<Eigen::MatrixXd> first(static_cast<std::size_t>(n_blocks));
  std::vector<Eigen::MatrixXd> second(static_cast<std::size_t>(n_blocks));
  for_each_block(n_blocks, 0, [&](std::int64_t blk) {
    auto engine = substream(seed, StreamTag::convolution_check, static_cast<std::uint64_t>(blk));
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(sampler.dimension()), field(sampler.dimension()), pair(dim);
    Eigen::MatrixXd s1 = Eigen::MatrixXd::Zero(dim, dim), s2 = Eigen::MatrixXd::Zero(dim, dim);
    const Index begin = blk * GaussianSampler::kBlockSize;
    const Index end = std::min(n_samples, begin + GaussianSampler::kBlockSize);
    for (Index k = begin; k < end; ++k) {
      sampler.draw(engine, normal, z, field);
      pair.head(h) = field.tail(h);
      for (Index i = 0; i < h; ++i) pair[h + i] = field[lattice.theta(lattice.plus_site(i))];
      const Eigen::MatrixXd outer = pair * pair.transpose();
      s1 += outer;
      s2 += outer.cwiseProduct(outer);
    }
    first[static_cast<std::size_t>(blk)] = std::move(s1);
    second[static_cast<std::size_t>(blk)] = std::move(s2);
  });
  Eigen::MatrixXd s1 = Eigen::MatrixXd::Zero(dim, dim), s2 = Eigen::MatrixXd::Zero(dim, dim);
  for (Index blk = 0; blk < n_blocks; ++blk) {
    s1 += first[static_cast<std::size_t>(blk)];
    s2 += second[static_cast<std::size_t>(blk)];
  }
  const double n = static_cast<double>(n_samples);
  r.sampling_passed = true;
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j < dim; ++j) {
      const double mean = s1(i, j) / n;
      const double var = std::max(0.0, s2(i, j) / n - mean * mean);
      const double se = std::sqrt(var / n);
      const double diff = std::abs(mean - joint(i, j));
      if (se > 0.0) {
        r.max_abs_z = std::max(r.max_abs_z, diff / se);
      } else if (diff > tol) {
        r.sampling_passed = false;
      }
    }
  }
  r.sampling_passed = r.sampling_passed && r.max_abs_z <= 5.0;
  r.passed = r.algebraic_passed && r.sampling_passed;
  return r;
}

GaussianSampler::GaussianSampler(const Eigen::MatrixXd& covariance)
    : factor_(symmetric_factor(covariance)) {}

FieldSample sample(const Covariance& c, Index n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample count must be >= 1");
  FieldSample out;
  out.seed = seed;
  out.count = n;
  out.configs.assign(static_cast<std::size_t>(n), SiteVector(c.size()));
  const GaussianSampler sampler(c.matrix());
  const Index n_blocks = (n + GaussianSampler::kBlockSize - 1) / GaussianSampler::kBlockSize;
  for_each_block(n_blocks, 0, [&](std::int64_t blk) {
    auto engine = substream(seed, StreamTag::field_sample, static_cast<std::uint64_t>(blk));
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(c.size());
    const Index begin = blk * GaussianSampler::kBlockSize;
    const Index end = std::min(n, begin + GaussianSampler::kBlockSize);
    for (Index k = begin; k < end; ++k) {
      sampler.draw(engine, normal, z, out.configs[static_cast<std::size_t>(k)]);
    }
  });
  return out;
}

}  // namespace reflpos
