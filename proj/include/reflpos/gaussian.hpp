#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "reflpos/lattice.hpp"

namespace reflpos {

inline constexpr double kDefaultPsdTolerance = 1e-10;
inline constexpr double kDefaultInvarianceTolerance = 1e-12;

/**
 * Covariance of a centred Gaussian measure on the lattice.
 *
 * The matrix is stored exactly symmetric and is positive semidefinite up to
 * psd_tolerance * max(1, ||C||_2); both are enforced on construction.
 */
class Covariance {
 public:
  explicit Covariance(Eigen::MatrixXd matrix, double psd_tolerance = kDefaultPsdTolerance);

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  double psd_tolerance() const { return psd_tolerance_; }
  Index size() const { return matrix_.rows(); }

  /// (phi, psi) = phi^T C psi
  double inner(const SiteVector& phi, const SiteVector& psi) const;

 private:
  Eigen::MatrixXd matrix_;
  double psd_tolerance_;
};

struct InvarianceReport {
  bool passed = false;
  double deviation = 0.0;  ///< max |P^T C P - C|
  double scale = 1.0;      ///< max(1, max |C|)
  double tolerance = 0.0;
};

struct PsdReport {
  bool passed = false;
  double min_eigenvalue = 0.0;
  double spectral_norm = 0.0;
  double tolerance = 0.0;
};

enum class GaussianRpFailure { none, not_theta_invariant, cross_block_not_psd };

struct GaussianRpReport {
  bool passed = false;
  GaussianRpFailure failure = GaussianRpFailure::none;
  InvarianceReport invariance;
  PsdReport cross_block;
};

/// Covariances of the measures P (c_p = A - B) and Q (c_q = B) on the positive half.
struct PQPair {
  Eigen::MatrixXd c_p;
  Eigen::MatrixXd c_q;
  PsdReport p_report;
  PsdReport q_report;
  /// Entries where the split had to be nudged by an ulp so that c_p + c_q == A exactly.
  Index adjusted_entries = 0;
};

struct ConvolutionReport {
  bool passed = false;
  bool algebraic_passed = false;
  double algebraic_deviation = 0.0;
  bool sampling_passed = false;
  Index n_samples = 0;
  std::uint64_t seed = 0;
  double max_abs_z = 0.0;  ///< worst |empirical - exact| / stderr over the joint covariance
};

struct FieldSample {
  std::vector<SiteVector> configs;
  std::uint64_t seed = 0;
  Index count = 0;
};

/// (-Laplacian + m^2)^-1 with nearest-neighbour time links (including -1 <-> +1),
/// open time ends at +-T and periodic space.
Covariance free_field_covariance(const Lattice& lattice, double mass);

/// exp(-1/2 phi^T C phi)
double char_fn(const Covariance& c, const SiteVector& phi);

InvarianceReport check_theta_invariance(const Lattice& lattice, const Covariance& c,
                                        double tol = kDefaultInvarianceTolerance);

/// B_xy = C(x, theta y) for x, y on the positive half.
Eigen::MatrixXd cross_block(const Covariance& c, const Lattice& lattice);
/// A_xy = C(x, y) for x, y on the positive half.
Eigen::MatrixXd plus_block(const Covariance& c, const Lattice& lattice);

PsdReport psd_report(const Eigen::MatrixXd& m, double tol);

/// Exact criterion: theta-invariant and cross block positive semidefinite.
GaussianRpReport check_gaussian_rp(const Covariance& c, const Lattice& lattice,
                                   double tol = kDefaultPsdTolerance);

/// phi^T C (theta phi) for positive-support phi.
double theta_inner(const Covariance& c, const Lattice& lattice, const SiteVector& phi);

PQPair decompose_pq(const Covariance& c, const Lattice& lattice,
                    double tol = kDefaultPsdTolerance);

/// Checks Cov(pi+ T, pi+ theta T) = [[A-B,0],[0,A-B]] + [[B,B],[B,B]] algebraically and
/// against n samples of the field.
ConvolutionReport verify_convolution_identity(const Covariance& c, const Lattice& lattice,
                                              double tol, Index n_samples, std::uint64_t seed);

/**
 * Draws centred Gaussian vectors with a given covariance.
 *
 * Sample k is produced by substream (seed, tag, k / block_size), so any
 * sample range can be regenerated independently of how the work is split.
 */
class GaussianSampler {
 public:
  static constexpr Index kBlockSize = 4096;

  explicit GaussianSampler(const Eigen::MatrixXd& covariance);

  Index dimension() const { return factor_.rows(); }
  const Eigen::MatrixXd& factor() const { return factor_; }

  /// One draw using the caller's engine; `z` is scratch of size dimension().
  template <class Engine>
  void draw(Engine& engine, std::normal_distribution<double>& normal, Eigen::VectorXd& z,
            Eigen::VectorXd& out) const {
    for (Index i = 0; i < z.size(); ++i) z[i] = normal(engine);
    out.noalias() = factor_ * z;
  }

 private:
  Eigen::MatrixXd factor_;
};

FieldSample sample(const Covariance& c, Index n, std::uint64_t seed);

}  // namespace reflpos
