#pragma once

#include <Eigen/Core>

namespace reflpos {

/// Smallest eigenvalue of a real symmetric matrix (0 for an empty matrix).
double min_eigenvalue(const Eigen::MatrixXd& m);
/// Smallest eigenvalue of a complex Hermitian matrix (0 for an empty matrix).
double min_eigenvalue(const Eigen::MatrixXcd& m);
/// Spectral norm of a real symmetric matrix.
double spectral_norm(const Eigen::MatrixXd& m);
/// max_ij |m_ij|
double max_abs(const Eigen::MatrixXd& m);

/// Symmetric square root factor F with F F^T = m, negative eigenvalues clipped to zero.
Eigen::MatrixXd symmetric_factor(const Eigen::MatrixXd& m);

}  // namespace reflpos
