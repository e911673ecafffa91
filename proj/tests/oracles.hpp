#pragma once

// Test-only reference computations. Nothing here calls the code paths it is
// used to check.

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "reflpos/lattice.hpp"

namespace reflpos::oracle {

/// (-Laplacian + m^2)^-1 assembled from explicit coordinates: for every site
/// and every direction the +-1 neighbour (time: skipping t = 0, stopping at
/// +-T; space: periodic) contributes phi(x) - phi(y).
inline Eigen::MatrixXd free_field(const Lattice& lattice, double mass) {
  const Index n = lattice.site_count();
  const int big_t = lattice.time_extent();
  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(n, n);
  for (Index site = 0; site < n; ++site) {
    const SiteCoord c = lattice.coord_of(site);
    op(site, site) += mass * mass;
    for (int step : {-1, +1}) {
      int t = c.t + step;
      if (t == 0) t += step;
      if (t >= -big_t && t <= big_t) {
        SiteCoord nb = c;
        nb.t = t;
        op(site, site) += 1.0;
        op(site, lattice.index_of(nb)) -= 1.0;
      }
      for (std::size_t d = 0; d < c.x.size(); ++d) {
        const int l = lattice.spatial_extents()[d];
        SiteCoord nb = c;
        nb.x[d] = ((c.x[d] + step) % l + l) % l;
        op(site, site) += 1.0;
        op(site, lattice.index_of(nb)) -= 1.0;
      }
    }
  }
  return op.fullPivLu().inverse();
}

/// B_xy = C(x, theta y) via coordinates, x and y ranging over t > 0.
inline Eigen::MatrixXd cross_block(const Lattice& lattice, const Eigen::MatrixXd& c) {
  std::vector<Index> plus;
  for (Index s = 0; s < lattice.site_count(); ++s) {
    if (lattice.coord_of(s).t > 0) plus.push_back(s);
  }
  Eigen::MatrixXd b(plus.size(), plus.size());
  for (std::size_t i = 0; i < plus.size(); ++i) {
    for (std::size_t j = 0; j < plus.size(); ++j) {
      SiteCoord mirror = lattice.coord_of(plus[j]);
      mirror.t = -mirror.t;
      b(static_cast<Index>(i), static_cast<Index>(j)) = c(plus[i], lattice.index_of(mirror));
    }
  }
  return b;
}

inline double min_eig(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff();
}

/// Random PSD n x n matrix of random rank.
template <class Engine>
Eigen::MatrixXd random_psd(Engine& engine, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> rank(1, n);
  Eigen::MatrixXd x(n, rank(engine));
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = normal(engine);
  return x * x.transpose();
}

/**
 * Dense coefficient grid for polynomials on the 2-site lattice (site 0 at
 * t = -1, site 1 at t = +1): grid[a][b] is the coefficient of phi0^a phi1^b.
 */
using Grid = std::array<std::array<double, 5>, 5>;

/// Existence search: is there G = g0 + sum_k gk phi1^k with gk in {-1,0,1}
/// (k >= 1) and g0 in {-1/2, 0, 1/2} such that G(phi1) + G(phi0) == grid?
inline bool split_exists(const Grid& grid, std::array<double, 5>* witness = nullptr) {
  const std::array<double, 3> vals{-1.0, 0.0, 1.0};
  std::array<int, 5> idx{};
  for (int code = 0; code < 243; ++code) {
    int rest = code;
    for (int k = 0; k < 5; ++k) {
      idx[static_cast<std::size_t>(k)] = rest % 3;
      rest /= 3;
    }
    std::array<double, 5> g{};
    g[0] = 0.5 * vals[static_cast<std::size_t>(idx[0])];
    for (int k = 1; k < 5; ++k) g[static_cast<std::size_t>(k)] = vals[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
    Grid sum{};
    sum[0][0] = 2.0 * g[0];
    for (int k = 1; k < 5; ++k) {
      sum[0][static_cast<std::size_t>(k)] += g[static_cast<std::size_t>(k)];
      sum[static_cast<std::size_t>(k)][0] += g[static_cast<std::size_t>(k)];
    }
    if (sum == grid) {
      if (witness) *witness = g;
      return true;
    }
  }
  return false;
}

}  // namespace reflpos::oracle
