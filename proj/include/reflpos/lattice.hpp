#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace reflpos {

using Index = Eigen::Index;

/// A real value per lattice site: either test-function weights or a field sample.
using SiteVector = Eigen::VectorXd;
/// A real value per positive-time site, in Lattice::plus_sites() order.
using HalfVector = Eigen::VectorXd;

struct SiteCoord {
  int t = 1;           ///< one of -T..-1, 1..T
  std::vector<int> x;  ///< spatial coordinates, each in [0, L_i)

  friend bool operator==(const SiteCoord&, const SiteCoord&) = default;
};

/**
 * Finite time-symmetric lattice {-T..-1, 1..T} x (Z_L1 x ... x Z_Ld).
 *
 * Sites are numbered lexicographically in (t, x) with t running -T..-1, 1..T
 * and the spatial coordinates in row-major order. Time zero is absent, so the
 * reflection t -> -t has no fixed sites and the positive-time half is the
 * contiguous block [N/2, N).
 */
class Lattice {
 public:
  Lattice(int time_extent, std::vector<int> spatial_extents);

  int time_extent() const { return time_extent_; }
  const std::vector<int>& spatial_extents() const { return spatial_extents_; }
  int spatial_dimension() const { return static_cast<int>(spatial_extents_.size()); }

  Index site_count() const { return site_count_; }
  Index half_count() const { return site_count_ / 2; }
  Index spatial_volume() const { return spatial_volume_; }

  Index index_of(const SiteCoord& c) const;
  SiteCoord coord_of(Index site) const;

  /// Image of a site under t -> -t.
  Index theta(Index site) const { return theta_perm_[static_cast<std::size_t>(site)]; }
  const std::vector<Index>& theta_perm() const { return theta_perm_; }

  bool is_plus(Index site) const { return site >= half_count(); }
  /// Position of a positive-time site within HalfVector; -1 for negative-time sites.
  Index plus_position(Index site) const { return is_plus(site) ? site - half_count() : -1; }
  /// Site index of HalfVector slot `pos`.
  Index plus_site(Index pos) const { return pos + half_count(); }

  /// Site index for time slice (-T..-1, 1..T) and flat spatial index.
  Index site_at(int t, Index spatial) const;
  /// Neighbour of spatial index `s` along direction `dir`, shifted by +-1 with periodic wrap.
  Index spatial_shift(Index s, int dir, int step) const;

  friend bool operator==(const Lattice& a, const Lattice& b) {
    return a.time_extent_ == b.time_extent_ && a.spatial_extents_ == b.spatial_extents_;
  }

 private:
  int time_extent_;
  std::vector<int> spatial_extents_;
  Index spatial_volume_ = 1;
  Index site_count_ = 0;
  std::vector<Index> theta_perm_;
};

Lattice build_lattice(int time_extent, std::vector<int> spatial_extents);

SiteVector reflect(const Lattice& lattice, const SiteVector& v);
HalfVector restrict_plus(const Lattice& lattice, const SiteVector& v);
/// Zero extension of a half vector to the full lattice.
SiteVector embed_plus(const Lattice& lattice, const HalfVector& h);
/// True iff every negative-time entry is exactly zero.
bool positive_support(const Lattice& lattice, const SiteVector& v);

}  // namespace reflpos
