#include "reflpos/lattice.hpp"

#include <stdexcept>
#include <string>

namespace reflpos {

namespace {

void require_length(const Lattice& lattice, Index len, const char* what) {
  if (len != lattice.site_count()) {
    throw std::invalid_argument(std::string(what) + ": vector length " + std::to_string(len) +
                                " does not match site count " +
                                std::to_string(lattice.site_count()));
  }
}

}  // namespace

Lattice::Lattice(int time_extent, std::vector<int> spatial_extents)
    : time_extent_(time_extent), spatial_extents_(std::move(spatial_extents)) {
  if (time_extent_ < 1) {
    throw std::invalid_argument("time extent must be >= 1, got " + std::to_string(time_extent_));
  }
  for (int l : spatial_extents_) {
    if (l < 1) throw std::invalid_argument("spatial extents must be >= 1, got " + std::to_string(l));
    spatial_volume_ *= l;
  }
  site_count_ = 2 * static_cast<Index>(time_extent_) * spatial_volume_;

  // slice tau = 0..2T-1 holds t = -T..-1,1..T; reflection sends tau -> 2T-1-tau.
  theta_perm_.resize(static_cast<std::size_t>(site_count_));
  const Index slices = 2 * static_cast<Index>(time_extent_);
  for (Index tau = 0; tau < slices; ++tau) {
    for (Index s = 0; s < spatial_volume_; ++s) {
      theta_perm_[static_cast<std::size_t>(tau * spatial_volume_ + s)] =
          (slices - 1 - tau) * spatial_volume_ + s;
    }
  }
}

Index Lattice::site_at(int t, Index spatial) const {
  if (t == 0 || t < -time_extent_ || t > time_extent_) {
    throw std::out_of_range("time coordinate " + std::to_string(t) + " outside lattice");
  }
  const Index tau = t < 0 ? t + time_extent_ : t + time_extent_ - 1;
  return tau * spatial_volume_ + spatial;
}

Index Lattice::index_of(const SiteCoord& c) const {
  if (c.x.size() != spatial_extents_.size()) {
    throw std::invalid_argument("site coordinate has " + std::to_string(c.x.size()) +
                                " spatial components, lattice has " +
                                std::to_string(spatial_extents_.size()));
  }
  Index s = 0;
  for (std::size_t i = 0; i < spatial_extents_.size(); ++i) {
    if (c.x[i] < 0 || c.x[i] >= spatial_extents_[i]) {
      throw std::out_of_range("spatial coordinate " + std::to_string(c.x[i]) + " outside [0, " +
                              std::to_string(spatial_extents_[i]) + ")");
    }
    s = s * spatial_extents_[i] + c.x[i];
  }
  return site_at(c.t, s);
}

SiteCoord Lattice::coord_of(Index site) const {
  if (site < 0 || site >= site_count_) {
    throw std::out_of_range("site index " + std::to_string(site) + " outside lattice");
  }
  SiteCoord c;
  const Index tau = site / spatial_volume_;
  Index s = site % spatial_volume_;
  c.t = tau < time_extent_ ? static_cast<int>(tau) - time_extent_
                           : static_cast<int>(tau) - time_extent_ + 1;
  c.x.resize(spatial_extents_.size());
  for (std::size_t i = spatial_extents_.size(); i-- > 0;) {
    c.x[i] = static_cast<int>(s % spatial_extents_[i]);
    s /= spatial_extents_[i];
  }
  return c;
}

Index Lattice::spatial_shift(Index s, int dir, int step) const {
  Index stride = 1;
  for (std::size_t i = spatial_extents_.size(); i-- > static_cast<std::size_t>(dir) + 1;) {
    stride *= spatial_extents_[i];
  }
  const Index l = spatial_extents_[static_cast<std::size_t>(dir)];
  const Index coord = (s / stride) % l;
  const Index shifted = ((coord + step) % l + l) % l;
  return s + (shifted - coord) * stride;
}

Lattice build_lattice(int time_extent, std::vector<int> spatial_extents) {
  return Lattice(time_extent, std::move(spatial_extents));
}

SiteVector reflect(const Lattice& lattice, const SiteVector& v) {
  require_length(lattice, v.size(), "reflect");
  SiteVector out(v.size());
  for (Index i = 0; i < v.size(); ++i) out[lattice.theta(i)] = v[i];
  return out;
}

HalfVector restrict_plus(const Lattice& lattice, const SiteVector& v) {
  require_length(lattice, v.size(), "restrict_plus");
  return v.tail(lattice.half_count());
}

SiteVector embed_plus(const Lattice& lattice, const HalfVector& h) {
  if (h.size() != lattice.half_count()) {
    throw std::invalid_argument("embed_plus: half vector length " + std::to_string(h.size()) +
                                " does not match " + std::to_string(lattice.half_count()));
  }
  SiteVector v = SiteVector::Zero(lattice.site_count());
  v.tail(lattice.half_count()) = h;
  return v;
}

bool positive_support(const Lattice& lattice, const SiteVector& v) {
  require_length(lattice, v.size(), "positive_support");
  for (Index i = 0; i < lattice.half_count(); ++i) {
    if (v[i] != 0.0) return false;
  }
  return true;
}

}  // namespace reflpos
