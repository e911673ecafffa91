#include <gtest/gtest.h>

#include <random>
#include <set>

#include "reflpos/lattice.hpp"

namespace reflpos {
namespace {

TEST(Lattice, SmallestLatticeSwapsTwoSites) {
  const Lattice l = build_lattice(1, {});
  EXPECT_EQ(l.site_count(), 2);
  EXPECT_EQ(l.theta(0), 1);
  EXPECT_EQ(l.theta(1), 0);
  EXPECT_EQ(l.coord_of(0).t, -1);
  EXPECT_EQ(l.coord_of(1).t, 1);
}

TEST(Lattice, SiteCounts) {
  EXPECT_EQ(build_lattice(2, {3}).site_count(), 12);
  const Lattice l = build_lattice(2, {4});
  EXPECT_EQ(l.site_count(), 16);
  EXPECT_EQ(l.half_count(), 8);
  EXPECT_EQ(build_lattice(2, {4, 4}).site_count(), 64);
}

TEST(Lattice, RejectsNonPositiveExtents) {
  EXPECT_THROW(build_lattice(0, {}), std::invalid_argument);
  EXPECT_THROW(build_lattice(-1, {2}), std::invalid_argument);
  EXPECT_THROW(build_lattice(2, {3, 0}), std::invalid_argument);
  EXPECT_THROW(build_lattice(2, {-4}), std::invalid_argument);
}

TEST(Lattice, OrderingIsLexicographicInTimeThenSpace) {
  const Lattice l = build_lattice(2, {2, 3});
  Index expected = 0;
  for (int t : {-2, -1, 1, 2}) {
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 3; ++y) {
        const SiteCoord c{t, {x, y}};
        EXPECT_EQ(l.index_of(c), expected);
        EXPECT_EQ(l.coord_of(expected), c);
        ++expected;
      }
    }
  }
  EXPECT_THROW(l.index_of(SiteCoord{0, {0, 0}}), std::out_of_range);
  EXPECT_THROW(l.index_of(SiteCoord{3, {0, 0}}), std::out_of_range);
  EXPECT_THROW(l.index_of(SiteCoord{1, {2, 0}}), std::out_of_range);
  EXPECT_THROW(l.index_of(SiteCoord{1, {0}}), std::invalid_argument);
}

TEST(Lattice, ThetaIsFixedPointFreeInvolutionSwappingHalves) {
  for (const auto& l : {build_lattice(1, {}), build_lattice(3, {2}), build_lattice(2, {3, 2})}) {
    std::set<Index> image;
    for (Index s = 0; s < l.site_count(); ++s) {
      EXPECT_EQ(l.theta(l.theta(s)), s);
      EXPECT_NE(l.theta(s), s);
      EXPECT_NE(l.is_plus(s), l.is_plus(l.theta(s)));
      SiteCoord c = l.coord_of(s);
      c.t = -c.t;
      EXPECT_EQ(l.index_of(c), l.theta(s));
      if (l.is_plus(s)) image.insert(l.theta(s));
    }
    EXPECT_EQ(static_cast<Index>(image.size()), l.half_count());
  }
}

TEST(Reflect, SwapsTwoSitesAndIsExactInvolution) {
  const Lattice two = build_lattice(1, {});
  SiteVector v(2);
  v << 0.25, -3.5;
  const SiteVector r = reflect(two, v);
  EXPECT_EQ(r[0], -3.5);
  EXPECT_EQ(r[1], 0.25);
  EXPECT_TRUE(reflect(two, SiteVector::Zero(2)).isZero(0.0));

  const Lattice l = build_lattice(3, {4});
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    SiteVector w(l.site_count());
    for (Index i = 0; i < w.size(); ++i) w[i] = normal(rng);
    EXPECT_EQ(reflect(l, reflect(l, w)), w);
  }
}

TEST(Reflect, LengthMismatchThrows) {
  const Lattice l = build_lattice(2, {3});
  EXPECT_THROW(reflect(l, SiteVector::Zero(5)), std::invalid_argument);
  EXPECT_THROW(restrict_plus(l, SiteVector::Zero(11)), std::invalid_argument);
  EXPECT_THROW(positive_support(l, SiteVector::Zero(13)), std::invalid_argument);
  EXPECT_THROW(embed_plus(l, HalfVector::Zero(5)), std::invalid_argument);
}

TEST(RestrictPlus, PicksPositiveTimeEntries) {
  const Lattice two = build_lattice(1, {});
  SiteVector v(2);
  v << 4.0, 9.0;
  const HalfVector h = restrict_plus(two, v);
  ASSERT_EQ(h.size(), 1);
  EXPECT_EQ(h[0], 9.0);
}

TEST(RestrictPlus, ReflectedVectorExposesNegativeHalf) {
  const Lattice l = build_lattice(2, {3});
  SiteVector v(l.site_count());
  for (Index i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i) + 0.5;
  const HalfVector h = restrict_plus(l, reflect(l, v));
  for (Index p = 0; p < l.half_count(); ++p) {
    EXPECT_EQ(h[p], v[l.theta(l.plus_site(p))]);
  }
}

TEST(RestrictPlus, InvertsZeroExtension) {
  const Lattice l = build_lattice(2, {4});
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    HalfVector h(l.half_count());
    for (Index i = 0; i < h.size(); ++i) h[i] = normal(rng);
    const SiteVector v = embed_plus(l, h);
    EXPECT_EQ(restrict_plus(l, v), h);
    EXPECT_TRUE(positive_support(l, v));
    if (!h.isZero(0.0)) EXPECT_FALSE(positive_support(l, reflect(l, v)));
  }
}

TEST(PositiveSupport, ExactZeroContract) {
  const Lattice two = build_lattice(1, {});
  EXPECT_TRUE(positive_support(two, SiteVector{{0.0, 1.0}}));
  EXPECT_FALSE(positive_support(two, SiteVector{{1e-300, 1.0}}));
  EXPECT_TRUE(positive_support(two, SiteVector::Zero(2)));
}

}  // namespace
}  // namespace reflpos
