#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "permuton/core.hpp"
#include "permuton/errors.hpp"
#include "permuton/rng.hpp"
#include "permuton/samplers.hpp"

using namespace permuton;

namespace {

// Independent rank oracle: O(N^2) counting of smaller coordinates.
std::vector<Permutation::value_type> perm_by_counting(const std::vector<Point>& pts) {
  const std::size_t n = pts.size();
  std::vector<Permutation::value_type> img(n);
  for (std::size_t a = 0; a < n; ++a) {
    std::size_t xrank = 1, yrank = 1;
    for (std::size_t b = 0; b < n; ++b) {
      if (pts[b].x < pts[a].x) ++xrank;
      if (pts[b].y < pts[a].y) ++yrank;
    }
    img[xrank - 1] = static_cast<Permutation::value_type>(yrank);
  }
  return img;
}

}  // namespace

TEST(IncreasingPair, StrictInBothCoordinates) {
  EXPECT_TRUE(increasing_pair({0.1, 0.2}, {0.3, 0.4}));
  EXPECT_FALSE(increasing_pair({0.1, 0.2}, {0.1, 0.4}));
  EXPECT_FALSE(increasing_pair({0.5, 0.9}, {0.6, 0.1}));
}

TEST(L1Dist, Examples) {
  EXPECT_DOUBLE_EQ(l1_dist({1, 1}, {1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(l1_dist({0, 0}, {1, 1}), 2.0);
  EXPECT_DOUBLE_EQ(l1_dist({0.25, 0.5}, {0.5, 0.25}), 0.5);
}

TEST(PointSet, RejectsOutOfRange) {
  EXPECT_THROW(PointSet({{0.5, 1.5}}), ParameterOutOfRange);
  EXPECT_THROW(PointSet({{-0.1, 0.5}}), ParameterOutOfRange);
  EXPECT_THROW(PointSet({{std::nan(""), 0.5}}), ParameterOutOfRange);
  EXPECT_NO_THROW(PointSet({{0.0, 1.0}}));
}

TEST(PointSet, WithPointAndReplace) {
  const PointSet ps({{0.1, 0.1}});
  EXPECT_EQ(ps.with_point({0.2, 0.2}).size(), 2u);
  EXPECT_EQ(ps.with_replaced(0, {0.3, 0.4})[0], (Point{0.3, 0.4}));
  EXPECT_THROW(ps.with_point({2.0, 0.0}), ParameterOutOfRange);
}

TEST(Permutation, RejectsNonBijection) {
  EXPECT_THROW(Permutation({1, 1, 2}), std::invalid_argument);
  EXPECT_THROW(Permutation({0, 1}), std::invalid_argument);
  EXPECT_THROW(Permutation({1, 3}), std::invalid_argument);
  EXPECT_NO_THROW(Permutation({2, 3, 1}));
}

TEST(Permutation, IdentityReversal) {
  EXPECT_EQ(Permutation::identity(3), Permutation({1, 2, 3}));
  EXPECT_EQ(Permutation::reversal(3), Permutation({3, 2, 1}));
  EXPECT_EQ(Permutation({2, 3, 1}).reversed(), Permutation({1, 3, 2}));
}

TEST(PermOfPoints, HandExample) {
  const PointSet ps({{0.1, 0.3}, {0.2, 0.1}, {0.3, 0.4}});
  EXPECT_EQ(perm_of_points(ps), Permutation({2, 1, 3}));
}

TEST(PermOfPoints, InputOrderIrrelevant) {
  const PointSet ps({{0.3, 0.4}, {0.1, 0.3}, {0.2, 0.1}});
  EXPECT_EQ(perm_of_points(ps), Permutation({2, 1, 3}));
}

TEST(PermOfPoints, LeftmostPointSecondFromBottom) {
  const PointSet ps({{0.05, 0.4}, {0.3, 0.1}, {0.6, 0.8}, {0.9, 0.6}});
  EXPECT_EQ(perm_of_points(ps)[0], 2u);
}

TEST(PermOfPoints, DiagonalAndAntidiagonal) {
  std::vector<Point> diag, anti;
  for (int i = 1; i <= 50; ++i) {
    diag.push_back({i / 51.0, i / 51.0});
    anti.push_back({i / 51.0, 1.0 - i / 51.0});
  }
  EXPECT_EQ(perm_of_points(PointSet(diag)), Permutation::identity(50));
  EXPECT_EQ(perm_of_points(PointSet(anti)), Permutation::reversal(50));
}

TEST(PermOfPoints, DuplicateCoordinateThrows) {
  EXPECT_THROW(perm_of_points(PointSet({{0.1, 0.2}, {0.1, 0.4}})), DuplicateCoordinate);
  EXPECT_THROW(perm_of_points(PointSet({{0.1, 0.2}, {0.3, 0.2}})), DuplicateCoordinate);
}

TEST(PermOfPoints, EmptySet) { EXPECT_EQ(perm_of_points(PointSet()).size(), 0u); }

TEST(PermOfPoints, MatchesCountingOracle) {
  RngStream rng(7, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(40);
    std::vector<Point> pts(n);
    for (auto& p : pts) p = {rng.uniform(), rng.uniform()};
    EXPECT_EQ(perm_of_points(PointSet(pts)).image().size(), n);
    const auto img = perm_by_counting(pts);
    EXPECT_TRUE(std::equal(img.begin(), img.end(), perm_of_points(PointSet(pts)).image().begin()));
  }
}

TEST(PermOfPoints, InvariantUnderIncreasingReparameterization) {
  RngStream rng(8, 0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Point> pts(30), warped_x(30), warped_y(30);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      pts[i] = {rng.uniform(), rng.uniform()};
      warped_x[i] = {pts[i].x * pts[i].x, pts[i].y};
      warped_y[i] = {pts[i].x, std::sqrt(pts[i].y)};
    }
    const Permutation sigma = perm_of_points(PointSet(pts));
    EXPECT_EQ(perm_of_points(PointSet(warped_x)), sigma);
    EXPECT_EQ(perm_of_points(PointSet(warped_y)), sigma);
  }
}

TEST(PermOfPoints, IncreasingPairMatchesRanks) {
  RngStream rng(9, 0);
  std::vector<Point> pts(40);
  for (auto& p : pts) p = {rng.uniform(), rng.uniform()};
  const PointSet ps(pts);
  const Ranks r = coordinate_ranks(ps);
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = 0; b < pts.size(); ++b)
      EXPECT_EQ(increasing_pair(pts[a], pts[b]), r.x[a] < r.x[b] && r.y[a] < r.y[b]);
}

TEST(PointCsv, RoundTripsExactly) {
  RngStream rng(10, 0);
  std::vector<Point> pts(100);
  for (auto& p : pts) p = {rng.uniform(), rng.uniform()};
  pts.push_back({0.0, 1.0});
  const PointSet ps(pts);
  std::stringstream ss;
  write_csv(ss, ps);
  EXPECT_EQ(ss.str().substr(0, 4), "x,y\n");
  EXPECT_EQ(read_point_csv(ss), ps);
}

TEST(PointCsv, RejectsMalformed) {
  std::stringstream bad_header("a,b\n0.1,0.2\n");
  EXPECT_ANY_THROW(read_point_csv(bad_header));
  std::stringstream bad_value("x,y\n0.1,zz\n");
  EXPECT_ANY_THROW(read_point_csv(bad_value));
}
