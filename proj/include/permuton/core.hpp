#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace permuton {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

// p ≺ q: both coordinates strictly increase.
constexpr bool increasing_pair(const Point& p, const Point& q) noexcept {
  return p.x < q.x && p.y < q.y;
}

double l1_dist(const Point& p, const Point& q) noexcept;

// Points of the unit square. Coordinates are range-checked on construction;
// distinctness is checked where it matters (perm_of_points).
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::vector<Point> points);

  std::span<const Point> points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const Point& operator[](std::size_t i) const { return points_[i]; }

  // Returns a copy with `p` appended (range-checked).
  PointSet with_point(const Point& p) const;
  PointSet with_replaced(std::size_t i, const Point& p) const;

  friend bool operator==(const PointSet&, const PointSet&) = default;

 private:
  std::vector<Point> points_;
};

// One-line notation σ(1)…σ(N), stored 1-based. Always a bijection of {1..N}.
class Permutation {
 public:
  using value_type = std::uint32_t;

  Permutation() = default;
  // Throws std::invalid_argument unless `image` is a bijection of {1..N}.
  explicit Permutation(std::vector<value_type> image);

  static Permutation identity(std::size_t n);
  static Permutation reversal(std::size_t n);

  std::span<const value_type> image() const noexcept { return image_; }
  std::size_t size() const noexcept { return image_.size(); }
  value_type operator[](std::size_t i) const { return image_[i]; }

  Permutation reversed() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  struct Trusted {};
  Permutation(std::vector<value_type> image, Trusted) : image_(std::move(image)) {}
  friend Permutation permutation_from_ranks(std::vector<value_type>);

  std::vector<value_type> image_;
};

// Builds a permutation from a rank vector already known to be a bijection.
Permutation permutation_from_ranks(std::vector<Permutation::value_type> ranks);

// σ(i) = j when the point with i-th lowest x has j-th lowest y.
// Throws DuplicateCoordinate on any shared x or y.
Permutation perm_of_points(const PointSet& ps);

// x-rank and y-rank (1-based) of every point, in input order.
struct Ranks {
  std::vector<std::uint32_t> x;
  std::vector<std::uint32_t> y;
};
Ranks coordinate_ranks(const PointSet& ps);

// CSV with header `x,y` and 17 significant digits per coordinate.
void write_csv(std::ostream& out, const PointSet& ps);
PointSet read_point_csv(std::istream& in);

}  // namespace permuton
