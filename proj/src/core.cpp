#include "permuton/core.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "permuton/errors.hpp"
#include "permuton/io.hpp"

namespace permuton {

namespace {

void check_in_square(const Point& p) {
  if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0))
    throw ParameterOutOfRange("point (" + io::format_real(p.x) + ", " + io::format_real(p.y) +
                              ") lies outside the unit square");
}

// Indices sorted by one coordinate; throws on ties.
template <typename Key>
std::vector<std::uint32_t> argsort_distinct(std::span<const Point> pts, Key key, const char* axis) {
  std::vector<std::uint32_t> order(pts.size());
  std::iota(order.begin(), order.end(), 0U);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return key(pts[a]) < key(pts[b]); });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (key(pts[order[i - 1]]) == key(pts[order[i]])) {
      throw DuplicateCoordinate(std::string("points ") + std::to_string(order[i - 1]) + " and " +
                                std::to_string(order[i]) + " share a " + axis + "-coordinate");
    }
  }
  return order;
}

}  // namespace

double l1_dist(const Point& p, const Point& q) noexcept {
  return std::abs(p.x - q.x) + std::abs(p.y - q.y);
}

PointSet::PointSet(std::vector<Point> points) : points_(std::move(points)) {
  for (const auto& p : points_) check_in_square(p);
}

PointSet PointSet::with_point(const Point& p) const {
  check_in_square(p);
  PointSet out = *this;
  out.points_.push_back(p);
  return out;
}

PointSet PointSet::with_replaced(std::size_t i, const Point& p) const {
  check_in_square(p);
  PointSet out = *this;
  out.points_.at(i) = p;
  return out;
}

Permutation::Permutation(std::vector<value_type> image) : image_(std::move(image)) {
  std::vector<bool> seen(image_.size() + 1, false);
  for (value_type v : image_) {
    if (v < 1 || v > image_.size() || seen[v])
      throw std::invalid_argument("permutation image is not a bijection of {1..N}");
    seen[v] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<value_type> img(n);
  std::iota(img.begin(), img.end(), 1U);
  return Permutation(std::move(img), Trusted{});
}

Permutation Permutation::reversal(std::size_t n) {
  std::vector<value_type> img(n);
  for (std::size_t i = 0; i < n; ++i) img[i] = static_cast<value_type>(n - i);
  return Permutation(std::move(img), Trusted{});
}

Permutation Permutation::reversed() const {
  std::vector<value_type> img(image_.rbegin(), image_.rend());
  return Permutation(std::move(img), Trusted{});
}

Permutation permutation_from_ranks(std::vector<Permutation::value_type> ranks) {
  return Permutation(std::move(ranks), Permutation::Trusted{});
}

Ranks coordinate_ranks(const PointSet& ps) {
  const auto pts = ps.points();
  const auto by_x = argsort_distinct(pts, [](const Point& p) { return p.x; }, "x");
  const auto by_y = argsort_distinct(pts, [](const Point& p) { return p.y; }, "y");
  Ranks r;
  r.x.resize(pts.size());
  r.y.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    r.x[by_x[i]] = static_cast<std::uint32_t>(i + 1);
    r.y[by_y[i]] = static_cast<std::uint32_t>(i + 1);
  }
  return r;
}

Permutation perm_of_points(const PointSet& ps) {
  const auto pts = ps.points();
  const auto by_x = argsort_distinct(pts, [](const Point& p) { return p.x; }, "x");
  const auto by_y = argsort_distinct(pts, [](const Point& p) { return p.y; }, "y");
  std::vector<std::uint32_t> y_rank(pts.size());
  for (std::size_t i = 0; i < by_y.size(); ++i) y_rank[by_y[i]] = static_cast<std::uint32_t>(i + 1);
  std::vector<Permutation::value_type> image(pts.size());
  for (std::size_t i = 0; i < by_x.size(); ++i) image[i] = y_rank[by_x[i]];
  return permutation_from_ranks(std::move(image));
}

void write_csv(std::ostream& out, const PointSet& ps) {
  out << "x,y\n";
  for (const auto& p : ps.points())
    out << io::format_real(p.x, 17) << ',' << io::format_real(p.y, 17) << '\n';
}

PointSet read_point_csv(std::istream& in) {
  std::string line;
  if (!io::next_line(in, line)) throw std::invalid_argument("point CSV: missing header");
  const auto header = io::parse_csv_row(line);
  if (header.size() != 2 || header[0] != "x" || header[1] != "y")
    throw std::invalid_argument("point CSV: expected header 'x,y'");
  std::vector<Point> pts;
  while (io::next_line(in, line)) {
    const auto f = io::parse_csv_row(line);
    if (f.size() != 2) throw std::invalid_argument("point CSV: expected 2 fields, got '" + line + "'");
    pts.push_back({io::parse_real(f[0]), io::parse_real(f[1])});
  }
  return PointSet(std::move(pts));
}

}  // namespace permuton
