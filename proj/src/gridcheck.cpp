#include "permuton/gridcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "permuton/errors.hpp"
#include "permuton/lis.hpp"

namespace permuton {

std::uint64_t grid_side(std::uint64_t n, double alpha) {
  if (!(alpha > -1.0 && alpha < 0.0)) throw ParameterOutOfRange("grid_side: alpha must lie in (-1,0)");
  if (n < 1) throw ParameterOutOfRange("grid_side: N must be >= 1");
  const long double e = 1.0L / (static_cast<long double>(alpha) + 2.0L);
  const long double nn = static_cast<long double>(n);
  auto b = static_cast<std::uint64_t>(std::floor(std::pow(nn, e)));
  // pow may land a hair below an exact integer root; correct by testing
  // b^{alpha+2} <= N directly.
  const long double p = static_cast<long double>(alpha) + 2.0L;
  while (std::pow(static_cast<long double>(b + 1), p) <= nn * (1.0L + 1e-15L)) ++b;
  while (b > 1 && std::pow(static_cast<long double>(b), p) > nn * (1.0L + 1e-15L)) --b;
  return std::max<std::uint64_t>(b, 1);
}

GridCounts::GridCounts(std::uint64_t b, std::vector<Cell> cells) : b_(b), cells_(std::move(cells)) {
  if (b_ < 1) throw ParameterOutOfRange("grid side must be >= 1");
  std::sort(cells_.begin(), cells_.end(),
            [](const Cell& a, const Cell& c) { return a.i < c.i || (a.i == c.i && a.j < c.j); });
  std::vector<Cell> merged;
  for (const Cell& c : cells_) {
    if (c.i < 1 || c.i > b_ || c.j < 1 || c.j > b_) throw ParameterOutOfRange("grid cell index out of range");
    if (c.count == 0) continue;
    if (!merged.empty() && merged.back().i == c.i && merged.back().j == c.j)
      merged.back().count += c.count;
    else
      merged.push_back(c);
    total_ += c.count;
  }
  cells_ = std::move(merged);
}

std::uint64_t GridCounts::at(std::uint64_t i, std::uint64_t j) const {
  auto it = std::lower_bound(cells_.begin(), cells_.end(), Cell{i, j, 0},
                             [](const Cell& a, const Cell& c) { return a.i < c.i || (a.i == c.i && a.j < c.j); });
  return it != cells_.end() && it->i == i && it->j == j ? it->count : 0;
}

std::vector<std::vector<std::uint64_t>> GridCounts::dense() const {
  std::vector<std::vector<std::uint64_t>> m(b_, std::vector<std::uint64_t>(b_, 0));
  for (const Cell& c : cells_) m[c.i - 1][c.j - 1] = c.count;
  return m;
}

std::uint64_t grid_box_index(double coordinate, std::uint64_t b) {
  const double scaled = std::ceil(coordinate * static_cast<double>(b));
  if (!(scaled >= 1.0)) return 1;
  if (scaled >= static_cast<double>(b)) return b;
  return static_cast<std::uint64_t>(scaled);
}

GridCounts bin_points(const PointSet& ps, std::uint64_t b) {
  if (b < 1) throw ParameterOutOfRange("bin_points: b must be >= 1");
  std::vector<GridCounts::Cell> cells;
  cells.reserve(ps.size());
  for (const Point& p : ps.points()) cells.push_back({grid_box_index(p.x, b), grid_box_index(p.y, b), 1});
  return GridCounts(b, std::move(cells));
}

std::uint64_t diag_lower_bound(const GridCounts& g) {
  std::uint64_t occupied = 0;
  for (const auto& c : g.cells())
    if (c.i == c.j) ++occupied;
  return occupied;
}

PathBound path_upper_bound(const GridCounts& g) {
  const auto& cells = g.cells();
  if (cells.empty()) return {};
  // Columns compressed to the occupied set; Fenwick tree of prefix maxima
  // over columns, filled in (i, j) order.
  std::vector<std::uint64_t> cols;
  cols.reserve(cells.size());
  for (const auto& c : cells) cols.push_back(c.j);
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());

  struct Best {
    std::uint64_t value = 0;
    std::size_t cell = SIZE_MAX;
  };
  std::vector<Best> tree(cols.size() + 1);
  std::vector<std::uint64_t> best(cells.size());
  std::vector<std::size_t> prev(cells.size(), SIZE_MAX);
  Best overall;
  for (std::size_t idx = 0; idx < cells.size(); ++idx) {
    const auto pos = static_cast<std::size_t>(std::lower_bound(cols.begin(), cols.end(), cells[idx].j) - cols.begin()) + 1;
    Best q;
    for (std::size_t k = pos; k > 0; k -= k & (~k + 1))
      if (tree[k].value > q.value) q = tree[k];
    best[idx] = q.value + cells[idx].count;
    prev[idx] = q.cell;
    const Best here{best[idx], idx};
    for (std::size_t k = pos; k < tree.size(); k += k & (~k + 1))
      if (here.value > tree[k].value) tree[k] = here;
    if (here.value > overall.value) overall = here;
  }
  PathBound out;
  out.total = overall.value;
  for (std::size_t cur = overall.cell; cur != SIZE_MAX; cur = prev[cur]) out.chain.push_back(cells[cur]);
  std::reverse(out.chain.begin(), out.chain.end());
  return out;
}

std::uint64_t monotone_path_max(const std::vector<std::vector<std::uint64_t>>& w) {
  if (w.empty()) return 0;
  const std::size_t b = w.size();
  std::vector<std::vector<std::uint64_t>> m(b, std::vector<std::uint64_t>(b, 0));
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      const std::uint64_t from_left = i > 0 ? m[i - 1][j] : 0;
      const std::uint64_t from_below = j > 0 ? m[i][j - 1] : 0;
      m[i][j] = w[i][j] + std::max(from_left, from_below);
    }
  }
  return m[b - 1][b - 1];
}

SandwichReport sandwich_check_with_side(const PointSet& ps, std::uint64_t b) {
  const GridCounts g = bin_points(ps, b);
  const PathBound path = path_upper_bound(g);
  SandwichReport r;
  r.n = ps.size();
  r.b = b;
  r.lower = diag_lower_bound(g);
  r.lis = lis_points(ps).length;
  r.upper = path.total;
  r.chain_cap = path.chain.size();
  auto fail = [&](const std::string& what) {
    throw InvariantViolation("sandwich violated (" + what + "): lower=" + std::to_string(r.lower) +
                             " lis=" + std::to_string(r.lis) + " upper=" + std::to_string(r.upper) +
                             " chain=" + std::to_string(r.chain_cap) + " b=" + std::to_string(b));
  };
  if (r.lower > r.lis) fail("lower > lis");
  if (r.lis > r.upper) fail("lis > upper");
  if (r.chain_cap >= 2 * b) fail("chain >= 2b");
  return r;
}

SandwichReport sandwich_check(const PointSet& ps, double alpha) {
  const std::uint64_t b = grid_side(std::max<std::uint64_t>(ps.size(), 1), alpha);
  SandwichReport r = sandwich_check_with_side(ps, b);
  r.alpha = alpha;
  return r;
}

double path_bound_envelope(std::uint64_t n, std::uint64_t b, double m_prime) {
  const double l = std::log(static_cast<double>(n));
  return 2.0 * static_cast<double>(b) * (m_prime + l * l * std::sqrt(m_prime));
}

}  // namespace permuton
