#pragma once

#include <cstdint>
#include <vector>

#include "permuton/core.hpp"

namespace permuton {

// floor(N^{1/(alpha+2)}), at least 1. Throws ParameterOutOfRange unless
// -1 < alpha < 0 and N >= 1.
std::uint64_t grid_side(std::uint64_t n, double alpha);

// Occupancy of the b×b grid C_{i,j}, stored sparsely (only occupied boxes).
// Box indices are 1-based; a point goes to (ceil(x b), ceil(y b)) clamped to
// [1, b], so boxes are closed on their top/right edges.
class GridCounts {
 public:
  struct Cell {
    std::uint64_t i = 0;
    std::uint64_t j = 0;
    std::uint64_t count = 0;
  };

  GridCounts(std::uint64_t b, std::vector<Cell> cells);

  std::uint64_t side() const noexcept { return b_; }
  std::uint64_t total() const noexcept { return total_; }
  // Occupied cells sorted by (i, j).
  const std::vector<Cell>& cells() const noexcept { return cells_; }
  std::uint64_t at(std::uint64_t i, std::uint64_t j) const;
  // Dense b×b copy, row index i-1, column j-1. Only sensible for small b.
  std::vector<std::vector<std::uint64_t>> dense() const;

 private:
  std::uint64_t b_;
  std::uint64_t total_ = 0;
  std::vector<Cell> cells_;
};

std::uint64_t grid_box_index(double coordinate, std::uint64_t b);
GridCounts bin_points(const PointSet& ps, std::uint64_t b);

// Number of occupied diagonal boxes C_{k,k}.
std::uint64_t diag_lower_bound(const GridCounts& g);

struct PathBound {
  std::uint64_t total = 0;  // maximum occupancy over increasing box sequences
  // Occupied boxes of one maximizing sequence, in increasing order.
  std::vector<GridCounts::Cell> chain;
};

// Maximum over increasing sequences of boxes (i and j non-decreasing) of the
// number of points they contain. O(K log b) over the K occupied boxes.
PathBound path_upper_bound(const GridCounts& g);

// Same quantity by the dense dynamic program
// M[i][j] = w[i][j] + max(M[i-1][j], M[i][j-1]).
std::uint64_t monotone_path_max(const std::vector<std::vector<std::uint64_t>>& weights);

struct SandwichReport {
  std::uint64_t n = 0;
  double alpha = 0.0;
  std::uint64_t b = 0;
  std::uint64_t lower = 0;
  std::uint64_t lis = 0;
  std::uint64_t upper = 0;
  std::uint64_t chain_cap = 0;  // boxes in the realizing chain; always < 2b
};

// lower <= LIS <= upper and chain_cap < 2b, or InvariantViolation.
SandwichReport sandwich_check(const PointSet& ps, double alpha);
SandwichReport sandwich_check_with_side(const PointSet& ps, std::uint64_t b);

// 2b (M' + log(N)^2 sqrt(M')): the high-probability envelope for the upper
// bound, M' being a bound on N times the largest box mass.
double path_bound_envelope(std::uint64_t n, std::uint64_t b, double m_prime);

}  // namespace permuton
