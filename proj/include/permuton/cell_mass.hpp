#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "permuton/densities.hpp"

namespace permuton {

// Probability of each cell of the m×m grid with cells
// [(i-1)/m, i/m] × [(j-1)/m, j/m], stored row-major at (i-1)·m + (j-1),
// i indexing x. Computed by quadrature in corner coordinates
// t = (1-x)+(1-y), s = x-y (the inner s-integral in closed form), or by exact
// box overlap for RefPermuton, and normalized by the grid total. It shares no
// code with the samplers.
struct CellMasses {
  std::size_t m = 0;
  std::vector<double> mass;
  // Integral of the unnormalized profile over the square (1/c_f for the
  // continuous families; 1 for Uniform and RefPermuton).
  double raw_total = 0.0;
};

CellMasses cell_masses(const DensityFamily& f, std::size_t m);

// Cell counts of points on the same m×m grid (1-based cell ceil(x m), clamped).
std::vector<std::uint64_t> cell_counts(std::span<const Point> points, std::size_t m);

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 0.0;
  // Observations in cells whose probability is exactly zero.
  std::uint64_t impossible = 0;
};

// Pearson goodness of fit. Cells with expected count below 5 are pooled into
// one bin; cells of zero probability are excluded and any observation there
// is reported in `impossible` (p_value is then 0).
ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> probabilities);

}  // namespace permuton
