#include "permuton/lis.hpp"

#include <bit>
#include <numeric>
#include <string>

#include "permuton/errors.hpp"

namespace permuton {

LisResult lis_fast(const Permutation& sigma, bool with_witness) {
  const auto img = sigma.image();
  if (!with_witness) return {lis_length(img), std::nullopt};
  auto w = lis_witness(img);
  const std::size_t len = w.size();
  return {len, std::move(w)};
}

std::size_t lis_quadratic(const Permutation& sigma) {
  const auto img = sigma.image();
  std::vector<std::size_t> ending(img.size(), 1);
  std::size_t best = 0;
  for (std::size_t i = 0; i < img.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j)
      if (img[j] < img[i]) ending[i] = std::max(ending[i], ending[j] + 1);
    best = std::max(best, ending[i]);
  }
  return best;
}

std::size_t lis_exhaustive(const Permutation& sigma) {
  const std::size_t n = sigma.size();
  if (n > kExhaustiveLimit)
    throw SizeLimitExceeded("lis_exhaustive: N = " + std::to_string(n) + " exceeds " +
                            std::to_string(kExhaustiveLimit));
  const auto img = sigma.image();
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    if (size <= best) continue;
    bool increasing = true;
    std::uint32_t last = 0;
    for (std::size_t i = 0; i < n && increasing; ++i) {
      if (!(mask >> i & 1U)) continue;
      increasing = img[i] > last;
      last = img[i];
    }
    if (increasing) best = size;
  }
  return best;
}

LisResult lis_points(const PointSet& ps, bool with_witness) {
  const auto ranks = coordinate_ranks(ps);
  // Positions of the points in x order, and their y ranks along that order.
  std::vector<std::size_t> by_x(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) by_x[ranks.x[i] - 1] = i;
  std::vector<std::uint32_t> seq(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) seq[i] = ranks.y[by_x[i]];

  const std::span<const std::uint32_t> view(seq);
  if (!with_witness) return {lis_length(view), std::nullopt};
  auto w = lis_witness(view);
  for (auto& pos : w) pos = by_x[pos];
  const std::size_t len = w.size();
  return {len, std::move(w)};
}

}  // namespace permuton
