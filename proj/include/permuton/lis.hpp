#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "permuton/core.hpp"

namespace permuton {

struct LisResult {
  std::size_t length = 0;
  // 0-based positions i_1 < … < i_k with strictly increasing values.
  std::optional<std::vector<std::size_t>> witness;
};

// Patience sorting: length of the longest strictly increasing subsequence of
// `seq` under operator<. Keeps only the pile tops.
template <typename T>
std::size_t lis_length(std::span<const T> seq) {
  std::vector<T> tops;
  tops.reserve(64);
  for (const T& v : seq) {
    auto it = std::lower_bound(tops.begin(), tops.end(), v);
    if (it == tops.end())
      tops.push_back(v);
    else
      *it = v;
  }
  return tops.size();
}

// Patience sorting with predecessor links; returns one maximal witness.
template <typename T>
std::vector<std::size_t> lis_witness(std::span<const T> seq) {
  std::vector<std::size_t> top_index;  // position in seq of each pile's top
  std::vector<std::size_t> prev(seq.size(), SIZE_MAX);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    auto it = std::lower_bound(top_index.begin(), top_index.end(), i,
                               [&](std::size_t a, std::size_t) { return seq[a] < seq[i]; });
    if (it != top_index.begin()) prev[i] = *(it - 1);
    if (it == top_index.end())
      top_index.push_back(i);
    else
      *it = i;
  }
  std::vector<std::size_t> out(top_index.size());
  std::size_t cur = top_index.empty() ? SIZE_MAX : top_index.back();
  for (std::size_t k = out.size(); k-- > 0;) {
    out[k] = cur;
    cur = prev[cur];
  }
  return out;
}

LisResult lis_fast(const Permutation& sigma, bool with_witness = false);

// O(N²) dynamic program over "longest increasing subsequence ending at i".
std::size_t lis_quadratic(const Permutation& sigma);

// Checks all 2^N subsequences. Throws SizeLimitExceeded for N > 20.
std::size_t lis_exhaustive(const Permutation& sigma);
inline constexpr std::size_t kExhaustiveLimit = 20;

// Longest up-right chain of points; equals lis_fast(perm_of_points(ps)).
// Witness entries are point-set positions listed along the chain (increasing x).
LisResult lis_points(const PointSet& ps, bool with_witness = false);

}  // namespace permuton
