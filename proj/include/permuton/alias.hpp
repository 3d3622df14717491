#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "permuton/rng.hpp"

namespace permuton {

// Walker/Vose alias table: O(n) build, O(1) draws from a finite discrete law.
class AliasTable {
 public:
  AliasTable() = default;
  // Weights need not be normalized; all must be finite and >= 0 with a
  // positive sum.
  explicit AliasTable(std::span<const double> weights);

  std::size_t size() const noexcept { return prob_.size(); }
  std::size_t sample(RngStream& rng) const {
    const auto i = static_cast<std::size_t>(rng.below(prob_.size()));
    return rng.uniform() < prob_[i] ? i : alias_[i];
  }
  // Probability of outcome i implied by the table (for checks).
  double probability(std::size_t i) const;

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

}  // namespace permuton
