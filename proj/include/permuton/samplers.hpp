#pragma once

#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "permuton/alias.hpp"
#include "permuton/core.hpp"
#include "permuton/densities.hpp"
#include "permuton/rng.hpp"

namespace permuton {

namespace detail {

struct UniformScheme {};

// Box index from the truncated law (u_k): alias over the tabulated head and
// the dyadic blocks, then exact rejection inside a block.
struct RefScheme {
  std::shared_ptr<const RefWeights> weights;
  AliasTable index_table;
  double one_minus_beta = 0.0;
  double block_span = 0.0;  // 1 - 2^{1-beta}
};

// |x-y| from its marginal by inversion, then a uniform position along the
// feasible diagonal segment.
struct DiagonalScheme {
  double alpha = -0.5;
};

// Corner coordinates t = (1-x)+(1-y), s = x-y: t from its marginal, s uniform
// on [-m(t), m(t)].
struct RadialScheme {
  double alpha = -1.0;
  double inner_prob = 0.0;  // P(t <= 1)
  double outer_mass = 0.0;  // int_1^2 (2-t) t^alpha dt
};

// t from the bounded, non-increasing marginal 1-exp(-c m(t) t^p) by rejection
// under a step envelope; |s| | t is a truncated exponential.
struct PinchedScheme {
  double beta = 1.5;
  double c = 1.0;
  double p = -3.0;
  double bin_width = 0.0;
  std::vector<double> heights;
  AliasTable bins;
};

}  // namespace detail

// Exact i.i.d. sampler for one density family. Tables are built once; the
// object is immutable afterwards and may be shared across threads, each
// thread using its own RngStream.
class Sampler {
 public:
  explicit Sampler(const DensityFamily& f);

  const DensityFamily& family() const noexcept { return family_; }

  Point sample_point(RngStream& rng) const;
  // N i.i.d. points; points sharing an x- or y-coordinate are re-drawn.
  PointSet sample_set(std::size_t n, RngStream& rng) const;
  // Permutation law of Sample_N. For RefPermuton this uses exact
  // (box, in-box position) keys rather than double coordinates.
  Permutation sample_permutation(std::size_t n, RngStream& rng) const;
  // LIS of Sample_N without materializing the permutation.
  std::size_t sample_lis(std::size_t n, RngStream& rng) const;

  // RefPermuton only: box index of one draw (1-based).
  RefWeights::Index sample_ref_box(RngStream& rng) const;

 private:
  DensityFamily family_;
  std::variant<detail::UniformScheme, detail::RefScheme, detail::DiagonalScheme, detail::RadialScheme,
               detail::PinchedScheme>
      scheme_;
};

Point sample_point(const Sampler& s, RngStream& rng);
PointSet sample_set(const Sampler& s, std::size_t n, RngStream& rng);
PointSet sample_set(const DensityFamily& f, std::size_t n, RngStream& rng);

// f = eps·g + (1-eps)·h.
class MixtureSpec {
 public:
  // Throws ParameterOutOfRange unless 0 < eps < 1.
  MixtureSpec(double eps, DensityFamily g, DensityFamily h);
  double eps() const noexcept { return eps_; }
  const DensityFamily& g() const noexcept { return g_; }
  const DensityFamily& h() const noexcept { return h_; }

 private:
  double eps_;
  DensityFamily g_;
  DensityFamily h_;
};

struct MixtureSample {
  PointSet points;
  // from_g[i] == 1 when point i was drawn from g (B_i = 1).
  std::vector<std::uint8_t> from_g;

  PointSet g_part() const;
  PointSet h_part() const;
};

// X_i = Y_i B_i + Z_i (1 - B_i) with B_i ~ Bernoulli(eps).
class MixtureSampler {
 public:
  explicit MixtureSampler(MixtureSpec spec);
  const MixtureSpec& spec() const noexcept { return spec_; }
  MixtureSample sample(std::size_t n, RngStream& rng) const;

 private:
  MixtureSpec spec_;
  Sampler g_;
  Sampler h_;
};

MixtureSample sample_mixture(const MixtureSpec& m, std::size_t n, RngStream& rng);

}  // namespace permuton
