#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "permuton/core.hpp"

namespace permuton {

// Default discarded-mass bound for the reference permuton truncation.
inline constexpr double kDefaultTailTol = 1e-12;

namespace family {

struct Uniform {
  friend bool operator==(const Uniform&, const Uniform&) = default;
};

// Boxes C_k = [S_{k-1}, S_k]² of mass u_k ∝ k^{-beta} log(k+1)^gamma.
struct RefPermuton {
  double beta = 2.0;
  double gamma = 0.0;
  double tail_tol = kDefaultTailTol;
  friend bool operator==(const RefPermuton&, const RefPermuton&) = default;
};

// c · d^alpha, d the L1 distance to (1,1).
struct CornerRadial {
  double alpha = -1.0;
  friend bool operator==(const CornerRadial&, const CornerRadial&) = default;
};

// c_f · d^{beta/(1-beta)} · exp(-c |x-y| d^{beta/(1-beta)}).
struct CornerPinched {
  double beta = 1.5;
  double c = 1.0;
  friend bool operator==(const CornerPinched&, const CornerPinched&) = default;
};

// c_f · |x-y|^alpha.
struct DiagonalPower {
  double alpha = -0.5;
  friend bool operator==(const DiagonalPower&, const DiagonalPower&) = default;
};

}  // namespace family

enum class FamilyTag { Uniform, RefPermuton, CornerRadial, CornerPinched, DiagonalPower };

// A validated, parameterized density family. Textual form:
//   uniform | ref:beta=B[,gamma=G][,tol=T] | corner-radial:alpha=A
//   | corner-pinched:beta=B,c=C | diag-power:alpha=A
class DensityFamily {
 public:
  using Params = std::variant<family::Uniform, family::RefPermuton, family::CornerRadial,
                              family::CornerPinched, family::DiagonalPower>;

  // Throws ParameterOutOfRange on invalid parameters.
  explicit DensityFamily(Params params);

  static DensityFamily uniform() { return DensityFamily(family::Uniform{}); }
  static DensityFamily ref_permuton(double beta, double gamma, double tail_tol = kDefaultTailTol) {
    return DensityFamily(family::RefPermuton{beta, gamma, tail_tol});
  }
  static DensityFamily corner_radial(double alpha) { return DensityFamily(family::CornerRadial{alpha}); }
  static DensityFamily corner_pinched(double beta, double c) {
    return DensityFamily(family::CornerPinched{beta, c});
  }
  static DensityFamily diagonal_power(double alpha) { return DensityFamily(family::DiagonalPower{alpha}); }

  // Throws std::invalid_argument on grammar errors, ParameterOutOfRange on ranges.
  static DensityFamily parse(std::string_view spec);
  std::string to_string() const;

  FamilyTag tag() const noexcept { return static_cast<FamilyTag>(params_.index()); }
  const Params& params() const noexcept { return params_; }

  friend bool operator==(const DensityFamily&, const DensityFamily&) = default;

 private:
  Params params_;
};

inline constexpr std::string_view kFamilyGrammar =
    "uniform | ref:beta=B[,gamma=G][,tol=T] | corner-radial:alpha=A | "
    "corner-pinched:beta=B,c=C | diag-power:alpha=A";

struct Box {
  std::uint64_t index = 0;  // saturates for indices beyond 2^64
  Point lower;
  Point upper;
};

// Reference permuton weights. The head k < 2^16 is tabulated; beyond it the
// law is represented by dyadic blocks [2^j, 2^{j+1}) whose masses come from
// Euler-Maclaurin summation, up to K_max = 2^J - 1.
class RefWeights {
 public:
  using Index = unsigned __int128;
  static constexpr int kHeadBits = 16;
  static constexpr Index kHeadEnd = Index{1} << kHeadBits;  // first index past the head
  static constexpr int kMaxBits = 120;

  RefWeights(double beta, double gamma, double tail_tol);

  double beta() const noexcept { return beta_; }
  double gamma() const noexcept { return gamma_; }
  double tail_tol() const noexcept { return tail_tol_; }
  // Z_{beta,gamma}: the full (untruncated) series.
  double Z() const noexcept { return z_; }
  Index k_max() const noexcept { return k_max_; }
  int k_max_bits() const noexcept { return k_max_bits_; }
  // Discarded mass beyond K_max, relative to Z.
  double tail_mass() const noexcept { return tail_mass_; }

  // k^{-beta} log(k+1)^gamma.
  double weight(Index k) const;
  // sum_{k >= n} weight(k) over the untruncated series.
  double weight_tail(Index n) const;

  // Renormalized over {1..K_max}; zero beyond.
  double u(Index k) const;
  double S(Index n) const;
  double R(Index n) const;
  Box box(Index n) const;
  // Index of a closed box containing p, or 0 when p is off the chain.
  Index box_containing(const Point& p) const;

  // Sampling tables: head weights for k = 1..head_count(), then block masses
  // for j = kHeadBits..k_max_bits()-1.
  std::size_t head_count() const noexcept { return head_count_; }
  std::span<const double> head_weights() const noexcept {
    return {head_w_.data(), head_count_};
  }
  std::span<const double> block_masses() const noexcept { return block_mass_; }
  // Sum of weights over {1..K_max}.
  double truncated_total() const noexcept { return z_trunc_; }

 private:
  double em_tail(double n) const;
  double em_block(double a) const;
  double weight_derivative(double x) const;
  double head_suffix(std::size_t n) const;  // sum_{k=n}^{kHeadEnd-1} weight(k)

  double beta_;
  double gamma_;
  double tail_tol_;
  std::vector<double> head_w_;            // weight(k), k = 1..kHeadEnd-1
  std::vector<long double> head_prefix_;  // head_prefix_[n] = sum_{k<=n}
  std::vector<double> block_mass_;
  double head_end_tail_ = 0.0;  // weight_tail(kHeadEnd)
  double z_ = 0.0;
  double z_trunc_ = 0.0;
  double remainder_ = 0.0;  // weight_tail(K_max + 1)
  double tail_mass_ = 0.0;
  Index k_max_ = 0;
  int k_max_bits_ = 0;
  std::size_t head_count_ = 0;
};

// Throws ParameterOutOfRange unless beta > 1, gamma >= 0, 0 < tail_tol < 1,
// and the tolerance is reachable with K_max <= 2^120.
std::shared_ptr<const RefWeights> build_ref_weights(double beta, double gamma,
                                                     double tail_tol = kDefaultTailTol);

// n^{1-beta}/(beta-1) · log(n)^gamma.
double tail_asymptotic(double beta, double gamma, double n);

// Normalized mass of diagonal grid box C_{k,k} (side 1/b) under DiagonalPower.
double box_mass_diag_power(double alpha, std::uint64_t b, std::uint64_t k);

double corner_radial_normalizer(double alpha);
double corner_pinched_normalizer(double beta, double c);
double diagonal_power_normalizer(double alpha);

// A family with its normalizing constants resolved. Immutable.
class Density {
 public:
  explicit Density(DensityFamily f);

  const DensityFamily& family() const noexcept { return family_; }
  // c_f; 1 for Uniform and RefPermuton.
  double normalizer() const noexcept { return normalizer_; }
  const RefWeights* ref_weights() const noexcept { return ref_.get(); }
  std::shared_ptr<const RefWeights> shared_ref_weights() const noexcept { return ref_; }

  // Throws SingularPoint exactly on the singular set, ParameterOutOfRange
  // outside the unit square.
  double operator()(const Point& p) const;

 private:
  DensityFamily family_;
  double normalizer_ = 1.0;
  std::shared_ptr<const RefWeights> ref_;
};

// Convenience wrapper; builds the Density on every call.
double eval_density(const DensityFamily& f, const Point& p);

}  // namespace permuton
