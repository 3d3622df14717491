#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "permuton/densities.hpp"
#include "permuton/samplers.hpp"

namespace permuton {

// Monte Carlo summary of LIS(Sample_N) over independent replicate streams.
struct EstimateRecord {
  DensityFamily family = DensityFamily::uniform();
  std::uint64_t n = 0;
  std::uint64_t replicates = 0;
  double mean_lis = 0.0;
  double std_lis = 0.0;  // sample standard deviation (R-1 denominator)
  double std_err = 0.0;  // std_lis / sqrt(R)
  std::uint64_t seed = 0;
};

// LIS of replicate r is computed on RngStream(seed, r). The result does not
// depend on the thread count.
std::vector<std::uint64_t> lis_replicates(const Sampler& sampler, std::uint64_t n, std::uint64_t replicates,
                                          std::uint64_t seed, unsigned threads = 0);

EstimateRecord summarize(const DensityFamily& family, std::uint64_t n, std::uint64_t seed,
                         std::span<const std::uint64_t> values);

// Throws std::invalid_argument when replicates < 2.
EstimateRecord estimate(const Sampler& sampler, std::uint64_t n, std::uint64_t replicates, std::uint64_t seed,
                        unsigned threads = 0);
EstimateRecord estimate(const DensityFamily& family, std::uint64_t n, std::uint64_t replicates, std::uint64_t seed,
                        unsigned threads = 0);

struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

// E[LIS] of a uniform permutation of size N by enumerating all N!
// permutations. Throws SizeLimitExceeded for N > 8.
Rational exact_small_ell(std::uint64_t n);

// log mean = exponent·log N [+ log_coeff·log log N] + intercept, weighted by
// the delta-method variance of log mean.
struct FitResult {
  double exponent = 0.0;
  double log_coeff = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n_points = 0;
};

// Throws DegenerateDesign for fewer than 3 records, mixed families, repeated
// N, or a rank-deficient design.
FitResult fit_exponent(std::span<const EstimateRecord> records, bool with_log_correction);

double mcdiarmid_bound(std::uint64_t n, double lambda);
double talagrand_upper_bound(double median, double lambda);
double talagrand_lower_bound(double median, double lambda);
// 2 exp(-(t²/2) / (np(1-p) + t/3)). Throws ParameterOutOfRange unless
// n >= 1, 0 < p < 1, t > 0.
double bernstein_bound(std::uint64_t n, double p, double t);

struct ConcentrationRow {
  double lambda = 0.0;
  // P(|L - mean| > lambda + stderr), centred at the pooled sample mean.
  double empirical_tail = 0.0;
  double empirical_upper = 0.0;  // P(L >= M + lambda)
  double empirical_lower = 0.0;  // P(L <= M - lambda)
  double mcdiarmid = 0.0;
  double talagrand_up = 0.0;
  double talagrand_down = 0.0;
  bool mcdiarmid_violated = false;
  bool talagrand_violated = false;
};

struct ConcentrationReport {
  DensityFamily family = DensityFamily::uniform();
  std::uint64_t n = 0;
  std::uint64_t replicates = 0;
  double mean = 0.0;
  double std_err = 0.0;
  double median = 0.0;
  std::vector<ConcentrationRow> rows;

  bool mcdiarmid_violated() const;
  bool talagrand_violated() const;
};

// Rows for every lambda. A bound counts as violated only when the empirical
// tail exceeds it by more than 3 binomial standard errors.
ConcentrationReport concentration_from_samples(const DensityFamily& family, std::uint64_t n,
                                               std::span<const std::uint64_t> values,
                                               std::span<const double> lambdas);

ConcentrationReport mcdiarmid_check(const DensityFamily& family, std::uint64_t n, std::uint64_t replicates,
                                    std::span<const double> lambdas, std::uint64_t seed, unsigned threads = 0);
ConcentrationReport talagrand_check(const DensityFamily& family, std::uint64_t n, std::uint64_t replicates,
                                    std::span<const double> lambdas, std::uint64_t seed, unsigned threads = 0);

// {0.05, 0.1, 0.25, 0.5, 1} · sqrt(N).
std::vector<double> default_lambda_grid(std::uint64_t n);

// `points` geometrically spaced integers from start to stop inclusive
// (rounded, strictly increasing).
std::vector<std::uint64_t> geometric_grid(std::uint64_t start, std::uint64_t stop, std::size_t points);

}  // namespace permuton
