#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "permuton/errors.hpp"
#include "permuton/lis.hpp"
#include "permuton/parallel.hpp"
#include "permuton/rng.hpp"
#include "permuton/stats.hpp"

using namespace permuton;

namespace {

EstimateRecord record(std::uint64_t n, double mean, double se = 0.0,
                      DensityFamily f = DensityFamily::uniform()) {
  EstimateRecord r;
  r.family = f;
  r.n = n;
  r.replicates = 64;
  r.mean_lis = mean;
  r.std_lis = se * 8.0;
  r.std_err = se;
  return r;
}

}  // namespace

TEST(ExactSmallEll, Values) {
  EXPECT_EQ(exact_small_ell(1), (Rational{1, 1}));
  EXPECT_EQ(exact_small_ell(2), (Rational{3, 2}));
  EXPECT_EQ(exact_small_ell(3), (Rational{2, 1}));
  // Sum of LIS over S_4 is 58.
  EXPECT_EQ(exact_small_ell(4), (Rational{29, 12}));
  EXPECT_THROW(exact_small_ell(9), SizeLimitExceeded);
  const Rational l8 = exact_small_ell(8);
  EXPECT_GT(l8.value(), 3.0);
  EXPECT_LT(l8.value(), 2.0 * std::sqrt(8.0));
}

TEST(Estimate, SmallSizesMatchExact) {
  const Sampler u(DensityFamily::uniform());
  for (std::uint64_t n : {1, 2, 3, 5}) {
    const EstimateRecord e = estimate(u, n, 40000, 21, 1);
    if (n == 1) {
      EXPECT_EQ(e.mean_lis, 1.0);
      EXPECT_EQ(e.std_err, 0.0);
      continue;
    }
    EXPECT_NEAR(e.mean_lis, exact_small_ell(n).value(), 3.0 * e.std_err) << n;
  }
}

TEST(Estimate, RecordInvariants) {
  const EstimateRecord e = estimate(DensityFamily::ref_permuton(2.0, 0.0), 1000, 30, 5, 1);
  EXPECT_GE(e.mean_lis, 1.0);
  EXPECT_LE(e.mean_lis, 1000.0);
  EXPECT_NEAR(e.std_err, e.std_lis / std::sqrt(30.0), 1e-12);
  EXPECT_EQ(e.seed, 5u);
  EXPECT_EQ(e.replicates, 30u);
  EXPECT_THROW(estimate(DensityFamily::uniform(), 10, 1, 1, 1), std::invalid_argument);
}

TEST(Estimate, IndependentOfThreadCount) {
  const Sampler s(DensityFamily::corner_pinched(1.5, 1.0));
  const auto one = lis_replicates(s, 2000, 24, 77, 1);
  const auto four = lis_replicates(s, 2000, 24, 77, 4);
  EXPECT_EQ(one, four);
  const EstimateRecord a = estimate(s, 2000, 24, 77, 1), b = estimate(s, 2000, 24, 77, 3);
  EXPECT_EQ(a.mean_lis, b.mean_lis);
  EXPECT_EQ(a.std_lis, b.std_lis);
}

TEST(Estimate, SummarizeIsOrderIndependent) {
  std::vector<std::uint64_t> v{5, 9, 2, 2, 14, 7, 3};
  const EstimateRecord a = summarize(DensityFamily::uniform(), 10, 1, v);
  std::reverse(v.begin(), v.end());
  const EstimateRecord b = summarize(DensityFamily::uniform(), 10, 1, v);
  EXPECT_EQ(a.mean_lis, b.mean_lis);
  EXPECT_EQ(a.std_lis, b.std_lis);
  EXPECT_NEAR(a.mean_lis, 6.0, 1e-15);
  EXPECT_NEAR(a.std_lis, std::sqrt(116.0 / 6.0), 1e-12);
}

TEST(Estimate, MeansNonDecreasingOverDoublings) {
  const Sampler s(DensityFamily::ref_permuton(1.5, 0.0));
  double prev = 0.0;
  for (std::uint64_t n = 64; n <= 8192; n *= 2) {
    const double m = estimate(s, n, 64, 3, 1).mean_lis;
    EXPECT_GE(m, prev) << n;
    prev = m;
  }
}

TEST(FitExponent, ExactPowerLaw) {
  std::vector<EstimateRecord> recs;
  for (double n : {100.0, 1000.0, 10000.0, 100000.0}) recs.push_back(record(static_cast<std::uint64_t>(n), 2.0 * std::sqrt(n)));
  const FitResult f = fit_exponent(recs, false);
  EXPECT_NEAR(f.exponent, 0.5, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(2.0), 1e-10);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  EXPECT_EQ(f.n_points, 4u);
  EXPECT_EQ(f.log_coeff, 0.0);
}

TEST(FitExponent, LogCorrectedModelRecovery) {
  std::vector<EstimateRecord> recs;
  for (std::uint64_t n = 4096; n <= 524288; n *= 2) {
    const double nd = static_cast<double>(n);
    recs.push_back(record(n, std::pow(nd, 0.7) * std::log(nd), 0.01 * nd));
  }
  const FitResult f = fit_exponent(recs, true);
  EXPECT_NEAR(f.exponent, 0.7, 1e-6);
  EXPECT_NEAR(f.log_coeff, 1.0, 1e-6);
  EXPECT_NEAR(f.intercept, 0.0, 1e-6);
}

TEST(FitExponent, WeightsFollowRelativeError) {
  // One badly off point with a huge standard error barely moves the fit.
  std::vector<EstimateRecord> recs;
  for (std::uint64_t n : {1000, 2000, 4000, 8000}) recs.push_back(record(n, std::sqrt(double(n)), 1e-3));
  recs.push_back(record(16000, 3.0 * std::sqrt(16000.0), 1e6));
  EXPECT_NEAR(fit_exponent(recs, false).exponent, 0.5, 1e-6);
}

TEST(FitExponent, InvariantUnderScalingAndReordering) {
  std::vector<EstimateRecord> recs;
  RngStream rng(1, 0);
  for (std::uint64_t n = 1000; n <= 64000; n *= 2)
    recs.push_back(record(n, std::pow(double(n), 0.6) * (1.0 + 0.05 * rng.uniform()), 0.5 + rng.uniform()));
  for (bool corr : {false, true}) {
    const FitResult base = fit_exponent(recs, corr);
    auto scaled = recs;
    for (auto& r : scaled) {
      r.mean_lis *= 7.5;
      r.std_err *= 7.5;
    }
    const FitResult s = fit_exponent(scaled, corr);
    EXPECT_NEAR(s.exponent, base.exponent, 1e-10);
    EXPECT_NEAR(s.log_coeff, base.log_coeff, 1e-9);
    EXPECT_NEAR(s.intercept, base.intercept + std::log(7.5), 1e-9);
    auto shuffled = recs;
    std::reverse(shuffled.begin(), shuffled.end());
    std::swap(shuffled[1], shuffled[4]);
    EXPECT_NEAR(fit_exponent(shuffled, corr).exponent, base.exponent, 1e-10);
  }
}

TEST(FitExponent, DegenerateDesigns) {
  std::vector<EstimateRecord> two{record(10, 3), record(20, 4)};
  EXPECT_THROW(fit_exponent(two, false), DegenerateDesign);
  std::vector<EstimateRecord> repeated{record(10, 3), record(10, 3.1), record(20, 4)};
  EXPECT_THROW(fit_exponent(repeated, false), DegenerateDesign);
  std::vector<EstimateRecord> mixed{record(10, 3), record(20, 4),
                                    record(40, 5, 0.0, DensityFamily::ref_permuton(2.0, 0.0))};
  EXPECT_THROW(fit_exponent(mixed, false), DegenerateDesign);
  std::vector<EstimateRecord> with_one{record(1, 1), record(20, 4), record(40, 5)};
  EXPECT_THROW(fit_exponent(with_one, true), DegenerateDesign);
  EXPECT_NO_THROW(fit_exponent(with_one, false));
}

TEST(Bounds, Values) {
  EXPECT_NEAR(mcdiarmid_bound(100, 20.0), 2.0 * std::exp(-8.0), 1e-15);
  EXPECT_NEAR(mcdiarmid_bound(100, 20.0), 6.709e-4, 1e-7);
  EXPECT_EQ(mcdiarmid_bound(100, 0.0), 2.0);
  EXPECT_NEAR(talagrand_upper_bound(200.0, 100.0), 2.0 * std::exp(-10000.0 / 1200.0), 1e-15);
  EXPECT_NEAR(talagrand_upper_bound(200.0, 100.0), 4.8e-4, 1e-5);
  EXPECT_EQ(talagrand_upper_bound(200.0, 0.0), 2.0);
  EXPECT_EQ(talagrand_lower_bound(200.0, 0.0), 2.0);
  EXPECT_NEAR(talagrand_lower_bound(200.0, 100.0), 2.0 * std::exp(-10000.0 / 800.0), 1e-15);
}

TEST(Bernstein, ValueAndMonotonicity) {
  EXPECT_NEAR(bernstein_bound(100, 0.1, 10.0), 2.0 * std::exp(-50.0 / (9.0 + 10.0 / 3.0)), 1e-15);
  EXPECT_NEAR(bernstein_bound(100, 0.1, 10.0), 0.034704, 1e-6);
  double prev = 2.0;
  for (double t = 1.0; t < 300.0; t *= 1.5) {
    const double b = bernstein_bound(100, 0.1, t);
    EXPECT_LT(b, prev);
    prev = b;
  }
  EXPECT_LT(prev, 1e-100);
  EXPECT_THROW(bernstein_bound(0, 0.1, 1.0), ParameterOutOfRange);
  EXPECT_THROW(bernstein_bound(10, 1.0, 1.0), ParameterOutOfRange);
  EXPECT_THROW(bernstein_bound(10, 0.1, 0.0), ParameterOutOfRange);
}

TEST(Bernstein, DominatesBinomialTails) {
  std::mt19937_64 eng(99);
  std::binomial_distribution<int> bin(10000, 0.01);
  const int draws = 100000;
  std::vector<int> x(draws);
  for (auto& v : x) v = bin(eng);
  for (double t : {20.0, 30.0, 50.0}) {
    int exceed = 0;
    for (int v : x) exceed += std::abs(v - 100.0) >= t;
    const double emp = exceed / double(draws);
    EXPECT_LE(emp, bernstein_bound(10000, 0.01, t) + 3.0 * std::sqrt(emp * (1 - emp) / draws)) << t;
  }
}

TEST(Concentration, FromSamplesHandComputed) {
  const std::vector<std::uint64_t> v{10, 10, 10, 10, 20};
  const std::vector<double> lambdas{0.0, 1.0};
  const ConcentrationReport rep = concentration_from_samples(DensityFamily::uniform(), 100, v, lambdas);
  EXPECT_EQ(rep.median, 10.0);
  EXPECT_EQ(rep.mean, 12.0);
  ASSERT_EQ(rep.rows.size(), 2u);
  for (const auto& row : rep.rows) {
    EXPECT_GE(row.empirical_tail, 0.0);
    EXPECT_LE(row.empirical_tail, 1.0);
    EXPECT_GT(row.mcdiarmid, 0.0);
  }
  EXPECT_EQ(rep.rows[0].mcdiarmid, 2.0);
  EXPECT_FALSE(rep.rows[0].mcdiarmid_violated);
  EXPECT_FALSE(rep.rows[0].talagrand_violated);
  EXPECT_DOUBLE_EQ(rep.rows[1].empirical_upper, 0.2);
}

TEST(Concentration, ViolationNeedsThreeStandardErrors) {
  // Every sample sits 10 away from the mean: the tail beyond lambda = 3 is 1,
  // far above the McDiarmid bound at N = 1.
  std::vector<std::uint64_t> v;
  for (int i = 0; i < 1000; ++i) v.push_back(i % 2 ? 20 : 0);
  const std::vector<double> lambdas{3.0};
  const auto rep = concentration_from_samples(DensityFamily::uniform(), 1, v, lambdas);
  EXPECT_TRUE(rep.mcdiarmid_violated());
}

TEST(Concentration, UniformHoldsOnDefaultGrid) {
  const auto rep = mcdiarmid_check(DensityFamily::uniform(), 10000, 2000, default_lambda_grid(10000), 3, 1);
  EXPECT_FALSE(rep.mcdiarmid_violated());
  EXPECT_FALSE(rep.talagrand_violated());
  const std::vector<double> l300{300.0};
  const auto big = talagrand_check(DensityFamily::uniform(), 10000, 2000, l300, 4, 1);
  EXPECT_LE(big.rows[0].empirical_tail, big.rows[0].mcdiarmid);
}

TEST(Grids, DefaultLambdaAndGeometric) {
  const auto l = default_lambda_grid(10000);
  ASSERT_EQ(l.size(), 5u);
  EXPECT_DOUBLE_EQ(l[0], 5.0);
  EXPECT_DOUBLE_EQ(l[4], 100.0);
  const auto g = geometric_grid(4096, 524288, 8);
  const std::vector<std::uint64_t> expect{4096, 8192, 16384, 32768, 65536, 131072, 262144, 524288};
  EXPECT_EQ(g, expect);
  EXPECT_EQ(geometric_grid(100, 100000, 4), (std::vector<std::uint64_t>{100, 1000, 10000, 100000}));
  EXPECT_THROW(geometric_grid(10, 12, 5), std::invalid_argument);
  EXPECT_THROW(geometric_grid(0, 12, 2), std::invalid_argument);
}

TEST(Parallel, RethrowsFirstException) {
  EXPECT_THROW(parallel_for(100, 4,
                            [](std::size_t i) {
                              if (i == 37) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
  std::vector<int> hit(1000, 0);
  parallel_for(1000, 3, [&](std::size_t i) { hit[i] += 1; });
  EXPECT_EQ(std::count(hit.begin(), hit.end(), 1), 1000);
}
