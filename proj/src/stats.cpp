#include "permuton/stats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "permuton/errors.hpp"
#include "permuton/lis.hpp"
#include "permuton/parallel.hpp"

namespace permuton {

std::vector<std::uint64_t> lis_replicates(const Sampler& sampler, std::uint64_t n, std::uint64_t replicates,
                                          std::uint64_t seed, unsigned threads) {
  std::vector<std::uint64_t> values(replicates);
  parallel_for(replicates, threads, [&](std::size_t r) {
    RngStream rng(seed, r);
    values[r] = sampler.sample_lis(n, rng);
  });
  return values;
}

EstimateRecord summarize(const DensityFamily& family, std::uint64_t n, std::uint64_t seed,
                         std::span<const std::uint64_t> values) {
  if (values.size() < 2) throw std::invalid_argument("estimate: need at least 2 replicates");
  // Integer sums are exact, so the result is independent of summation order.
  unsigned __int128 sum = 0;
  for (auto v : values) sum += v;
  const auto r = static_cast<long double>(values.size());
  const long double mean = static_cast<long double>(sum) / r;
  long double ss = 0.0L;
  for (auto v : values) {
    const long double d = static_cast<long double>(v) - mean;
    ss += d * d;
  }
  EstimateRecord out;
  out.family = family;
  out.n = n;
  out.replicates = values.size();
  out.mean_lis = static_cast<double>(mean);
  out.std_lis = static_cast<double>(std::sqrt(ss / (r - 1.0L)));
  out.std_err = out.std_lis / std::sqrt(static_cast<double>(values.size()));
  out.seed = seed;
  return out;
}

EstimateRecord estimate(const Sampler& sampler, std::uint64_t n, std::uint64_t replicates, std::uint64_t seed,
                        unsigned threads) {
  if (replicates < 2) throw std::invalid_argument("estimate: need at least 2 replicates");
  if (n < 1) throw std::invalid_argument("estimate: N must be >= 1");
  const auto values = lis_replicates(sampler, n, replicates, seed, threads);
  return summarize(sampler.family(), n, seed, values);
}

EstimateRecord estimate(const DensityFamily& family, std::uint64_t n, std::uint64_t replicates, std::uint64_t seed,
                        unsigned threads) {
  return estimate(Sampler(family), n, replicates, seed, threads);
}

Rational exact_small_ell(std::uint64_t n) {
  if (n > 8) throw SizeLimitExceeded("exact_small_ell: N = " + std::to_string(n) + " exceeds 8");
  if (n == 0) return {0, 1};
  std::vector<Permutation::value_type> img(n);
  std::iota(img.begin(), img.end(), 1U);
  std::uint64_t total = 0, count = 0;
  do {
    total += lis_length(std::span<const Permutation::value_type>(img));
    ++count;
  } while (std::next_permutation(img.begin(), img.end()));
  const std::uint64_t g = std::gcd(total, count);
  return {total / g, count / g};
}

FitResult fit_exponent(std::span<const EstimateRecord> records, bool with_log_correction) {
  const std::size_t m = records.size();
  if (m < 3) throw DegenerateDesign("fit_exponent: need at least 3 records, got " + std::to_string(m));
  for (const auto& r : records) {
    if (!(r.family == records.front().family)) throw DegenerateDesign("fit_exponent: records mix families");
    if (!(r.mean_lis > 0.0)) throw DegenerateDesign("fit_exponent: mean_lis must be positive");
    if (with_log_correction && r.n < 2) throw DegenerateDesign("fit_exponent: log log N undefined for N < 2");
  }
  std::vector<std::uint64_t> ns;
  for (const auto& r : records) ns.push_back(r.n);
  std::sort(ns.begin(), ns.end());
  if (std::adjacent_find(ns.begin(), ns.end()) != ns.end()) throw DegenerateDesign("fit_exponent: repeated N");

  const bool weighted = std::all_of(records.begin(), records.end(), [](const auto& r) { return r.std_err > 0.0; });
  const Eigen::Index p = with_log_correction ? 3 : 2;
  Eigen::MatrixXd x(m, p);
  Eigen::VectorXd y(m), w(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double log_n = std::log(static_cast<double>(records[i].n));
    const auto row = static_cast<Eigen::Index>(i);
    x(row, 0) = 1.0;
    x(row, 1) = log_n;
    if (with_log_correction) x(row, 2) = std::log(log_n);
    y(row) = std::log(records[i].mean_lis);
    const double rel = records[i].std_err / records[i].mean_lis;
    w(row) = weighted ? 1.0 / (rel * rel) : 1.0;
  }
  const Eigen::VectorXd sw = w.cwiseSqrt();
  const Eigen::MatrixXd xw = sw.asDiagonal() * x;
  const Eigen::VectorXd yw = sw.asDiagonal() * y;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xw);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) throw DegenerateDesign("fit_exponent: design matrix is rank deficient");
  const Eigen::VectorXd beta = qr.solve(yw);

  const Eigen::VectorXd resid = y - x * beta;
  const double wsum = w.sum();
  const double ybar = w.dot(y) / wsum;
  const double sst = (w.array() * (y.array() - ybar).square()).sum();
  const double ssr = (w.array() * resid.array().square()).sum();

  FitResult out;
  out.intercept = beta(0);
  out.exponent = beta(1);
  out.log_coeff = with_log_correction ? beta(2) : 0.0;
  out.r_squared = sst > 0.0 ? std::clamp(1.0 - ssr / sst, 0.0, 1.0) : 1.0;
  out.n_points = m;
  return out;
}

double mcdiarmid_bound(std::uint64_t n, double lambda) {
  return 2.0 * std::exp(-2.0 * lambda * lambda / static_cast<double>(n));
}

double talagrand_upper_bound(double median, double lambda) {
  if (lambda == 0.0) return 2.0;
  return 2.0 * std::exp(-lambda * lambda / (4.0 * (median + lambda)));
}

double talagrand_lower_bound(double median, double lambda) {
  if (lambda == 0.0) return 2.0;
  return 2.0 * std::exp(-lambda * lambda / (4.0 * median));
}

double bernstein_bound(std::uint64_t n, double p, double t) {
  if (n < 1) throw ParameterOutOfRange("bernstein_bound: n must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw ParameterOutOfRange("bernstein_bound: p must lie in (0,1)");
  if (!(t > 0.0)) throw ParameterOutOfRange("bernstein_bound: t must be > 0");
  const double var = static_cast<double>(n) * p * (1.0 - p);
  return 2.0 * std::exp(-(t * t / 2.0) / (var + t / 3.0));
}

bool ConcentrationReport::mcdiarmid_violated() const {
  return std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.mcdiarmid_violated; });
}

bool ConcentrationReport::talagrand_violated() const {
  return std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.talagrand_violated; });
}

namespace {

bool exceeds(double empirical, double bound, double replicates) {
  const double se = std::sqrt(empirical * (1.0 - empirical) / replicates);
  return empirical - 3.0 * se > bound;
}

}  // namespace

ConcentrationReport concentration_from_samples(const DensityFamily& family, std::uint64_t n,
                                               std::span<const std::uint64_t> values,
                                               std::span<const double> lambdas) {
  const EstimateRecord summary = summarize(family, n, 0, values);
  std::vector<std::uint64_t> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  ConcentrationReport rep;
  rep.family = family;
  rep.n = n;
  rep.replicates = values.size();
  rep.mean = summary.mean_lis;
  rep.std_err = summary.std_err;
  rep.median = static_cast<double>(sorted[(sorted.size() - 1) / 2]);

  const double r = static_cast<double>(values.size());
  for (double lambda : lambdas) {
    ConcentrationRow row;
    row.lambda = lambda;
    std::size_t two_sided = 0, upper = 0, lower = 0;
    for (auto v : values) {
      const double l = static_cast<double>(v);
      if (std::abs(l - rep.mean) > lambda + rep.std_err) ++two_sided;
      if (l >= rep.median + lambda) ++upper;
      if (l <= rep.median - lambda) ++lower;
    }
    row.empirical_tail = static_cast<double>(two_sided) / r;
    row.empirical_upper = static_cast<double>(upper) / r;
    row.empirical_lower = static_cast<double>(lower) / r;
    row.mcdiarmid = mcdiarmid_bound(n, lambda);
    row.talagrand_up = talagrand_upper_bound(rep.median, lambda);
    row.talagrand_down = talagrand_lower_bound(rep.median, lambda);
    row.mcdiarmid_violated = exceeds(row.empirical_tail, row.mcdiarmid, r);
    row.talagrand_violated =
        exceeds(row.empirical_upper, row.talagrand_up, r) || exceeds(row.empirical_lower, row.talagrand_down, r);
    rep.rows.push_back(row);
  }
  return rep;
}

ConcentrationReport mcdiarmid_check(const DensityFamily& family, std::uint64_t n, std::uint64_t replicates,
                                    std::span<const double> lambdas, std::uint64_t seed, unsigned threads) {
  const auto values = lis_replicates(Sampler(family), n, replicates, seed, threads);
  return concentration_from_samples(family, n, values, lambdas);
}

ConcentrationReport talagrand_check(const DensityFamily& family, std::uint64_t n, std::uint64_t replicates,
                                    std::span<const double> lambdas, std::uint64_t seed, unsigned threads) {
  return mcdiarmid_check(family, n, replicates, lambdas, seed, threads);
}

std::vector<double> default_lambda_grid(std::uint64_t n) {
  const double root = std::sqrt(static_cast<double>(n));
  return {0.05 * root, 0.1 * root, 0.25 * root, 0.5 * root, 1.0 * root};
}

std::vector<std::uint64_t> geometric_grid(std::uint64_t start, std::uint64_t stop, std::size_t points) {
  if (start < 1 || stop < start) throw std::invalid_argument("geometric grid: need 1 <= start <= stop");
  if (points < 1) throw std::invalid_argument("geometric grid: need at least one point");
  if (points == 1) return {start};
  std::vector<std::uint64_t> out;
  const double ratio = std::log(static_cast<double>(stop) / static_cast<double>(start));
  for (std::size_t i = 0; i < points; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(points - 1);
    auto v = static_cast<std::uint64_t>(std::llround(static_cast<double>(start) * std::exp(ratio * f)));
    if (i == points - 1) v = stop;
    if (!out.empty() && v <= out.back())
      throw std::invalid_argument("geometric grid: too many points for the range (values repeat)");
    out.push_back(v);
  }
  return out;
}

}  // namespace permuton
