#include "permuton/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "permuton/cell_mass.hpp"
#include "permuton/densities.hpp"
#include "permuton/errors.hpp"
#include "permuton/gridcheck.hpp"
#include "permuton/io.hpp"
#include "permuton/lis.hpp"
#include "permuton/parallel.hpp"
#include "permuton/samplers.hpp"
#include "permuton/stats.hpp"

namespace permuton::acceptance {

namespace {

// Tolerances and sizes, fixed before any run.
constexpr std::size_t kOraclePerms = 1000;
constexpr std::size_t kOracleMaxN = 12;

constexpr std::uint64_t kUniformN = 100000;
constexpr std::uint64_t kUniformReps = 200;
constexpr double kUniformLow = 1.90;
constexpr double kUniformHigh = 2.00;
constexpr std::uint64_t kSmallReps = 100000;
constexpr double kSmallSigmas = 3.0;

constexpr std::uint64_t kGridStart = 4096;
constexpr std::uint64_t kGridStop = 524288;
constexpr std::size_t kGridPoints = 8;
constexpr std::uint64_t kFitReps = 64;

constexpr std::size_t kChiCells = 20;
constexpr std::size_t kChiDraws = 1000000;
constexpr double kChiMinP = 1e-4;
constexpr double kDiagWithin = 0.25;
constexpr double kDiagWithinProb = 0.6875;
constexpr double kDiagWithinTol = 0.003;
constexpr double kRefBoxOne = 0.6079;
constexpr double kRefBoxOneTol = 0.002;
constexpr double kBoxMassSigmas = 3.0;

constexpr std::size_t kSandwichSets = 500;
constexpr std::size_t kPathMatrices = 200;
constexpr std::uint64_t kPathMaxSide = 4;

constexpr std::uint64_t kConcentrationReps = 10000;

constexpr double kTailN = 1e5;
constexpr double kTailLow = 0.995;
constexpr double kTailHigh = 1.005;

constexpr std::size_t kCouplingTrials = 200;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  // splitmix64 finalizer over seed and criterion tag.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string num(double v, int digits = 4) { return io::format_real(v, digits); }

CriterionResult result(bool passed, std::string detail) {
  CriterionResult r;
  r.passed = passed;
  r.detail = std::move(detail);
  return r;
}

CriterionResult oracle_equivalence(const Options& opts) {
  const Sampler uniform(DensityFamily::uniform());
  std::size_t mismatches = 0, checked = 0;
  for (std::size_t n = 1; n <= kOracleMaxN; ++n) {
    RngStream rng(derive_seed(opts.seed, 1), n);
    for (std::size_t t = 0; t < kOraclePerms; ++t) {
      const Permutation sigma = uniform.sample_permutation(n, rng);
      const std::size_t a = lis_fast(sigma).length;
      if (a != lis_quadratic(sigma) || a != lis_exhaustive(sigma)) ++mismatches;
      ++checked;
    }
  }
  return result(mismatches == 0,
                std::to_string(checked) + " permutations, N=1.." + std::to_string(kOracleMaxN) + ", " +
                    std::to_string(mismatches) + " mismatches");
}

CriterionResult uniform_baseline(const Options& opts) {
  const std::uint64_t seed = derive_seed(opts.seed, 2);
  const Sampler uniform(DensityFamily::uniform());
  const EstimateRecord big = estimate(uniform, kUniformN, kUniformReps, seed, opts.threads);
  const double ratio = big.mean_lis / std::sqrt(static_cast<double>(kUniformN));
  bool ok = ratio >= kUniformLow && ratio <= kUniformHigh;
  std::ostringstream d;
  d << "mean/sqrt(N)=" << num(ratio) << " in [" << kUniformLow << "," << kUniformHigh << "]";
  for (std::uint64_t n : {2, 3}) {
    const Rational exact = exact_small_ell(n);
    const EstimateRecord e = estimate(uniform, n, kSmallReps, seed + n, opts.threads);
    const double z = std::abs(e.mean_lis - exact.value()) / e.std_err;
    ok = ok && z <= kSmallSigmas;
    d << "; l" << n << "=" << exact.num << "/" << exact.den << " est=" << num(e.mean_lis, 5) << " z=" << num(z, 3);
  }
  const Rational l2 = exact_small_ell(2), l3 = exact_small_ell(3);
  ok = ok && l2 == Rational{3, 2} && l3 == Rational{2, 1};
  return result(ok, d.str());
}

struct ExponentTarget {
  DensityFamily family;
  double target;
  double tolerance;
};

CriterionResult exponent_recovery(const Options& opts, int tag, const std::vector<ExponentTarget>& targets) {
  const auto grid = geometric_grid(kGridStart, kGridStop, kGridPoints);
  bool ok = true;
  std::ostringstream d;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const auto& tg = targets[t];
    const Sampler sampler(tg.family);
    const std::uint64_t seed = derive_seed(opts.seed, static_cast<std::uint64_t>(tag) * 16 + t);
    std::vector<EstimateRecord> records;
    for (auto n : grid) records.push_back(estimate(sampler, n, kFitReps, seed, opts.threads));
    const FitResult plain = fit_exponent(records, false);
    const FitResult corrected = fit_exponent(records, true);
    const bool hit = std::abs(plain.exponent - tg.target) <= tg.tolerance ||
                     std::abs(corrected.exponent - tg.target) <= tg.tolerance;
    ok = ok && hit;
    if (t > 0) d << "; ";
    d << tg.family.to_string() << ": plain=" << num(plain.exponent) << " log-corrected=" << num(corrected.exponent)
      << " target " << num(tg.target) << "±" << tg.tolerance << (hit ? "" : " MISS");
  }
  return result(ok, d.str());
}

std::vector<DensityFamily> chi_square_families() {
  return {DensityFamily::uniform(),
          DensityFamily::ref_permuton(1.5, 0.0),
          DensityFamily::ref_permuton(2.0, 0.0),
          DensityFamily::ref_permuton(3.0, 0.0),
          DensityFamily::ref_permuton(1.5, 1.0),
          DensityFamily::corner_radial(-1.0),
          DensityFamily::corner_radial(-1.5),
          DensityFamily::corner_radial(1.0),
          DensityFamily::corner_pinched(1.5, 1.0),
          DensityFamily::corner_pinched(3.0, 5.0),
          DensityFamily::diagonal_power(-0.5),
          DensityFamily::diagonal_power(-0.2),
          DensityFamily::diagonal_power(-0.9)};
}

CriterionResult sampler_correctness(const Options& opts) {
  const std::uint64_t seed = derive_seed(opts.seed, 6);
  bool ok = true;
  std::ostringstream d;
  const auto families = chi_square_families();
  double worst_p = 1.0;
  std::string worst;
  for (std::size_t f = 0; f < families.size(); ++f) {
    const Sampler sampler(families[f]);
    RngStream rng(seed, f);
    std::vector<Point> pts(kChiDraws);
    for (auto& p : pts) p = sampler.sample_point(rng);
    const auto chi = chi_square_gof(cell_counts(pts, kChiCells), cell_masses(families[f], kChiCells).mass);
    if (chi.p_value <= kChiMinP) {
      ok = false;
      d << "chi-square FAIL " << families[f].to_string() << " p=" << num(chi.p_value, 3) << "; ";
    }
    if (chi.p_value < worst_p) {
      worst_p = chi.p_value;
      worst = families[f].to_string();
    }
  }
  d << "chi-square over " << families.size() << " families, min p=" << num(worst_p, 3) << " (" << worst << ")";

  {
    const Sampler diag(DensityFamily::diagonal_power(-0.5));
    RngStream rng(seed, 100);
    std::size_t within = 0;
    for (std::size_t i = 0; i < kChiDraws; ++i) {
      const Point p = diag.sample_point(rng);
      if (std::abs(p.x - p.y) <= kDiagWithin) ++within;
    }
    const double freq = static_cast<double>(within) / static_cast<double>(kChiDraws);
    const bool hit = std::abs(freq - kDiagWithinProb) <= kDiagWithinTol;
    ok = ok && hit;
    d << "; P(|X-Y|<=0.25)=" << num(freq, 5) << (hit ? "" : " MISS");
  }
  {
    const Sampler ref(DensityFamily::ref_permuton(2.0, 0.0));
    RngStream rng(seed, 101);
    std::size_t first = 0;
    for (std::size_t i = 0; i < kChiDraws; ++i)
      if (ref.sample_ref_box(rng) == 1) ++first;
    const double freq = static_cast<double>(first) / static_cast<double>(kChiDraws);
    const bool hit = std::abs(freq - kRefBoxOne) <= kRefBoxOneTol;
    ok = ok && hit;
    d << "; ref beta=2 box 1=" << num(freq, 5) << (hit ? "" : " MISS");
  }
  {
    // Diagonal boxes of a b×b grid under DiagonalPower: each has mass
    // b^{-(alpha+2)}; checked per box and pooled over the diagonal.
    const double alpha = -0.5;
    const std::uint64_t b = 20;
    const Sampler diag(DensityFamily::diagonal_power(alpha));
    RngStream rng(seed, 102);
    std::vector<std::uint64_t> counts(b, 0);
    for (std::size_t i = 0; i < kChiDraws; ++i) {
      const Point p = diag.sample_point(rng);
      const auto bi = grid_box_index(p.x, b), bj = grid_box_index(p.y, b);
      if (bi == bj) ++counts[bi - 1];
    }
    const double n = static_cast<double>(kChiDraws);
    double worst_z = 0.0;
    std::uint64_t pooled = 0;
    for (std::uint64_t k = 1; k <= b; ++k) {
      const double mass = box_mass_diag_power(alpha, b, k);
      const double expect = std::pow(static_cast<double>(b), -(alpha + 2.0));
      if (std::abs(mass - expect) > 1e-12 * expect) ok = false;
      const double z = std::abs(static_cast<double>(counts[k - 1]) / n - mass) / std::sqrt(mass * (1.0 - mass) / n);
      worst_z = std::max(worst_z, z);
      pooled += counts[k - 1];
    }
    const double pooled_mass = static_cast<double>(b) * std::pow(static_cast<double>(b), -(alpha + 2.0));
    const double pooled_z =
        std::abs(static_cast<double>(pooled) / n - pooled_mass) / std::sqrt(pooled_mass * (1.0 - pooled_mass) / n);
    // Per-box z-scores are judged after a Bonferroni widening over b boxes.
    const double per_box_limit = kBoxMassSigmas + std::sqrt(2.0 * std::log(static_cast<double>(b)));
    const bool hit = pooled_z <= kBoxMassSigmas && worst_z <= per_box_limit;
    ok = ok && hit;
    d << "; diag boxes b=" << b << " pooled z=" << num(pooled_z, 3) << " max box z=" << num(worst_z, 3)
      << (hit ? "" : " MISS");
  }
  return result(ok, d.str());
}

double sandwich_alpha(const DensityFamily& f) {
  if (const auto* d = std::get_if<family::DiagonalPower>(&f.params())) return d->alpha;
  return -0.5;
}

std::uint64_t best_path_exhaustive(const std::vector<std::vector<std::uint64_t>>& w, std::size_t i, std::size_t j) {
  const std::size_t b = w.size();
  std::uint64_t best = 0;
  if (i + 1 < b) best = std::max(best, best_path_exhaustive(w, i + 1, j));
  if (j + 1 < b) best = std::max(best, best_path_exhaustive(w, i, j + 1));
  return w[i][j] + best;
}

CriterionResult deterministic_sandwich(const Options& opts) {
  const std::uint64_t seed = derive_seed(opts.seed, 7);
  const auto families = chi_square_families();
  const std::uint64_t sizes[] = {100, 1000, 10000, 100000};
  std::size_t violations = 0;
  std::string first_violation;
  std::vector<std::size_t> per_size(4, 0);
  for (std::size_t s = 0; s < kSandwichSets; ++s) {
    const auto& f = families[s % families.size()];
    const std::size_t size_idx = (s / families.size()) % 4;
    per_size[size_idx]++;
    RngStream rng(seed, s);
    const PointSet ps = sample_set(f, sizes[size_idx], rng);
    try {
      (void)sandwich_check(ps, sandwich_alpha(f));
    } catch (const InvariantViolation& e) {
      if (violations++ == 0) first_violation = f.to_string() + ": " + e.what();
    }
  }
  std::size_t path_mismatches = 0;
  RngStream rng(seed, 1u << 20);
  for (std::size_t t = 0; t < kPathMatrices; ++t) {
    const std::uint64_t b = 1 + t % kPathMaxSide;
    std::vector<std::vector<std::uint64_t>> w(b, std::vector<std::uint64_t>(b, 0));
    std::vector<GridCounts::Cell> cells;
    for (std::uint64_t i = 0; i < b; ++i)
      for (std::uint64_t j = 0; j < b; ++j) {
        w[i][j] = rng.bernoulli(0.3) ? 0 : rng.below(10);
        cells.push_back({i + 1, j + 1, w[i][j]});
      }
    const std::uint64_t exact = best_path_exhaustive(w, 0, 0);
    if (monotone_path_max(w) != exact || path_upper_bound(GridCounts(b, cells)).total != exact) ++path_mismatches;
  }
  std::ostringstream d;
  d << kSandwichSets << " sets over " << families.size() << " families and N in {1e2,1e3,1e4,1e5}: " << violations
    << " sandwich violations";
  if (!first_violation.empty()) d << " (first: " << first_violation << ")";
  d << "; " << kPathMatrices << " matrices b<=" << kPathMaxSide << ": " << path_mismatches << " path mismatches";
  return result(violations == 0 && path_mismatches == 0, d.str());
}

CriterionResult concentration(const Options& opts) {
  const std::uint64_t seed = derive_seed(opts.seed, 8);
  bool ok = true;
  std::ostringstream d;
  const DensityFamily families[] = {DensityFamily::uniform(), DensityFamily::ref_permuton(1.5, 0.0)};
  std::size_t rows = 0, idx = 0;
  for (const auto& f : families) {
    for (std::uint64_t n : {1000, 10000}) {
      const auto lambdas = default_lambda_grid(n);
      const auto rep = mcdiarmid_check(f, n, kConcentrationReps, lambdas, seed + idx++, opts.threads);
      rows += rep.rows.size();
      if (rep.mcdiarmid_violated() || rep.talagrand_violated()) {
        ok = false;
        d << "VIOLATION " << f.to_string() << " N=" << n << "; ";
      }
    }
  }
  d << rows << " (family, N, lambda) rows with " << kConcentrationReps << " replicates each, "
    << (ok ? "no violations" : "violations found");
  return result(ok, d.str());
}

CriterionResult tail_asymptotics(const Options&) {
  bool ok = true;
  std::ostringstream d;
  bool first = true;
  for (double gamma : {0.0, 1.0}) {
    for (double beta : {1.5, 2.0, 3.0}) {
      const auto w = build_ref_weights(beta, gamma);
      const double ratio =
          w->weight_tail(static_cast<RefWeights::Index>(kTailN)) / tail_asymptotic(beta, gamma, kTailN);
      const bool hit = ratio >= kTailLow && ratio <= kTailHigh;
      ok = ok && hit;
      d << (first ? "" : "; ") << "beta=" << beta << ",gamma=" << gamma << ": " << num(ratio, 6)
        << (hit ? "" : " OUT");
      first = false;
    }
  }
  d << " (band [" << kTailLow << "," << kTailHigh << "] at n=1e5)";
  return result(ok, d.str());
}

CriterionResult coupling(const Options& opts) {
  const std::uint64_t seed = derive_seed(opts.seed, 10);
  const auto families = chi_square_families();
  const double eps_values[] = {0.1, 0.3, 0.5, 0.7, 0.9};
  const std::size_t sizes[] = {10, 100, 1000, 5000};
  std::size_t failures = 0;
  for (std::size_t t = 0; t < kCouplingTrials; ++t) {
    const auto& g = families[t % families.size()];
    const auto& h = families[(t * 7 + 3) % families.size()];
    const MixtureSpec spec(eps_values[t % 5], g, h);
    RngStream rng(seed, t);
    const MixtureSample s = sample_mixture(spec, sizes[(t / 5) % 4], rng);
    const std::size_t full = lis_points(s.points).length;
    const std::size_t lg = lis_points(s.g_part()).length;
    const std::size_t lh = lis_points(s.h_part()).length;
    if (lg > full || lh > full || full > lg + lh) ++failures;
  }
  return result(failures == 0, std::to_string(kCouplingTrials) + " mixture trials, " + std::to_string(failures) +
                                   " inequality failures");
}

}  // namespace

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "LIS oracle equivalence", 10.0, oracle_equivalence},
      {2, "uniform baseline", 300.0, uniform_baseline},
      {3, "reference permuton exponents", 1200.0,
       [](const Options& o) {
         return exponent_recovery(o, 3,
                                  {{DensityFamily::ref_permuton(1.5, 0.0), 2.0 / 3.0, 0.06},
                                   {DensityFamily::ref_permuton(2.0, 0.0), 0.5, 0.05},
                                   {DensityFamily::ref_permuton(3.0, 0.0), 0.5, 0.05}});
       }},
      {4, "diagonal power exponents", 1200.0,
       [](const Options& o) {
         return exponent_recovery(o, 4,
                                  {{DensityFamily::diagonal_power(-0.5), 2.0 / 3.0, 0.06},
                                   {DensityFamily::diagonal_power(-0.2), 1.0 / 1.8, 0.06}});
       }},
      {5, "corner family exponents", 1800.0,
       [](const Options& o) {
         return exponent_recovery(o, 5,
                                  {{DensityFamily::corner_radial(-1.0), 0.5, 0.06},
                                   {DensityFamily::corner_pinched(1.5, 1.0), 2.0 / 3.0, 0.08}});
       }},
      {6, "sampler correctness", 0.0, sampler_correctness},
      {7, "deterministic sandwich", 0.0, deterministic_sandwich},
      {8, "concentration bounds", 0.0, concentration},
      {9, "tail asymptotics", 0.0, tail_asymptotics},
      {10, "coupling inequalities", 0.0, coupling},
  };
  return all;
}

CriterionResult run_criterion(const Criterion& c, const Options& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = c.run(opts);
  } catch (const std::exception& e) {
    r = result(false, std::string("exception: ") + e.what());
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.id = c.id;
  r.title = c.title;
  if (c.budget_seconds > 0.0 && r.seconds > c.budget_seconds) {
    r.passed = false;
    r.detail += "; over runtime budget of " + num(c.budget_seconds) + " s";
  }
  return r;
}

std::vector<CriterionResult> run_suite(const Options& opts, const std::vector<int>& ids,
                                       const std::function<void(const CriterionResult&)>& report) {
  std::vector<CriterionResult> out;
  for (const auto& c : criteria()) {
    if (!ids.empty() && std::find(ids.begin(), ids.end(), c.id) == ids.end()) continue;
    out.push_back(run_criterion(c, opts));
    if (report) report(out.back());
  }
  return out;
}

std::string format_line(const CriterionResult& r) {
  std::ostringstream s;
  s << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.title << ": " << r.detail << " ("
    << io::format_real(r.seconds, 3) << " s)";
  return s.str();
}

}  // namespace permuton::acceptance
