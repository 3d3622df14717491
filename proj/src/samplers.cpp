#include "permuton/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "permuton/errors.hpp"
#include "permuton/lis.hpp"

namespace permuton {

// ---------------------------------------------------------------------------
// AliasTable

AliasTable::AliasTable(std::span<const double> weights) {
  const std::size_t n = weights.size();
  if (n == 0) throw std::invalid_argument("AliasTable: empty weight list");
  long double total = 0.0L;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("AliasTable: weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0L)) throw std::invalid_argument("AliasTable: weights sum to zero");

  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<std::size_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = static_cast<double>(weights[i] * static_cast<long double>(n) / total);
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.back();
    small.pop_back();
    const std::size_t l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (std::size_t i : large) {
    prob_[i] = 1.0;
    alias_[i] = i;
  }
  for (std::size_t i : small) {  // round-off leftovers
    prob_[i] = 1.0;
    alias_[i] = i;
  }
}

double AliasTable::probability(std::size_t i) const {
  const double n = static_cast<double>(prob_.size());
  double p = prob_.at(i) / n;
  for (std::size_t j = 0; j < prob_.size(); ++j)
    if (alias_[j] == i && j != i) p += (1.0 - prob_[j]) / n;
  return p;
}

namespace {

using Index = RefWeights::Index;

// Root of a strictly increasing F on [lo, hi] by Newton steps kept inside a
// shrinking bracket; falls back to bisection when Newton leaves the bracket.
template <typename F, typename DF>
double invert_increasing(F f, DF df, double target, double lo, double hi, double guess) {
  double t = std::clamp(guess, lo, hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double g = f(t) - target;
    if (g == 0.0) return t;
    if (g > 0.0)
      hi = t;
    else
      lo = t;
    double next = t - g / df(t);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-15 * std::max(std::abs(t), 1e-300) || hi - lo <= 1e-15 * hi) return next;
    t = next;
  }
  return t;
}

// (t^s - 1)/s, continuous at s = 0.
double powm1_over(double t, double s) {
  const double lt = std::log(t);
  if (std::abs(s) < 1e-12) return lt;
  return std::expm1(s * lt) / s;
}

Point from_corner(double t, double s) {
  const double u = std::clamp(0.5 * (t - s), 0.0, 1.0);
  const double v = std::clamp(0.5 * (t + s), 0.0, 1.0);
  return {1.0 - u, 1.0 - v};
}

double pinched_marginal(double t, double c, double p) {
  if (t <= 0.0) return 1.0;
  if (t >= 2.0) return 0.0;
  const double m = std::min(t, 2.0 - t);
  return -std::expm1(-c * m * std::exp(p * std::log(t)));
}

// Indices of items whose key ties with an earlier item in key order.
template <typename Item, typename Key>
void collect_ties(const std::vector<Item>& items, Key key, std::vector<std::uint32_t>& out) {
  std::vector<std::uint32_t> order(items.size());
  std::iota(order.begin(), order.end(), 0U);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const auto ka = key(items[a]);
    const auto kb = key(items[b]);
    return ka < kb || (!(kb < ka) && a < b);
  });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (!(key(items[order[i - 1]]) < key(items[order[i]]))) out.push_back(order[i]);
}

// Draws n items and re-draws any item tying another on either key until all
// keys are distinct.
template <typename Item, typename Draw, typename KeyX, typename KeyY>
std::vector<Item> draw_distinct(std::size_t n, RngStream& rng, Draw draw, KeyX kx, KeyY ky) {
  std::vector<Item> items;
  items.reserve(n);
  for (std::size_t i = 0; i < n; ++i) items.push_back(draw(rng));
  std::vector<std::uint32_t> ties;
  for (;;) {
    ties.clear();
    collect_ties(items, kx, ties);
    collect_ties(items, ky, ties);
    if (ties.empty()) return items;
    std::sort(ties.begin(), ties.end());
    ties.erase(std::unique(ties.begin(), ties.end()), ties.end());
    for (std::uint32_t i : ties) items[i] = draw(rng);
  }
}

// LIS of n draws with distinct keys. Items are sorted by x-key once; a tie
// in either key re-draws the later item and repeats, as draw_distinct does.
template <typename Item, typename Draw, typename KeyX, typename KeyY>
std::size_t lis_of_draws(std::size_t n, RngStream& rng, Draw draw, KeyX kx, KeyY ky) {
  std::vector<Item> items;
  items.reserve(n);
  for (std::size_t i = 0; i < n; ++i) items.push_back(draw(rng));
  using YKey = decltype(ky(std::declval<const Item&>()));
  std::vector<YKey> ys(n), sorted;
  for (;;) {
    std::sort(items.begin(), items.end(), [&](const Item& a, const Item& b) { return kx(a) < kx(b); });
    bool redrawn = false;
    for (std::size_t i = 1; i < n; ++i) {
      if (!(kx(items[i - 1]) < kx(items[i]))) {
        items[i] = draw(rng);
        redrawn = true;
      }
    }
    if (redrawn) continue;
    for (std::size_t i = 0; i < n; ++i) ys[i] = ky(items[i]);
    sorted = ys;
    std::sort(sorted.begin(), sorted.end());
    std::vector<YKey> dups;
    for (std::size_t i = 1; i < n; ++i)
      if (!(sorted[i - 1] < sorted[i])) dups.push_back(sorted[i]);
    if (dups.empty()) return lis_length(std::span<const YKey>(ys));
    for (const YKey& d : dups) {
      bool kept = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (ys[i] < d || d < ys[i]) continue;
        if (kept) items[i] = draw(rng);
        kept = true;
      }
    }
  }
}

struct RefDraw {
  Index box;
  double xi_x;
  double xi_y;
};

struct RefKey {
  Index box;
  double xi;
  friend bool operator<(const RefKey& a, const RefKey& b) {
    return a.box < b.box || (a.box == b.box && a.xi < b.xi);
  }
};

Index draw_ref_box(const detail::RefScheme& s, RngStream& rng) {
  const RefWeights& w = *s.weights;
  const std::size_t i = s.index_table.sample(rng);
  if (i < w.head_count()) return static_cast<Index>(i + 1);

  const int j = RefWeights::kHeadBits + static_cast<int>(i - w.head_count());
  const double a = std::ldexp(1.0, j);
  const Index first = Index{1} << j;
  const Index last = (Index{1} << (j + 1)) - 1;
  const double beta = w.beta();
  const double gamma = w.gamma();
  // Proposal: k = floor(X), X ~ x^{-beta} on [a, 2a); acceptance
  // w(k) / (M I(k)) with I(k) = int_k^{k+1} x^{-beta} dx >= (k+1)^{-beta}.
  double bound = std::exp(beta * std::log1p(1.0 / a));
  if (gamma != 0.0) bound *= std::pow(std::log(2.0 * a), gamma);
  for (;;) {
    const double x = a * std::exp(std::log1p(-rng.uniform() * s.block_span) / s.one_minus_beta);
    Index k = static_cast<Index>(x);
    k = std::clamp(k, first, last);
    const double kd = static_cast<double>(k);
    const double cell = std::exp(s.one_minus_beta * std::log(kd)) *
                        -std::expm1(s.one_minus_beta * std::log1p(1.0 / kd)) / (beta - 1.0);
    if (rng.uniform() * bound * cell <= w.weight(k)) return k;
  }
}

RefDraw draw_ref(const detail::RefScheme& s, RngStream& rng) {
  const Index k = draw_ref_box(s, rng);
  const double xi_x = rng.uniform();
  const double xi_y = rng.uniform();
  return {k, xi_x, xi_y};
}

Point ref_point(const RefWeights& w, const RefDraw& d) {
  const double width = w.u(d.box);
  if (d.box <= w.head_count()) {
    const double lo = w.S(d.box - 1);
    return {std::min(1.0, lo + width * d.xi_x), std::min(1.0, lo + width * d.xi_y)};
  }
  // Measured from the top-right corner to keep the small offsets.
  const double gap = w.R(d.box - 1);
  return {std::clamp(1.0 - (gap - width * d.xi_x), 0.0, 1.0), std::clamp(1.0 - (gap - width * d.xi_y), 0.0, 1.0)};
}

struct PointDrawer {
  RngStream& rng;

  Point operator()(const detail::UniformScheme&) const {
    const double x = rng.uniform();
    return {x, rng.uniform()};
  }

  Point operator()(const detail::RefScheme& s) const { return ref_point(*s.weights, draw_ref(s, rng)); }

  Point operator()(const detail::DiagonalScheme& s) const {
    const double a = s.alpha;
    // CDF of |x-y|: (a+2) t^{a+1} - (a+1) t^{a+2}.
    auto cdf = [a](double t) { return (a + 2.0) * std::pow(t, a + 1.0) - (a + 1.0) * std::pow(t, a + 2.0); };
    auto pdf = [a](double t) { return (a + 2.0) * (a + 1.0) * std::pow(t, a) * (1.0 - t); };
    const double v = rng.uniform();
    const double guess = std::pow(v / (a + 2.0), 1.0 / (a + 1.0));
    const double t = invert_increasing(cdf, pdf, v, 0.0, 1.0, guess);
    const bool above = rng.uniform() < 0.5;  // x > y
    const double lower = rng.uniform() * (1.0 - t);
    const double upper = std::min(1.0, lower + t);
    return above ? Point{upper, lower} : Point{lower, upper};
  }

  Point operator()(const detail::RadialScheme& s) const {
    const double a = s.alpha;
    double t;
    if (rng.uniform() < s.inner_prob) {
      t = std::pow(rng.uniform(), 1.0 / (a + 2.0));
    } else {
      // int_1^t (2-r) r^a dr
      auto cdf = [a](double x) { return 2.0 * powm1_over(x, a + 1.0) - powm1_over(x, a + 2.0); };
      auto pdf = [a](double x) { return (2.0 - x) * std::pow(x, a); };
      const double v = rng.uniform() * s.outer_mass;
      t = invert_increasing(cdf, pdf, v, 1.0, 2.0, 1.0 + v);
    }
    const double m = std::min(t, 2.0 - t);
    const double s_off = (2.0 * rng.uniform() - 1.0) * m;
    return from_corner(t, s_off);
  }

  Point operator()(const detail::PinchedScheme& s) const {
    double t;
    for (;;) {
      const std::size_t bin = s.bins.sample(rng);
      t = (static_cast<double>(bin) + rng.uniform()) * s.bin_width;
      if (rng.uniform() * s.heights[bin] <= pinched_marginal(t, s.c, s.p)) break;
    }
    const double m = std::min(t, 2.0 - t);
    const double rate = s.c * std::exp(s.p * std::log(t));
    double offset = 0.0;
    if (std::isfinite(rate)) {
      // Exponential(rate) truncated to [0, m].
      const double span = -std::expm1(-rate * m);
      offset = std::min(m, -std::log1p(-rng.uniform() * span) / rate);
    }
    const double s_off = rng.uniform() < 0.5 ? -offset : offset;
    return from_corner(t, s_off);
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// Sampler

Sampler::Sampler(const DensityFamily& f) : family_(f) {
  struct Build {
    decltype(scheme_)& out;
    void operator()(const family::Uniform&) const { out = detail::UniformScheme{}; }
    void operator()(const family::RefPermuton& r) const {
      detail::RefScheme s;
      s.weights = build_ref_weights(r.beta, r.gamma, r.tail_tol);
      std::vector<double> table(s.weights->head_weights().begin(), s.weights->head_weights().end());
      for (double m : s.weights->block_masses()) table.push_back(m);
      s.index_table = AliasTable(table);
      s.one_minus_beta = 1.0 - r.beta;
      s.block_span = -std::expm1(s.one_minus_beta * std::numbers::ln2);
      out = std::move(s);
    }
    void operator()(const family::DiagonalPower& d) const { out = detail::DiagonalScheme{d.alpha}; }
    void operator()(const family::CornerRadial& d) const {
      detail::RadialScheme s;
      s.alpha = d.alpha;
      const double inner = 1.0 / (d.alpha + 2.0);
      s.outer_mass = 2.0 * powm1_over(2.0, d.alpha + 1.0) - powm1_over(2.0, d.alpha + 2.0);
      s.inner_prob = inner / (inner + s.outer_mass);
      out = s;
    }
    void operator()(const family::CornerPinched& d) const {
      constexpr std::size_t kBins = 2048;
      detail::PinchedScheme s;
      s.beta = d.beta;
      s.c = d.c;
      s.p = d.beta / (1.0 - d.beta);
      s.bin_width = 2.0 / static_cast<double>(kBins);
      s.heights.resize(kBins);
      // The marginal is non-increasing, so each bin's left value bounds it.
      for (std::size_t i = 0; i < kBins; ++i)
        s.heights[i] = pinched_marginal(static_cast<double>(i) * s.bin_width, s.c, s.p);
      s.bins = AliasTable(s.heights);
      out = std::move(s);
    }
  };
  std::visit(Build{scheme_}, family_.params());
}

Point Sampler::sample_point(RngStream& rng) const { return std::visit(PointDrawer{rng}, scheme_); }

PointSet Sampler::sample_set(std::size_t n, RngStream& rng) const {
  auto pts = std::visit(
      [&](const auto& scheme) {
        return draw_distinct<Point>(
            n, rng, [&](RngStream& r) { return PointDrawer{r}(scheme); }, [](const Point& p) { return p.x; },
            [](const Point& p) { return p.y; });
      },
      scheme_);
  return PointSet(std::move(pts));
}

Index Sampler::sample_ref_box(RngStream& rng) const {
  const auto* s = std::get_if<detail::RefScheme>(&scheme_);
  if (!s) throw std::logic_error("sample_ref_box: sampler is not a reference permuton");
  return draw_ref_box(*s, rng);
}

namespace {

std::vector<RefDraw> ref_draws(const detail::RefScheme& s, std::size_t n, RngStream& rng) {
  return draw_distinct<RefDraw>(
      n, rng, [&](RngStream& r) { return draw_ref(s, r); }, [](const RefDraw& d) { return RefKey{d.box, d.xi_x}; },
      [](const RefDraw& d) { return RefKey{d.box, d.xi_y}; });
}

}  // namespace

Permutation Sampler::sample_permutation(std::size_t n, RngStream& rng) const {
  const auto* s = std::get_if<detail::RefScheme>(&scheme_);
  if (!s) return perm_of_points(sample_set(n, rng));

  const auto draws = ref_draws(*s, n, rng);
  std::vector<std::uint32_t> by_x(n), by_y(n);
  std::iota(by_x.begin(), by_x.end(), 0U);
  std::iota(by_y.begin(), by_y.end(), 0U);
  std::sort(by_x.begin(), by_x.end(), [&](std::uint32_t a, std::uint32_t b) {
    return RefKey{draws[a].box, draws[a].xi_x} < RefKey{draws[b].box, draws[b].xi_x};
  });
  std::sort(by_y.begin(), by_y.end(), [&](std::uint32_t a, std::uint32_t b) {
    return RefKey{draws[a].box, draws[a].xi_y} < RefKey{draws[b].box, draws[b].xi_y};
  });
  std::vector<std::uint32_t> y_rank(n);
  for (std::size_t i = 0; i < n; ++i) y_rank[by_y[i]] = static_cast<std::uint32_t>(i + 1);
  std::vector<Permutation::value_type> image(n);
  for (std::size_t i = 0; i < n; ++i) image[i] = y_rank[by_x[i]];
  return permutation_from_ranks(std::move(image));
}

std::size_t Sampler::sample_lis(std::size_t n, RngStream& rng) const {
  if (const auto* s = std::get_if<detail::RefScheme>(&scheme_)) {
    return lis_of_draws<RefDraw>(
        n, rng, [&](RngStream& r) { return draw_ref(*s, r); }, [](const RefDraw& d) { return RefKey{d.box, d.xi_x}; },
        [](const RefDraw& d) { return RefKey{d.box, d.xi_y}; });
  }
  return std::visit(
      [&](const auto& scheme) {
        return lis_of_draws<Point>(
            n, rng, [&](RngStream& r) { return PointDrawer{r}(scheme); }, [](const Point& p) { return p.x; },
            [](const Point& p) { return p.y; });
      },
      scheme_);
}

Point sample_point(const Sampler& s, RngStream& rng) { return s.sample_point(rng); }
PointSet sample_set(const Sampler& s, std::size_t n, RngStream& rng) { return s.sample_set(n, rng); }
PointSet sample_set(const DensityFamily& f, std::size_t n, RngStream& rng) { return Sampler(f).sample_set(n, rng); }

// ---------------------------------------------------------------------------
// Mixtures

MixtureSpec::MixtureSpec(double eps, DensityFamily g, DensityFamily h) : eps_(eps), g_(std::move(g)), h_(std::move(h)) {
  if (!(eps > 0.0 && eps < 1.0)) throw ParameterOutOfRange("mixture: eps must lie in (0,1)");
}

PointSet MixtureSample::g_part() const {
  std::vector<Point> out;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (from_g[i]) out.push_back(points[i]);
  return PointSet(std::move(out));
}

PointSet MixtureSample::h_part() const {
  std::vector<Point> out;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (!from_g[i]) out.push_back(points[i]);
  return PointSet(std::move(out));
}

MixtureSampler::MixtureSampler(MixtureSpec spec) : spec_(std::move(spec)), g_(spec_.g()), h_(spec_.h()) {}

MixtureSample MixtureSampler::sample(std::size_t n, RngStream& rng) const {
  struct Tagged {
    Point p;
    std::uint8_t from_g;
  };
  auto draw = [&](RngStream& r) {
    const bool b = r.bernoulli(spec_.eps());
    return Tagged{b ? g_.sample_point(r) : h_.sample_point(r), static_cast<std::uint8_t>(b)};
  };
  // A re-drawn point keeps the mixture law: its flag is re-drawn too.
  auto items = draw_distinct<Tagged>(
      n, rng, draw, [](const Tagged& t) { return t.p.x; }, [](const Tagged& t) { return t.p.y; });
  MixtureSample out;
  std::vector<Point> pts(n);
  out.from_g.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = items[i].p;
    out.from_g[i] = items[i].from_g;
  }
  out.points = PointSet(std::move(pts));
  return out;
}

MixtureSample sample_mixture(const MixtureSpec& m, std::size_t n, RngStream& rng) {
  return MixtureSampler(m).sample(n, rng);
}

}  // namespace permuton
