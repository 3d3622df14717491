#include "permuton/densities.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "permuton/errors.hpp"
#include "permuton/io.hpp"

namespace permuton {

namespace {

using Index = RefWeights::Index;

std::string fmt(double v) { return io::format_real(v); }

double to_double(Index k) { return static_cast<double>(k); }

void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterOutOfRange(what);
}

void validate(const family::Uniform&) {}
void validate(const family::RefPermuton& f) {
  require(f.beta > 1.0 && std::isfinite(f.beta), "ref: beta must be > 1 (got " + fmt(f.beta) + ")");
  require(f.gamma >= 0.0 && std::isfinite(f.gamma), "ref: gamma must be >= 0 (got " + fmt(f.gamma) + ")");
  require(f.tail_tol > 0.0 && f.tail_tol < 1.0, "ref: tol must lie in (0,1) (got " + fmt(f.tail_tol) + ")");
}
void validate(const family::CornerRadial& f) {
  require(f.alpha > -2.0 && std::isfinite(f.alpha),
          "corner-radial: alpha must be > -2 (got " + fmt(f.alpha) + ")");
}
void validate(const family::CornerPinched& f) {
  require(f.beta > 1.0 && std::isfinite(f.beta),
          "corner-pinched: beta must be > 1 (got " + fmt(f.beta) + ")");
  require(f.c > 0.0 && std::isfinite(f.c), "corner-pinched: c must be > 0 (got " + fmt(f.c) + ")");
}
void validate(const family::DiagonalPower& f) {
  require(f.alpha > -1.0 && f.alpha < 0.0,
          "diag-power: alpha must lie in (-1,0) (got " + fmt(f.alpha) + ")");
}

// key=value list after the family name.
std::map<std::string, double> parse_params(std::string_view body, std::string_view name,
                                           std::initializer_list<std::string_view> allowed) {
  std::map<std::string, double> out;
  if (body.empty()) return out;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    const std::size_t comma = std::min(body.find(',', pos), body.size());
    const std::string_view item = body.substr(pos, comma - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw std::invalid_argument(std::string(name) + ": expected key=value, got '" + std::string(item) + "'");
    const std::string key(item.substr(0, eq));
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw std::invalid_argument(std::string(name) + ": unknown parameter '" + key + "'");
    if (out.count(key)) throw std::invalid_argument(std::string(name) + ": duplicate parameter '" + key + "'");
    out[key] = io::parse_real(item.substr(eq + 1));
    pos = comma + 1;
  }
  return out;
}

double required(const std::map<std::string, double>& params, const std::string& key, std::string_view name) {
  auto it = params.find(key);
  if (it == params.end())
    throw std::invalid_argument(std::string(name) + ": missing parameter '" + key + "'");
  return it->second;
}

// (2^{s} - 1)/s, continuous at s = 0.
double pow2_m1_over(double s) {
  if (std::abs(s) < 1e-12) return std::numbers::ln2;
  return std::expm1(s * std::numbers::ln2) / s;
}

}  // namespace

// ---------------------------------------------------------------------------
// DensityFamily

DensityFamily::DensityFamily(Params params) : params_(params) {
  std::visit([](const auto& f) { validate(f); }, params_);
}

DensityFamily DensityFamily::parse(std::string_view spec) {
  const std::size_t colon = spec.find(':');
  const std::string_view name = spec.substr(0, colon);
  const std::string_view body = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
  if (name == "uniform") {
    if (!body.empty()) throw std::invalid_argument("uniform takes no parameters");
    return uniform();
  }
  if (name == "ref") {
    auto p = parse_params(body, name, {"beta", "gamma", "tol"});
    const double gamma = p.count("gamma") ? p["gamma"] : 0.0;
    const double tol = p.count("tol") ? p["tol"] : kDefaultTailTol;
    return ref_permuton(required(p, "beta", name), gamma, tol);
  }
  if (name == "corner-radial") {
    auto p = parse_params(body, name, {"alpha"});
    return corner_radial(required(p, "alpha", name));
  }
  if (name == "corner-pinched") {
    auto p = parse_params(body, name, {"beta", "c"});
    return corner_pinched(required(p, "beta", name), required(p, "c", name));
  }
  if (name == "diag-power") {
    auto p = parse_params(body, name, {"alpha"});
    return diagonal_power(required(p, "alpha", name));
  }
  throw std::invalid_argument("unknown density family '" + std::string(name) + "'");
}

std::string DensityFamily::to_string() const {
  struct Printer {
    std::string operator()(const family::Uniform&) const { return "uniform"; }
    std::string operator()(const family::RefPermuton& f) const {
      std::string s = "ref:beta=" + fmt(f.beta) + ",gamma=" + fmt(f.gamma);
      if (f.tail_tol != kDefaultTailTol) s += ",tol=" + fmt(f.tail_tol);
      return s;
    }
    std::string operator()(const family::CornerRadial& f) const { return "corner-radial:alpha=" + fmt(f.alpha); }
    std::string operator()(const family::CornerPinched& f) const {
      return "corner-pinched:beta=" + fmt(f.beta) + ",c=" + fmt(f.c);
    }
    std::string operator()(const family::DiagonalPower& f) const { return "diag-power:alpha=" + fmt(f.alpha); }
  };
  return std::visit(Printer{}, params_);
}

// ---------------------------------------------------------------------------
// RefWeights

RefWeights::RefWeights(double beta, double gamma, double tail_tol)
    : beta_(beta), gamma_(gamma), tail_tol_(tail_tol) {
  validate(family::RefPermuton{beta, gamma, tail_tol});

  const std::size_t head_len = static_cast<std::size_t>(kHeadEnd) - 1;
  head_w_.resize(head_len);
  head_prefix_.assign(head_len + 1, 0.0L);
  for (std::size_t k = 1; k <= head_len; ++k) {
    head_w_[k - 1] = weight(k);
    head_prefix_[k] = head_prefix_[k - 1] + head_w_[k - 1];
  }
  head_end_tail_ = em_tail(to_double(kHeadEnd));
  z_ = static_cast<double>(head_prefix_[head_len] + head_end_tail_);

  k_max_bits_ = 0;
  for (int bits = 1; bits <= kMaxBits; ++bits) {
    if (weight_tail(Index{1} << bits) / z_ < tail_tol_) {
      k_max_bits_ = bits;
      break;
    }
  }
  if (k_max_bits_ == 0)
    throw ParameterOutOfRange("ref: tail tolerance " + fmt(tail_tol_) + " unreachable for beta=" + fmt(beta_) +
                              " with K_max <= 2^" + std::to_string(kMaxBits) + "; loosen tol");
  k_max_ = (Index{1} << k_max_bits_) - 1;
  remainder_ = weight_tail(k_max_ + 1);
  tail_mass_ = remainder_ / z_;

  head_count_ = static_cast<std::size_t>(std::min<Index>(k_max_, head_len));
  long double total = head_prefix_[head_count_];
  for (int j = kHeadBits; j < k_max_bits_; ++j) {
    block_mass_.push_back(em_block(std::ldexp(1.0, j)));
    total += block_mass_.back();
  }
  z_trunc_ = static_cast<double>(total);
}

double RefWeights::weight(Index k) const {
  const double x = to_double(k);
  double log_w = -beta_ * std::log(x);
  if (gamma_ != 0.0) log_w += gamma_ * std::log(std::log1p(x));
  return std::exp(log_w);
}

double RefWeights::weight_derivative(double x) const {
  const double lp = std::log1p(x);
  double f = std::exp(-beta_ * std::log(x));
  if (gamma_ != 0.0) f *= std::pow(lp, gamma_);
  double d = -beta_ / x;
  if (gamma_ != 0.0) d += gamma_ / (lp * (x + 1.0));
  return f * d;
}

// Euler-Maclaurin to infinity; n >= 2^16 keeps the next term below 1e-19.
double RefWeights::em_tail(double n) const {
  double integral;
  if (gamma_ == 0.0) {
    integral = std::exp((1.0 - beta_) * std::log(n)) / (beta_ - 1.0);
  } else {
    const double log_n = std::log(n);
    auto g = [&](double s) {
      if (!std::isfinite(s)) return 0.0;
      const double lg = log_n + s + std::log1p(std::exp(-s) / n);
      const double v = std::exp((1.0 - beta_) * s) * std::pow(lg, gamma_);
      return std::isfinite(v) ? v : 0.0;
    };
    boost::math::quadrature::exp_sinh<double> integrator;
    integral = std::exp((1.0 - beta_) * log_n) * integrator.integrate(g, 0.0, std::numeric_limits<double>::infinity());
  }
  return integral + 0.5 * weight(static_cast<Index>(n)) - weight_derivative(n) / 12.0;
}

double RefWeights::em_block(double a) const {
  const double b = 2.0 * a;
  double integral;
  if (gamma_ == 0.0) {
    integral = std::exp((1.0 - beta_) * std::log(a)) * -std::expm1((1.0 - beta_) * std::numbers::ln2) / (beta_ - 1.0);
  } else {
    const double log_a = std::log(a);
    auto g = [&](double s) {
      const double lg = log_a + s + std::log1p(std::exp(-s) / a);
      return std::exp((1.0 - beta_) * s) * std::pow(lg, gamma_);
    };
    integral = std::exp((1.0 - beta_) * log_a) *
               boost::math::quadrature::gauss<double, 30>::integrate(g, 0.0, std::numbers::ln2);
  }
  const double fa = weight(static_cast<Index>(a));
  const double fb = weight(static_cast<Index>(b));
  return integral + 0.5 * (fa - fb) + (weight_derivative(b) - weight_derivative(a)) / 12.0;
}

double RefWeights::head_suffix(std::size_t n) const {
  const std::size_t last = head_prefix_.size() - 1;
  if (n > last) return 0.0;
  return static_cast<double>(head_prefix_[last] - head_prefix_[n - 1]);
}

double RefWeights::weight_tail(Index n) const {
  if (n < 1) n = 1;
  if (n < kHeadEnd) return head_suffix(static_cast<std::size_t>(n)) + head_end_tail_;
  return em_tail(to_double(n));
}

double RefWeights::u(Index k) const {
  if (k < 1 || k > k_max_) return 0.0;
  return weight(k) / z_trunc_;
}

double RefWeights::R(Index n) const {
  if (n >= k_max_) return 0.0;
  return std::max(0.0, (weight_tail(n + 1) - remainder_) / z_trunc_);
}

double RefWeights::S(Index n) const {
  if (n == 0) return 0.0;
  if (n >= k_max_) return 1.0;
  if (n < kHeadEnd) return static_cast<double>(head_prefix_[static_cast<std::size_t>(n)] / z_trunc_);
  return 1.0 - R(n);
}

Box RefWeights::box(Index n) const {
  const double lo = S(n - 1);
  const double hi = S(n);
  const auto idx = n > Index{UINT64_MAX} ? UINT64_MAX : static_cast<std::uint64_t>(n);
  return {idx, {lo, lo}, {hi, hi}};
}

Index RefWeights::box_containing(const Point& p) const {
  // Smallest k with S(k) >= x.
  Index k;
  const std::size_t head_last = head_count_;
  const long double x_scaled = static_cast<long double>(p.x) * z_trunc_;
  if (p.x <= S(head_last)) {
    auto it = std::lower_bound(head_prefix_.begin() + 1, head_prefix_.begin() + static_cast<long>(head_last) + 1,
                               x_scaled);
    k = static_cast<Index>(it - head_prefix_.begin());
    if (k > head_last) k = head_last;
  } else {
    const double gap = 1.0 - p.x;
    Index lo = head_last + 1, hi = k_max_;
    while (lo < hi) {
      const Index mid = lo + (hi - lo) / 2;
      if (R(mid) <= gap)
        hi = mid;
      else
        lo = mid + 1;
    }
    k = lo;
  }
  auto inside = [&](Index j) {
    if (j < 1 || j > k_max_) return false;
    const double lo = S(j - 1), hi = S(j);
    return p.x >= lo && p.x <= hi && p.y >= lo && p.y <= hi;
  };
  if (inside(k)) return k;
  if (inside(k + 1)) return k + 1;
  return 0;
}

std::shared_ptr<const RefWeights> build_ref_weights(double beta, double gamma, double tail_tol) {
  return std::make_shared<const RefWeights>(beta, gamma, tail_tol);
}

double tail_asymptotic(double beta, double gamma, double n) {
  require(beta > 1.0, "tail_asymptotic: beta must be > 1");
  require(n >= 1.0, "tail_asymptotic: n must be >= 1");
  double v = std::exp((1.0 - beta) * std::log(n)) / (beta - 1.0);
  if (gamma != 0.0) v *= std::pow(std::log(n), gamma);
  return v;
}

// ---------------------------------------------------------------------------
// Normalizers and box masses

double diagonal_power_normalizer(double alpha) {
  validate(family::DiagonalPower{alpha});
  return (alpha + 1.0) * (alpha + 2.0) / 2.0;
}

double box_mass_diag_power(double alpha, std::uint64_t b, std::uint64_t k) {
  validate(family::DiagonalPower{alpha});
  require(b >= 1, "box_mass_diag_power: b must be >= 1");
  require(k >= 1 && k <= b, "box_mass_diag_power: k must lie in [1, b]");
  // Unnormalized: 2 h^{alpha+2} / ((alpha+1)(alpha+2)) for a square of side h
  // centred on the diagonal; independent of k.
  const double h = 1.0 / static_cast<double>(b);
  const double raw = 2.0 * std::pow(h, alpha + 2.0) / ((alpha + 1.0) * (alpha + 2.0));
  return raw * diagonal_power_normalizer(alpha);
}

double corner_radial_normalizer(double alpha) {
  validate(family::CornerRadial{alpha});
  // int_0^2 min(t,2-t) t^alpha dt, split at t = 1.
  const double inner = 1.0 / (alpha + 2.0);
  // int_1^2 (2-t) t^alpha dt = 2 (2^{a+1}-1)/(a+1) - (2^{a+2}-1)/(a+2)
  const double outer = 2.0 * pow2_m1_over(alpha + 1.0) - pow2_m1_over(alpha + 2.0);
  return 1.0 / (inner + outer);
}

double corner_pinched_normalizer(double beta, double c) {
  validate(family::CornerPinched{beta, c});
  const double p = beta / (1.0 - beta);
  // Mass of the unnormalized density after integrating out s = x - y:
  // (1/c) int_0^2 (1 - exp(-c m(t) t^p)) dt with m(t) = min(t, 2-t).
  auto near = [&](double t) { return t <= 0.0 ? 1.0 : -std::expm1(-c * std::exp((1.0 + p) * std::log(t))); };
  auto far = [&](double t) { return t >= 2.0 ? 0.0 : -std::expm1(-c * (2.0 - t) * std::exp(p * std::log(t))); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double i1 = GK::integrate(near, 0.0, 1.0, 20, 1e-15);
  const double i2 = GK::integrate(far, 1.0, 2.0, 20, 1e-15);
  return c / (i1 + i2);
}

// ---------------------------------------------------------------------------
// Density

Density::Density(DensityFamily f) : family_(std::move(f)) {
  struct Setup {
    Density& d;
    void operator()(const family::Uniform&) const {}
    void operator()(const family::RefPermuton& r) const { d.ref_ = build_ref_weights(r.beta, r.gamma, r.tail_tol); }
    void operator()(const family::CornerRadial& r) const { d.normalizer_ = corner_radial_normalizer(r.alpha); }
    void operator()(const family::CornerPinched& r) const { d.normalizer_ = corner_pinched_normalizer(r.beta, r.c); }
    void operator()(const family::DiagonalPower& r) const { d.normalizer_ = diagonal_power_normalizer(r.alpha); }
  };
  std::visit(Setup{*this}, family_.params());
}

double Density::operator()(const Point& p) const {
  if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0))
    throw ParameterOutOfRange("density evaluated outside the unit square");
  const double d = (1.0 - p.x) + (1.0 - p.y);
  struct Eval {
    const Density& self;
    const Point& p;
    double d;
    double operator()(const family::Uniform&) const { return 1.0; }
    double operator()(const family::RefPermuton&) const {
      const Index k = self.ref_->box_containing(p);
      return k == 0 ? 0.0 : 1.0 / self.ref_->u(k);
    }
    double operator()(const family::CornerRadial& f) const {
      if (d == 0.0) {
        if (f.alpha < 0.0) throw SingularPoint("corner-radial density evaluated at (1,1)");
        return f.alpha == 0.0 ? self.normalizer_ : 0.0;
      }
      return self.normalizer_ * std::pow(d, f.alpha);
    }
    double operator()(const family::CornerPinched& f) const {
      if (d == 0.0) throw SingularPoint("corner-pinched density evaluated at (1,1)");
      const double p_exp = f.beta / (1.0 - f.beta);
      const double log_scale = p_exp * std::log(d);
      const double s = std::abs(p.x - p.y);
      // Log domain: the scale overflows long before the exponential vanishes.
      const double log_value = s == 0.0 ? log_scale : log_scale - f.c * s * std::exp(log_scale);
      return self.normalizer_ * std::exp(log_value);
    }
    double operator()(const family::DiagonalPower& f) const {
      if (p.x == p.y) throw SingularPoint("diag-power density evaluated on the diagonal");
      return self.normalizer_ * std::pow(std::abs(p.x - p.y), f.alpha);
    }
  };
  return std::visit(Eval{*this, p, d}, family_.params());
}

double eval_density(const DensityFamily& f, const Point& p) { return Density(f)(p); }

}  // namespace permuton
