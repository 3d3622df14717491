#include "permuton/cell_mass.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <stdexcept>

#include "permuton/errors.hpp"

namespace permuton {

namespace {

struct Cell {
  double x0, x1, y0, y1;
};

// s-range {s : (x, y) in cell} on the anti-diagonal x + y = 2 - t.
std::pair<double, double> s_range(const Cell& c, double t) {
  const double lo = std::max(2.0 * c.x0 - 2.0 + t, 2.0 - t - 2.0 * c.y1);
  const double hi = std::min(2.0 * c.x1 - 2.0 + t, 2.0 - t - 2.0 * c.y0);
  return {lo, hi};
}

// (1/2) ∫ g(t) dt over the cell's t-range, split where the s-range changes
// slope (the t-values of the cell corners). g receives (t, s_lo, s_hi).
std::vector<double> corner_knots(const Cell& c) {
  std::vector<double> knots{2.0 - c.x0 - c.y0, 2.0 - c.x1 - c.y0, 2.0 - c.x0 - c.y1, 2.0 - c.x1 - c.y1};
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end(), [](double a, double b) { return b - a < 1e-12; }), knots.end());
  knots.front() = std::max(knots.front(), 0.0);
  return knots;
}

template <class G>
double integrate_cell(const Cell& c, G g) {
  const auto knots = corner_knots(c);
  boost::math::quadrature::tanh_sinh<double> ts;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    auto f = [&](double t) {
      const auto [lo, hi] = s_range(c, t);
      return hi > lo ? g(t, lo, hi) : 0.0;
    };
    total += ts.integrate(f, knots[k], knots[k + 1], 1e-13);
  }
  return 0.5 * total;
}

double radial_raw(const Cell& c, double alpha) {
  // On each piece the s-range length is A + B t, so ∫ t^alpha (A + B t) dt
  // has a closed form.
  auto power_integral = [](double e, double a, double b) {
    if (std::abs(e + 1.0) < 1e-14) return std::log(b / a);
    return (std::pow(b, e + 1.0) - std::pow(a, e + 1.0)) / (e + 1.0);
  };
  auto knots = corner_knots(c);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double a = knots[k], b = knots[k + 1];
    auto len = [&](double t) {
      const auto [lo, hi] = s_range(c, t);
      return std::max(0.0, hi - lo);
    };
    const double t1 = a + (b - a) / 3.0, t2 = a + 2.0 * (b - a) / 3.0;
    const double slope = (len(t2) - len(t1)) / (t2 - t1);
    const double offset = len(t1) - slope * t1;
    // The corner cell's range vanishes at t = 0, where only the B term remains.
    if (a > 0.0) total += offset * power_integral(alpha, a, b);
    total += slope * power_integral(alpha + 1.0, a, b);
  }
  return 0.5 * total;
}

double pinched_raw(const Cell& c, double beta, double cc) {
  const double p = beta / (1.0 - beta);
  return integrate_cell(c, [p, cc](double t, double lo, double hi) {
    const double tp = std::pow(t, p);
    // t^p ∫ exp(-c t^p |s|) ds = [sign(s)(1 - exp(-c t^p |s|))] / c
    auto h = [&](double s) {
      if (s == 0.0) return 0.0;
      const double x = cc * tp * std::abs(s);
      const double v = std::isfinite(x) ? -std::expm1(-x) : 1.0;
      return std::copysign(v, s);
    };
    return (h(hi) - h(lo)) / cc;
  });
}

double diagonal_raw(const Cell& c, double alpha) {
  // ∫∫ |x-y|^alpha = -Δ Φ(x-y) with Φ(z) = |z|^{alpha+2}/((alpha+1)(alpha+2)).
  auto phi = [alpha](double z) { return std::pow(std::abs(z), alpha + 2.0) / ((alpha + 1.0) * (alpha + 2.0)); };
  return -(phi(c.x1 - c.y1) - phi(c.x1 - c.y0) - phi(c.x0 - c.y1) + phi(c.x0 - c.y0));
}

double overlap(double a0, double a1, double b0, double b1) { return std::max(0.0, std::min(a1, b1) - std::max(a0, b0)); }

CellMasses ref_masses(const family::RefPermuton& r, std::size_t m) {
  const auto w = build_ref_weights(r.beta, r.gamma, r.tail_tol);
  CellMasses out{m, std::vector<double>(m * m, 0.0), 1.0};
  const double md = static_cast<double>(m);
  const double last_edge = (md - 1.0) / md;
  RefWeights::Index k = 1;
  for (; k <= w->k_max(); ++k) {
    const double lo = w->S(k - 1);
    if (lo >= last_edge) break;
    const double hi = w->S(k);
    const double uk = w->u(k);
    if (!(hi > lo)) continue;
    const auto first = static_cast<std::size_t>(std::floor(lo * md));
    for (std::size_t i = first; i < m; ++i) {
      const double fx = overlap(lo, hi, static_cast<double>(i) / md, static_cast<double>(i + 1) / md) / (hi - lo);
      if (fx <= 0.0) {
        if (static_cast<double>(i) / md >= hi) break;
        continue;
      }
      for (std::size_t j = first; j < m; ++j) {
        const double fy = overlap(lo, hi, static_cast<double>(j) / md, static_cast<double>(j + 1) / md) / (hi - lo);
        if (fy <= 0.0) {
          if (static_cast<double>(j) / md >= hi) break;
          continue;
        }
        out.mass[i * m + j] += uk * fx * fy;
      }
    }
  }
  // Every later box lies inside the top-right cell.
  if (k <= w->k_max()) out.mass[m * m - 1] += w->R(k - 1);
  return out;
}

}  // namespace

CellMasses cell_masses(const DensityFamily& f, std::size_t m) {
  if (m < 1) throw ParameterOutOfRange("cell_masses: m must be >= 1");
  if (const auto* r = std::get_if<family::RefPermuton>(&f.params())) return ref_masses(*r, m);

  CellMasses out{m, std::vector<double>(m * m, 0.0), 0.0};
  const double md = static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const Cell c{static_cast<double>(i) / md, static_cast<double>(i + 1) / md, static_cast<double>(j) / md,
                   static_cast<double>(j + 1) / md};
      double v = 0.0;
      if (std::holds_alternative<family::Uniform>(f.params()))
        v = (c.x1 - c.x0) * (c.y1 - c.y0);
      else if (const auto* rad = std::get_if<family::CornerRadial>(&f.params()))
        v = radial_raw(c, rad->alpha);
      else if (const auto* pin = std::get_if<family::CornerPinched>(&f.params()))
        v = pinched_raw(c, pin->beta, pin->c);
      else if (const auto* dia = std::get_if<family::DiagonalPower>(&f.params()))
        v = diagonal_raw(c, dia->alpha);
      out.mass[i * m + j] = v;
      out.raw_total += v;
    }
  }
  for (double& v : out.mass) v /= out.raw_total;
  return out;
}

std::vector<std::uint64_t> cell_counts(std::span<const Point> points, std::size_t m) {
  std::vector<std::uint64_t> counts(m * m, 0);
  const double md = static_cast<double>(m);
  auto index = [&](double v) {
    const double c = std::ceil(v * md);
    if (!(c >= 1.0)) return std::size_t{0};
    if (c >= md) return m - 1;
    return static_cast<std::size_t>(c) - 1;
  };
  for (const Point& p : points) ++counts[index(p.x) * m + index(p.y)];
  return counts;
}

ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> probabilities) {
  if (observed.size() != probabilities.size()) throw std::invalid_argument("chi_square_gof: size mismatch");
  std::uint64_t total = 0;
  for (auto o : observed) total += o;
  ChiSquareResult out;
  const double n = static_cast<double>(total);
  double pooled_obs = 0.0, pooled_exp = 0.0;
  std::size_t bins = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = n * probabilities[i];
    const double o = static_cast<double>(observed[i]);
    if (probabilities[i] <= 0.0) {
      out.impossible += observed[i];
      continue;
    }
    if (e < 5.0) {
      pooled_obs += o;
      pooled_exp += e;
      continue;
    }
    out.statistic += (o - e) * (o - e) / e;
    ++bins;
  }
  if (pooled_exp > 0.0) {
    out.statistic += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
    ++bins;
  }
  if (bins < 2) throw std::invalid_argument("chi_square_gof: fewer than 2 bins");
  out.dof = bins - 1;
  boost::math::chi_squared_distribution<double> dist(static_cast<double>(out.dof));
  out.p_value = out.impossible > 0 ? 0.0 : boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

}  // namespace permuton
