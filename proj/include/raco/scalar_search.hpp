#ifndef RACO_SCALAR_SEARCH_HPP
#define RACO_SCALAR_SEARCH_HPP

#include <algorithm>
#include <cmath>
#include <utility>

namespace raco {

struct ScalarMin {
  double x = 0.0;
  double value = 0.0;
};

/// Minimise a convex differentiable function over [lo, hi] given only its
/// derivative: endpoints are returned when the derivative does not change
/// sign, otherwise the sign change is bisected until the bracket is narrower
/// than rel_tol * hi.
template <typename Deriv>
double bisect_stationary(Deriv&& deriv, double lo, double hi, double rel_tol = 1e-12,
                         int max_iter = 200) {
  if (!(hi > lo)) return lo;
  const double d_hi = deriv(hi);
  if (!(d_hi > 0.0)) return hi;
  const double d_lo = deriv(lo);
  if (!(d_lo < 0.0)) return lo;
  const double width = rel_tol * std::max(std::abs(hi), std::abs(lo));
  for (int i = 0; i < max_iter && hi - lo > width; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double d = deriv(mid);
    if (d > 0.0)
      hi = mid;
    else if (d < 0.0)
      lo = mid;
    else
      return mid;
  }
  return 0.5 * (lo + hi);
}

/// Golden-section search for a unimodal function on [a, b].
template <typename Fn>
ScalarMin golden_section(Fn&& f, double a, double b, double rel_tol = 1e-12, int max_iter = 300) {
  constexpr double invphi = 0.6180339887498949;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  const double width = rel_tol * std::max(std::abs(a), std::abs(b));
  for (int i = 0; i < max_iter && (b - a) > width; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  const double fa = f(a), fb = f(b);
  ScalarMin best = fc <= fd ? ScalarMin{c, fc} : ScalarMin{d, fd};
  if (fa < best.value) best = {a, fa};
  if (fb < best.value) best = {b, fb};
  return best;
}

/// Uniform grid scan on [a, b] followed by golden-section refinement inside
/// the cell pair around the best grid point.
template <typename Fn>
ScalarMin grid_then_golden(Fn&& f, double a, double b, int grid = 64, double rel_tol = 1e-12) {
  const double h = (b - a) / grid;
  int best_i = 0;
  double best_v = f(a);
  for (int i = 1; i <= grid; ++i) {
    const double v = f(a + i * h);
    if (v < best_v) {
      best_v = v;
      best_i = i;
    }
  }
  const double lo = best_i == 0 ? a : a + (best_i - 1) * h;
  const double hi = best_i == grid ? b : a + (best_i + 1) * h;
  ScalarMin refined = golden_section(f, lo, hi, rel_tol);
  if (best_v < refined.value) refined = {a + best_i * h, best_v};
  return refined;
}

} // namespace raco

#endif // RACO_SCALAR_SEARCH_HPP
