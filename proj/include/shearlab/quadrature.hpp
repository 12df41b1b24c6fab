#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "shearlab/error.hpp"

namespace shearlab {

struct QuadratureOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  int max_depth = 48;
  int initial_panels = 16;
};

namespace detail {

template <class F>
double simpson_recurse(const F& f, double a, double b, double fa, double fm, double fb,
                       double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b]. The interval is first cut
/// into uniform panels; each panel is refined until the Richardson error
/// estimate meets max(abs_tol, rel_tol * |estimate|) in proportion to its
/// share of the interval.
template <class F>
double adaptive_simpson(const F& f, double a, double b, QuadratureOptions opt = {}) {
  if (b == a) return 0.0;
  if (b < a) return -adaptive_simpson(f, b, a, opt);
  const int panels = std::max(1, opt.initial_panels);
  const double h = (b - a) / panels;

  // Coarse pass to set the relative target.
  std::vector<double> x(2 * panels + 1), fx(2 * panels + 1);
  for (int i = 0; i <= 2 * panels; ++i) {
    x[i] = (i == 2 * panels) ? b : a + 0.5 * h * i;
    fx[i] = f(x[i]);
  }
  double coarse = 0.0;
  for (int p = 0; p < panels; ++p) {
    coarse += (x[2 * p + 2] - x[2 * p]) / 6.0 *
              (fx[2 * p] + 4.0 * fx[2 * p + 1] + fx[2 * p + 2]);
  }
  const double tol = std::max(opt.abs_tol, opt.rel_tol * std::abs(coarse));

  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double pa = x[2 * p];
    const double pb = x[2 * p + 2];
    const double whole = (pb - pa) / 6.0 * (fx[2 * p] + 4.0 * fx[2 * p + 1] + fx[2 * p + 2]);
    total += detail::simpson_recurse(f, pa, pb, fx[2 * p], fx[2 * p + 1], fx[2 * p + 2],
                                     whole, tol / panels, opt.max_depth);
  }
  if (!std::isfinite(total)) throw NumericalError("adaptive_simpson: non-finite integral");
  return total;
}

/// Quadrature over [a, b] with mandatory panel boundaries at `breakpoints`
/// (points outside (a, b) are ignored).
template <class F>
double integrate_piecewise(const F& f, double a, double b, std::span<const double> breakpoints,
                           QuadratureOptions opt = {}) {
  if (b <= a) return b == a ? 0.0 : -integrate_piecewise(f, b, a, breakpoints, opt);
  std::vector<double> cuts{a};
  for (double c : breakpoints) {
    if (c > a && c < b) cuts.push_back(c);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += adaptive_simpson(f, cuts[i], cuts[i + 1], opt);
  }
  return total;
}

}  // namespace shearlab
