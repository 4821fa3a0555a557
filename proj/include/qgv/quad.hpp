#pragma once

// Adaptive 1D quadrature (Gauss-Kronrod 15/7) used by the kernel smears and
// the spectral-continuation integrals. Header-only; both real and complex
// integrands.

#include <cmath>
#include <complex>
#include <functional>
#include <queue>
#include <stdexcept>
#include <vector>

namespace qgv {

namespace detail {
// 15-point Kronrod nodes/weights on [-1,1] with the embedded 7-point Gauss rule.
inline const double kGK15X[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769, -0.741531185599394,
    -0.586087235467691, -0.405845151377397, -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691, 0.741531185599394,
    0.864864423359769, 0.949107912342759, 0.991455371120813};
inline const double kGK15WK[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
inline const double kGK15WG[7] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469,
    0.381830050505119, 0.279705391489277, 0.129484966168870};
}  // namespace detail

template <typename T>
struct PanelResult {
  T integral{};
  double error = 0;
};

template <typename F, typename T = std::invoke_result_t<F, double>>
PanelResult<T> gk15_panel(F&& f, double a, double b) {
  const double h = (b - a) / 2, m = (a + b) / 2;
  T k{};
  T g{};
  for (int i = 0; i < 15; ++i) {
    const T v = f(m + h * detail::kGK15X[i]);
    k += detail::kGK15WK[i] * v;
    if (i % 2 == 1) g += detail::kGK15WG[i / 2] * v;
  }
  k *= h;
  g *= h;
  return {k, std::abs(k - g)};
}

// Adaptive bisection until |error| <= max(abs_tol, rel_tol * |integral|).
template <typename F, typename T = std::invoke_result_t<F, double>>
T integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-12,
                     double abs_tol = 0.0, int max_panels = 4000) {
  struct Seg { double a, b, err; T val; };
  auto cmp = [](const Seg& x, const Seg& y) { return x.err < y.err; };
  std::priority_queue<Seg, std::vector<Seg>, decltype(cmp)> heap(cmp);
  auto first = gk15_panel(f, a, b);
  heap.push({a, b, first.error, first.integral});
  T total = first.integral;
  double total_err = first.error;
  int panels = 1;
  while (total_err > std::max(abs_tol, rel_tol * std::abs(total)) && panels < max_panels) {
    Seg worst = heap.top();
    heap.pop();
    const double mid = (worst.a + worst.b) / 2;
    auto left = gk15_panel(f, worst.a, mid);
    auto right = gk15_panel(f, mid, worst.b);
    total += left.integral + right.integral - worst.val;
    total_err += left.error + right.error - worst.err;
    heap.push({worst.a, mid, left.error, left.integral});
    heap.push({mid, worst.b, right.error, right.integral});
    ++panels;
  }
  return total;
}

// \int_a^\infty f, by mapping t = a + u/(1-u) onto u in [0,1).
template <typename F, typename T = std::invoke_result_t<F, double>>
T integrate_to_infinity(F&& f, double a, double rel_tol = 1e-12, double abs_tol = 0.0) {
  auto g = [&](double u) {
    const double w = 1.0 - u;
    const double t = a + u / w;
    return f(t) / (w * w);
  };
  return integrate_adaptive(g, 0.0, 1.0 - 1e-14, rel_tol, abs_tol);
}

// Oscillatory semi-infinite integral: sums fixed-width panels until both the
// panel magnitude and an exponential-envelope bound drop below abs_tol.
template <typename F, typename T = std::invoke_result_t<F, double>>
T integrate_oscillatory(F&& f, double a, double panel_width, double abs_tol,
                        long max_panels = 2000000) {
  T total{};
  double x = a;
  int quiet = 0;
  for (long i = 0; i < max_panels; ++i) {
    auto p = gk15_panel(f, x, x + panel_width);
    total += p.integral;
    x += panel_width;
    if (std::abs(p.integral) < abs_tol) {
      if (++quiet >= 8) break;  // several consecutive negligible panels
    } else {
      quiet = 0;
    }
  }
  return total;
}

}  // namespace qgv
