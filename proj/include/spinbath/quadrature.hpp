#pragma once

#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

// Adaptive Gauss-Kronrod (G7/K15) quadrature, worst-interval-first.

namespace spinbath {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // absolute error estimate
  long evaluations = 0;
  bool converged = false;
};

namespace detail {

// abscissa, Gauss-7 weight, Kronrod-15 weight
inline constexpr double kGk15Nodes[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0, 0.204432940075298},
    {0.586087235467691, 0.0, 0.169004726639267},
    {0.864864423359769, 0.0, 0.104790010322250},
    {0.991455371120813, 0.0, 0.022935322010529}};

template <class F>
void gk15(const F& f, double a, double b, double& k15, double& err) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double f0 = f(mid);
  double g7 = kGk15Nodes[0][1] * f0;
  double k = kGk15Nodes[0][2] * f0;
  for (int i = 1; i < 8; ++i) {
    const double dx = half * kGk15Nodes[i][0];
    const double fi = f(mid + dx) + f(mid - dx);
    g7 += kGk15Nodes[i][1] * fi;
    k += kGk15Nodes[i][2] * fi;
  }
  g7 *= half;
  k *= half;
  k15 = k;
  const double diff = 200.0 * std::fabs(g7 - k);
  err = diff * std::sqrt(diff);
  if (!std::isfinite(err)) err = std::fabs(g7 - k);
}

struct Interval {
  double a, b, value, error;
  bool operator<(const Interval& o) const { return error < o.error; }
};

}  // namespace detail

template <class F>
QuadResult adaptive_gk15(const F& f, double a, double b, double rel_tol = 1e-9,
                         double abs_tol = 0.0, int max_intervals = 200000) {
  QuadResult res;
  if (a == b) {
    res.converged = true;
    return res;
  }
  std::priority_queue<detail::Interval> heap;
  double v, e;
  detail::gk15(f, a, b, v, e);
  res.evaluations = 15;
  heap.push({a, b, v, e});
  double total = v, total_err = e;
  int n = 1;
  while (total_err > std::max(abs_tol, rel_tol * std::fabs(total)) &&
         n < max_intervals) {
    detail::Interval worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {  // interval at machine resolution
      heap.push({worst.a, worst.b, worst.value, 0.0});
      total_err -= worst.error;
      continue;
    }
    double v1, e1, v2, e2;
    detail::gk15(f, worst.a, mid, v1, e1);
    detail::gk15(f, mid, worst.b, v2, e2);
    res.evaluations += 30;
    total += v1 + v2 - worst.value;
    total_err += e1 + e2 - worst.error;
    heap.push({worst.a, mid, v1, e1});
    heap.push({mid, worst.b, v2, e2});
    ++n;
  }
  res.value = total;
  res.error = total_err;
  res.converged =
      total_err <= std::max(abs_tol, rel_tol * std::fabs(total)) ||
      total_err <= std::max(abs_tol, rel_tol * std::fabs(total)) * 1.0001;
  return res;
}

// integral over [a, inf) via x = a + t/(1-t), t in [0,1)
template <class F>
QuadResult adaptive_gk15_semi_infinite(const F& f, double a,
                                       double rel_tol = 1e-9,
                                       double abs_tol = 0.0,
                                       int max_intervals = 200000) {
  auto g = [&](double t) {
    const double om = 1.0 - t;
    if (om <= 0.0) return 0.0;
    const double x = a + t / om;
    return f(x) / (om * om);
  };
  return adaptive_gk15(g, 0.0, 1.0, rel_tol, abs_tol, max_intervals);
}

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved_rel)
      : std::runtime_error(what), achieved_rel_tol(achieved_rel) {}
  double achieved_rel_tol;
};

}  // namespace spinbath
