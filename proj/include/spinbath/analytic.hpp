#pragma once

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinbath/constants.hpp"
#include "spinbath/quadrature.hpp"

// Closed-form and quadrature evaluation of the decay laws:
//   - dense static bath Gaussian rate
//   - configurational-average ("hopping") signal: exact integral, short-time
//     Gaussian limit, long-time tau^(2/3) law
//   - finite bath-T1 envelope
//
// The hopping signal obeys a shape universality: with beta = K tau / (2 d^3),
//   ln S = sigma d^2 * I(beta),
//   I(beta) = Int_0^2pi da Int_0^inf x dx [cos(beta g(x,a)) - 1],
//   g(x,a)  = (2 x^2 cos^2 a - x^2 - 2 sqrt(2) x cos a) / (x^2+1)^{5/2},
// so all of (sigma, depth, tau) enters through one scalar kernel I(beta).

namespace spinbath {

// Gamma_DEER for the dense static bath: (mu0/4pi) sqrt(3 pi sigma) gamma^2
// hbar / (8 d^2), in rad/us.
inline double gamma_deer_dense(double sigma, double depth_nm,
                               const PhysicalConstants& c) {
  if (!(sigma > 0.0) || !(depth_nm > 0.0))
    throw std::invalid_argument("gamma_deer_dense: sigma and depth must be > 0");
  return c.dipolar_constant() * std::sqrt(3.0 * kPi * sigma) /
         (8.0 * depth_nm * depth_nm);
}

// time at which the strong-coupling sphere of radius (K tau / 2pi)^{1/3}
// reaches the spin plane: tau_c = 2 pi d^3 / K
inline double crossover_time(double depth_nm, const PhysicalConstants& c) {
  if (!(depth_nm > 0.0))
    throw std::invalid_argument("crossover_time: depth must be > 0");
  return 2.0 * kPi * depth_nm * depth_nm * depth_nm / c.dipolar_constant();
}

// coefficient of the long-time law: 9 sqrt(pi) Gamma(11/6) / 5
inline double longtime_coefficient() {
  return 9.0 * std::sqrt(kPi) * std::tgamma(11.0 / 6.0) / 5.0;
}

namespace detail {

inline double hopping_shape(double x, double cos_a) {
  const double num =
      x * x * (2.0 * cos_a * cos_a - 1.0) - 2.0 * std::sqrt(2.0) * x * cos_a;
  const double t = x * x + 1.0;
  return num / (t * t * std::sqrt(t));
}

// radial integral Int_0^inf x [cos(beta g) - 1] dx at fixed azimuth.
// cos(y)-1 is evaluated as -2 sin^2(y/2) to avoid cancellation; the far zone
// x > 2 is mapped through u = x^-3, which makes the phase asymptotically
// linear in u and keeps the oscillation count ~ beta/16.
inline double hopping_radial(double beta, double cos_a, double rel_tol,
                             double abs_tol, int max_intervals) {
  auto near_f = [&](double x) {
    const double half = 0.5 * beta * hopping_shape(x, cos_a);
    const double s = std::sin(half);
    return -2.0 * x * s * s;
  };
  auto far_f = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double t = std::cbrt(u);
    const double x = 1.0 / t;
    const double half = 0.5 * beta * hopping_shape(x, cos_a);
    const double s = std::sin(half);
    return -2.0 / 3.0 * s * s / (u * t * t);  // u^{-5/3} sin^2
  };
  const QuadResult near = adaptive_gk15(near_f, 0.0, 2.0, rel_tol,
                                        0.5 * abs_tol, max_intervals);
  const QuadResult far = adaptive_gk15(far_f, 0.0, 0.125, rel_tol,
                                       0.5 * abs_tol, max_intervals);
  return near.value + far.value;
}

}  // namespace detail

// I(beta) by direct quadrature. The azimuthal integrand develops a
// |cos 2a|^{2/3} cusp at a = pi/4, 3pi/4 in the long-time regime, so the
// azimuth is integrated in four segments with a cube-root substitution
// anchored at each cusp, which renders every segment smooth.
inline QuadResult hopping_integral(double beta, double rel_tol = 1e-6,
                                   int max_intervals = 40000) {
  if (!(beta >= 0.0))
    throw std::invalid_argument("hopping_integral: beta must be >= 0");
  QuadResult out;
  if (beta == 0.0) {
    out.converged = true;
    return out;
  }
  const double scale = std::max(1.0, std::cbrt(beta * beta));
  const double inner_rel = 0.05 * rel_tol;
  const double inner_abs = 1e-6 * rel_tol * scale;
  auto azimuth = [&](double a) {
    return detail::hopping_radial(beta, std::cos(a), inner_rel, inner_abs,
                                  max_intervals);
  };

  const double cusps[2] = {kPi / 4.0, 3.0 * kPi / 4.0};
  const double seg_ends[2][2] = {{0.0, kPi / 2.0}, {kPi / 2.0, kPi}};
  double value = 0.0, error = 0.0;
  long evals = 0;
  for (int ci = 0; ci < 2; ++ci) {
    for (int side = 0; side < 2; ++side) {
      const double a0 = cusps[ci];
      const double a1 = seg_ends[ci][side];
      const double span = a1 - a0;  // signed; a = a0 + sign*w^3
      const double wmax = std::cbrt(std::fabs(span));
      const double sgn = span >= 0.0 ? 1.0 : -1.0;
      auto seg = [&](double w) {
        const double a = a0 + sgn * w * w * w;
        return 3.0 * w * w * azimuth(a);
      };
      QuadResult q = adaptive_gk15(seg, 0.0, wmax, 0.25 * rel_tol,
                                   2e-3 * rel_tol * scale, 4000);
      value += q.value;
      error += q.error;
      evals += q.evaluations;
    }
  }
  out.value = 2.0 * value;
  out.error = 2.0 * error + std::fabs(out.value) * inner_rel;
  out.evaluations = evals;
  out.converged = out.error <= rel_tol * std::fabs(out.value);
  return out;
}

// Cached kernel: I(beta) tabulated on a log grid with monotone cubic
// interpolation of ln(-I) vs ln(beta); series below the grid, asymptote with
// a constant correction above it. Build cost is paid once per process.
class HoppingKernel {
 public:
  static const HoppingKernel& instance() {
    static HoppingKernel k;
    return k;
  }

  // returns I(beta) <= 0
  double operator()(double beta) const {
    if (!(beta >= 0.0))
      throw std::invalid_argument("HoppingKernel: beta must be >= 0");
    if (beta == 0.0) return 0.0;
    if (beta <= beta_lo_) return -kShortCoeff * beta * beta;
    if (beta >= beta_hi_)
      return -(longtime_coefficient() * std::cbrt(beta * beta) + tail_offset_);
    const double t = std::log(beta);
    return -std::exp(interp(t));
  }

  double beta_min() const { return beta_lo_; }
  double beta_max() const { return beta_hi_; }

 private:
  static constexpr double kShortCoeff = 3.0 * kPi / 16.0;

  HoppingKernel() {
    const double lo = 1e-4, hi = 1e4;
    const int per_decade = 24;
    const int n = static_cast<int>(std::round(std::log10(hi / lo) * per_decade)) + 1;
    t_.resize(n);
    y_.resize(n);
    const double dt = (std::log(hi) - std::log(lo)) / (n - 1);
    for (int i = 0; i < n; ++i) {
      t_[i] = std::log(lo) + i * dt;
      const double beta = std::exp(t_[i]);
      const double rel = beta > 10.0 ? 1e-7 : 3e-8;
      y_[i] = std::log(-hopping_integral(beta, rel).value);
    }
    build_slopes();
    beta_lo_ = lo;
    beta_hi_ = hi;
    tail_offset_ = std::exp(y_.back()) -
                   longtime_coefficient() * std::cbrt(beta_hi_ * beta_hi_);
  }

  // Fritsch-Carlson monotone cubic slopes
  void build_slopes() {
    const int n = static_cast<int>(t_.size());
    m_.assign(n, 0.0);
    std::vector<double> d(n - 1);
    for (int i = 0; i < n - 1; ++i) d[i] = (y_[i + 1] - y_[i]) / (t_[i + 1] - t_[i]);
    m_[0] = d[0];
    m_[n - 1] = d[n - 2];
    for (int i = 1; i < n - 1; ++i) {
      if (d[i - 1] * d[i] <= 0.0)
        m_[i] = 0.0;
      else
        m_[i] = 2.0 * d[i - 1] * d[i] / (d[i - 1] + d[i]);  // harmonic mean
    }
  }

  double interp(double t) const {
    const int n = static_cast<int>(t_.size());
    int i = static_cast<int>((t - t_[0]) / (t_[1] - t_[0]));
    i = std::clamp(i, 0, n - 2);
    const double h = t_[i + 1] - t_[i];
    const double s = (t - t_[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y_[i] + (s3 - 2 * s2 + s) * h * m_[i] +
           (-2 * s3 + 3 * s2) * y_[i + 1] + (s3 - s2) * h * m_[i + 1];
  }

  std::vector<double> t_, y_, m_;
  double beta_lo_ = 0.0, beta_hi_ = 0.0, tail_offset_ = 0.0;
};

inline double hopping_beta(double tau_us, double depth_nm,
                           const PhysicalConstants& c) {
  return c.dipolar_constant() * tau_us /
         (2.0 * depth_nm * depth_nm * depth_nm);
}

// exact configurational-average signal by direct quadrature
inline double hopping_signal_exact(double sigma, double depth_nm, double tau_us,
                                   const PhysicalConstants& c,
                                   double rel_tol = 1e-6) {
  if (!(sigma > 0.0) || !(depth_nm > 0.0) || !(tau_us >= 0.0))
    throw std::invalid_argument("hopping_signal_exact: bad parameters");
  const double beta = hopping_beta(tau_us, depth_nm, c);
  const QuadResult q = hopping_integral(beta, rel_tol);
  if (!q.converged)
    throw QuadratureError(
        "hopping_signal_exact: quadrature did not converge; achieved relative "
        "tolerance " +
            std::to_string(q.value != 0.0 ? q.error / std::fabs(q.value) : q.error),
        q.value != 0.0 ? q.error / std::fabs(q.value) : q.error);
  return std::exp(sigma * depth_nm * depth_nm * q.value);
}

// same law through the cached kernel; used inside fits and sweeps
inline double hopping_signal_model(double sigma, double depth_nm, double tau_us,
                                   const PhysicalConstants& c) {
  const double beta = hopping_beta(tau_us, depth_nm, c);
  return std::exp(sigma * depth_nm * depth_nm *
                  HoppingKernel::instance()(beta));
}

// short-time Gaussian limit, equivalent to exp(-(Gamma_DEER tau)^2)
inline double hopping_signal_shorttime(double sigma, double depth_nm,
                                       double tau_us,
                                       const PhysicalConstants& c) {
  const double beta = hopping_beta(tau_us, depth_nm, c);
  return std::exp(-3.0 * kPi * sigma * depth_nm * depth_nm / 16.0 * beta *
                  beta);
}

// long-time 2D law; depth does not enter
inline double hopping_signal_longtime(double sigma, double tau_us,
                                      const PhysicalConstants& c) {
  if (!(sigma > 0.0) || !(tau_us > 0.0))
    throw std::invalid_argument("hopping_signal_longtime: bad parameters");
  const double kt = 0.5 * c.dipolar_constant() * tau_us;
  return std::exp(-longtime_coefficient() * sigma * std::cbrt(kt * kt));
}

// f(tau, T1) = (2 T1^2 / tau^2) (tau/T1 - 1 + exp(-tau/T1)), evaluated
// cancellation-free; -> 1 as tau/T1 -> 0 and -> 2 T1/tau as tau/T1 -> inf.
inline double finite_t1_factor(double tau_us, double t1_us) {
  if (!(t1_us > 0.0)) throw std::invalid_argument("finite_t1_factor: t1 <= 0");
  if (!(tau_us >= 0.0)) throw std::invalid_argument("finite_t1_factor: tau < 0");
  const double z = tau_us / t1_us;
  if (z < 1e-8) return 1.0 - z / 3.0;
  return 2.0 * (z + std::expm1(-z)) / (z * z);
}

inline double finite_t1_signal(double gamma_deer, double tau_us, double t1_us) {
  if (!(gamma_deer > 0.0))
    throw std::invalid_argument("finite_t1_signal: gamma must be > 0");
  const double gt = gamma_deer * tau_us;
  return std::exp(-gt * gt * finite_t1_factor(tau_us, t1_us));
}

// parameterized decay-law evaluator (for overlays and model fits)
struct DecayModel {
  enum class Kind {
    DenseStatic,
    HoppingExact,
    HoppingShortTime,
    HoppingLongTime,
    FiniteT1
  };
  Kind kind = Kind::HoppingExact;
  double sigma = 0.0;       // nm^-2
  double depth_nm = 0.0;    // nm
  double gamma_deer = 0.0;  // rad/us (FiniteT1)
  double t1_us = 0.0;       // us (FiniteT1)

  double operator()(double tau_us, const PhysicalConstants& c) const {
    switch (kind) {
      case Kind::DenseStatic: {
        const double gt = gamma_deer_dense(sigma, depth_nm, c) * tau_us;
        return std::exp(-gt * gt);
      }
      case Kind::HoppingExact:
        return hopping_signal_model(sigma, depth_nm, tau_us, c);
      case Kind::HoppingShortTime:
        return hopping_signal_shorttime(sigma, depth_nm, tau_us, c);
      case Kind::HoppingLongTime:
        return hopping_signal_longtime(sigma, tau_us, c);
      case Kind::FiniteT1:
        return finite_t1_signal(gamma_deer, tau_us, t1_us);
    }
    throw std::logic_error("DecayModel: unknown kind");
  }
};

}  // namespace spinbath
