#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinbath/constants.hpp"
#include "spinbath/quadrature.hpp"

// Pulse-sequence filter functions and the overlap integral
//   chi(T) = (1/pi) Int_0^inf S(w) F(w T) / w^2 dw,   C(T) = exp(-chi).

namespace spinbath {

enum class FilterKind { Ramsey, SpinEcho, NPulse, DeerDivided };

struct FilterSpec {
  FilterKind kind = FilterKind::Ramsey;
  int n_pulses = 1;

  void validate() const {
    if (kind == FilterKind::NPulse && n_pulses < 1)
      throw std::invalid_argument("FilterSpec: n_pulses must be >= 1");
  }
};

namespace detail {

// sin(N phi)/cos(phi) with the removable singularity at cos(phi) = 0 (N even)
// bridged by the l'Hopital form N cos(N phi) / (-sin(phi)).
inline double npulse_ratio(int n, double phi) {
  const double c = std::cos(phi);
  if (std::fabs(c) > 1e-7) return std::sin(n * phi) / c;
  return -n * std::cos(n * phi) / std::sin(phi);
}

}  // namespace detail

// F(x) with x = omega * T (total precession time)
inline double filter_function(const FilterSpec& spec, double x) {
  spec.validate();
  if (!(x >= 0.0)) throw std::invalid_argument("filter_function: x must be >= 0");
  switch (spec.kind) {
    case FilterKind::Ramsey: {
      const double s = std::sin(0.5 * x);
      return 2.0 * s * s;
    }
    case FilterKind::SpinEcho: {
      const double s = std::sin(0.25 * x);
      return 8.0 * s * s * s * s;
    }
    case FilterKind::NPulse: {
      const int n = spec.n_pulses;
      const double phi = 0.5 * x / n;
      const double s4 = std::sin(0.5 * phi);
      const double ratio = detail::npulse_ratio(n, phi);
      return 8.0 * s4 * s4 * s4 * s4 * ratio * ratio;
    }
    case FilterKind::DeerDivided: {
      const double sr = std::sin(0.5 * x);
      const double se = std::sin(0.25 * x);
      return 2.0 * sr * sr - 8.0 * se * se * se * se;
    }
  }
  throw std::logic_error("filter_function: unknown kind");
}

namespace detail {

inline double filter_period(const FilterSpec& spec) {
  switch (spec.kind) {
    case FilterKind::Ramsey:
      return 2.0 * kPi;
    case FilterKind::SpinEcho:
    case FilterKind::DeerDivided:
      return 4.0 * kPi;
    case FilterKind::NPulse:
      return 4.0 * kPi * spec.n_pulses;
  }
  return 2.0 * kPi;
}

// mean of F over one period; Ramsey -> 1, SpinEcho -> 3, DeerDivided -> -2
inline double filter_mean(const FilterSpec& spec) {
  switch (spec.kind) {
    case FilterKind::Ramsey:
      return 1.0;
    case FilterKind::SpinEcho:
      return 3.0;
    case FilterKind::DeerDivided:
      return -2.0;
    case FilterKind::NPulse: {
      const double period = filter_period(spec);
      const QuadResult q = adaptive_gk15(
          [&](double x) { return filter_function(spec, x); }, 0.0, period,
          1e-10, 1e-12);
      return q.value / period;
    }
  }
  return 1.0;
}

}  // namespace detail

class SpectrumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// chi(T) for a spectrum S(omega) >= 0 (two-sided density convention:
// white noise S0 through the Ramsey filter gives chi = S0 T / 2).
//
// The head [0, X0] is integrated adaptively; past X0 the integral proceeds
// period by period, and once the oscillatory residual (chunk minus its
// running mean through mean(F)) is negligible the smooth tail
// Int S(x/T) mean(F) / x^2 dx is added in closed quadrature via u = 1/x.
template <class SpectrumFn>
double chi_from_spectrum(const SpectrumFn& spectrum, const FilterSpec& spec,
                         double total_time, double rel_tol = 1e-6) {
  spec.validate();
  if (!(total_time > 0.0))
    throw std::invalid_argument("chi_from_spectrum: T must be > 0");
  const double period = detail::filter_period(spec);
  const double fbar = detail::filter_mean(spec);

  auto integrand = [&](double x) {
    if (x <= 0.0) return 0.0;
    return spectrum(x / total_time) * filter_function(spec, x) / (x * x);
  };
  auto mean_integrand = [&](double x) {
    return spectrum(x / total_time) * fbar / (x * x);
  };

  const double x0 = 4.0 * period;
  QuadResult head = adaptive_gk15(integrand, 0.0, x0, 0.1 * rel_tol, 1e-300);
  if (!std::isfinite(head.value) || !head.converged)
    throw SpectrumError(
        "chi_from_spectrum: head integral did not converge (non-integrable "
        "spectrum?)");

  double acc = head.value;
  double x = x0;
  double residual = std::numeric_limits<double>::infinity();
  const int max_chunks = 4000;
  for (int k = 0; k < max_chunks && residual > 0.05 * rel_tol * std::fabs(acc);
       ++k) {
    const QuadResult chunk =
        adaptive_gk15(integrand, x, x + period, 1e-8, 1e-300);
    const QuadResult mean_chunk =
        adaptive_gk15(mean_integrand, x, x + period, 1e-8, 1e-300);
    if (!std::isfinite(chunk.value))
      throw SpectrumError("chi_from_spectrum: divergent tail chunk");
    acc += chunk.value;
    x += period;
    residual = std::fabs(chunk.value - mean_chunk.value);
  }
  // smooth tail from x to infinity through u = 1/x
  const QuadResult tail = adaptive_gk15(
      [&](double u) {
        if (u <= 0.0) return 0.0;
        return spectrum(1.0 / (u * total_time)) * fbar;
      },
      0.0, 1.0 / x, 1e-8, 1e-300);
  acc += tail.value;
  return total_time / kPi * acc;
}

inline double coherence_from_spectrum(
    const std::function<double(double)>& spectrum, const FilterSpec& spec,
    double total_time, double rel_tol = 1e-6) {
  return std::exp(-chi_from_spectrum(spectrum, spec, total_time, rel_tol));
}

// one decoupling measurement: N-pulse sequence of total precession time T
// with observed coherence C
struct CoherencePoint {
  int n_pulses = 1;
  double total_time = 0.0;  // us
  double coherence = 1.0;
};

struct SpectrumSample {
  double omega = 0.0;  // rad/us, filter peak
  double value = 0.0;  // spectral density at omega
};

// invert chi ~ T S(omega)/pi at the filter's principal peak omega = pi N / T
inline std::vector<SpectrumSample> spectral_decompose(
    const std::vector<CoherencePoint>& points) {
  std::vector<SpectrumSample> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!(p.coherence > 0.0))
      throw std::invalid_argument("spectral_decompose: C <= 0 at point " +
                                  std::to_string(i));
    if (!(p.total_time > 0.0) || p.n_pulses < 1)
      throw std::invalid_argument("spectral_decompose: bad point " +
                                  std::to_string(i));
    const double chi = -std::log(std::min(p.coherence, 1.0));
    out.push_back({kPi * p.n_pulses / p.total_time,
                   kPi * chi / p.total_time});
  }
  return out;
}

}  // namespace spinbath
