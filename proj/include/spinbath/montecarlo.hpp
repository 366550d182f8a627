#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <thread>
#include <vector>

#include "spinbath/analytic.hpp"
#include "spinbath/bath.hpp"
#include "spinbath/constants.hpp"
#include "spinbath/curve.hpp"
#include "spinbath/rng.hpp"

// Stochastic simulation of the DEER free-induction signal for the four bath
// dynamics models. Echo accounting: with a perfect simultaneous pi pulse on
// sensor and bath at tau/2, the net phase from spin i is J_i * Int_0^tau
// I_i(t) dt (the deliberate inversion cancels against the echo sign reversal,
// also when I_i(t) flips stochastically), so a static spin contributes
// J_i I_i tau.
//
// Every shot derives its own random stream from (seed, op, tau index, shot
// index); sums are accumulated in fixed-size blocks combined in index order,
// so results are bit-identical for any thread count.

namespace spinbath {

enum class Dynamics { Static, Hopping, StaticWithT1, FlipFlop };

struct SimulationPlan {
  std::vector<double> tau;  // us, strictly increasing, positive
  std::uint64_t shots = 10000;
  Dynamics dynamics = Dynamics::Hopping;
  BathParameters bath;
  SensorGeometry geometry;
  PhysicalConstants constants;
  double dt_us = 0.0;  // FlipFlop step; 0 = auto
  std::uint64_t seed = 1;
  int threads = 1;

  void validate() const {
    if (shots < 1) throw std::invalid_argument("plan: shots must be >= 1");
    if (tau.empty()) throw std::invalid_argument("plan: empty tau grid");
    double prev = 0.0;
    for (double t : tau) {
      if (!(t > prev))
        throw std::invalid_argument(
            "plan: tau grid must be strictly increasing and positive");
      prev = t;
    }
    bath.validate();
    geometry.validate();
  }
};

namespace detail {

constexpr std::uint64_t kTagStatic = 0x5331;
constexpr std::uint64_t kTagHopping = 0x5332;
constexpr std::uint64_t kTagT1 = 0x5333;
constexpr std::uint64_t kTagFlipFlopCfg = 0x5334;
constexpr std::uint64_t kTagFlipFlopShot = 0x5335;
constexpr std::uint64_t kTagSurvey = 0x5336;

constexpr std::uint64_t kShotBlock = 4096;

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

// per-shot values reduced blockwise in fixed order; fn(shot) -> value
template <class Fn>
MeanStderr shot_average(std::uint64_t shots, int threads, const Fn& fn) {
  const std::uint64_t nblocks = (shots + kShotBlock - 1) / kShotBlock;
  std::vector<double> bsum(nblocks, 0.0), bsq(nblocks, 0.0);
  auto run_block = [&](std::uint64_t b) {
    const std::uint64_t lo = b * kShotBlock;
    const std::uint64_t hi = std::min(shots, lo + kShotBlock);
    double s = 0.0, s2 = 0.0;
    for (std::uint64_t i = lo; i < hi; ++i) {
      const double v = fn(i);
      s += v;
      s2 += v * v;
    }
    bsum[b] = s;
    bsq[b] = s2;
  };
  if (threads <= 1 || nblocks == 1) {
    for (std::uint64_t b = 0; b < nblocks; ++b) run_block(b);
  } else {
    std::atomic<std::uint64_t> next{0};
    const int nw = std::min<std::uint64_t>(threads, nblocks);
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (int w = 0; w < nw; ++w)
      pool.emplace_back([&] {
        for (std::uint64_t b = next.fetch_add(1); b < nblocks;
             b = next.fetch_add(1))
          run_block(b);
      });
    for (auto& t : pool) t.join();
  }
  double sum = 0.0, sumsq = 0.0;
  for (std::uint64_t b = 0; b < nblocks; ++b) {
    sum += bsum[b];
    sumsq += bsq[b];
  }
  const double n = static_cast<double>(shots);
  const double mean = sum / n;
  double var = 0.0;
  if (shots > 1) var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

inline std::vector<double> couplings_for(const SpinConfiguration& cfg,
                                         const SensorGeometry& geom,
                                         const PhysicalConstants& c) {
  std::vector<double> j(cfg.size());
  for (std::size_t i = 0; i < cfg.size(); ++i)
    j[i] = coupling(cfg.r[i], cfg.alpha[i], geom, c);
  return j;
}

}  // namespace detail

// exact state average for a fixed configuration: Prod_i cos(J_i tau)
inline SignalCurve static_exact(const SpinConfiguration& cfg,
                                const std::vector<double>& tau,
                                const SensorGeometry& geom,
                                const PhysicalConstants& c) {
  const std::vector<double> j = detail::couplings_for(cfg, geom, c);
  SignalCurve out;
  out.tau = tau;
  out.value.reserve(tau.size());
  out.stderr_.assign(tau.size(), 0.0);
  for (double t : tau) {
    double prod = 1.0;
    for (double ji : j) prod *= std::cos(ji * t);
    out.value.push_back(prod);
  }
  return out;
}

// Monte Carlo over random +-1 states, positions frozen
inline SignalCurve simulate_static(const SpinConfiguration& cfg,
                                   const SimulationPlan& plan) {
  plan.validate();
  const std::vector<double> j =
      detail::couplings_for(cfg, plan.geometry, plan.constants);
  SignalCurve out;
  out.tau = plan.tau;
  for (std::size_t ti = 0; ti < plan.tau.size(); ++ti) {
    const double tau = plan.tau[ti];
    auto one = detail::shot_average(
        plan.shots, plan.threads, [&](std::uint64_t shot) {
          Stream s(plan.seed, detail::kTagStatic, ti, shot);
          double phase = 0.0;
          for (double ji : j) phase += ji * s.sign() * tau;
          return std::cos(phase);
        });
    out.value.push_back(one.mean);
    out.stderr_.push_back(one.stderr_);
  }
  return out;
}

// configurational averaging: positions and states redrawn every shot
inline SignalCurve simulate_hopping(const SimulationPlan& plan) {
  plan.validate();
  const double depth = plan.geometry.depth_nm;
  const double radius = effective_radius(plan.bath, depth);
  const double mean_count = plan.bath.sigma * kPi * radius * radius;
  if (mean_count > static_cast<double>(plan.bath.max_spins))
    throw std::invalid_argument("simulate_hopping: spin count exceeds max_spins");
  const double k2 = 0.5 * plan.constants.dipolar_constant();
  const double sqrt8 = 2.0 * std::sqrt(2.0);
  const double d2 = depth * depth;

  SignalCurve out;
  out.tau = plan.tau;
  for (std::size_t ti = 0; ti < plan.tau.size(); ++ti) {
    const double tau = plan.tau[ti];
    auto one = detail::shot_average(
        plan.shots, plan.threads, [&](std::uint64_t shot) {
          Stream s(plan.seed, detail::kTagHopping, ti, shot);
          const std::uint64_t n = s.poisson(mean_count);
          double phase = 0.0;
          for (std::uint64_t i = 0; i < n; ++i) {
            const double r = radius * std::sqrt(s.uniform());
            const double ca = std::cos(2.0 * kPi * s.uniform());
            const double r2 = r * r;
            const double num =
                r2 * (2.0 * ca * ca - 1.0) - sqrt8 * r * depth * ca;
            const double t = r2 + d2;
            const double jj = k2 * num / (t * t * std::sqrt(t));
            phase += jj * s.sign() * tau;
          }
          return std::cos(phase);
        });
    out.value.push_back(one.mean);
    out.stderr_.push_back(one.stderr_);
  }
  return out;
}

// frozen positions, each spin an independent random telegraph with flip rate
// 1/(2 T1); exact exponential waiting times (no time-step bias)
inline SignalCurve simulate_static_with_t1(const SpinConfiguration& cfg,
                                           const SimulationPlan& plan,
                                           double t1_us) {
  plan.validate();
  if (!(t1_us > 0.0))
    throw std::invalid_argument("simulate_static_with_t1: t1 must be > 0");
  const std::vector<double> j =
      detail::couplings_for(cfg, plan.geometry, plan.constants);
  const bool finite = std::isfinite(t1_us);
  const double mean_wait = 2.0 * t1_us;

  SignalCurve out;
  out.tau = plan.tau;
  for (std::size_t ti = 0; ti < plan.tau.size(); ++ti) {
    const double tau = plan.tau[ti];
    auto one = detail::shot_average(
        plan.shots, plan.threads, [&](std::uint64_t shot) {
          Stream s(plan.seed, detail::kTagT1, ti, shot);
          double phase = 0.0;
          for (double ji : j) {
            int spin = s.sign();
            double integral = 0.0;
            if (!finite) {
              integral = spin * tau;
            } else {
              double t = 0.0;
              while (t < tau) {
                const double w = s.exponential(mean_wait);
                integral += spin * std::min(w, tau - t);
                t += w;
                spin = -spin;
              }
            }
            phase += ji * integral;
          }
          return std::cos(phase);
        });
    out.value.push_back(one.mean);
    out.stderr_.push_back(one.stderr_);
  }
  return out;
}

namespace detail {

struct PairRate {
  std::uint32_t i, j;
  double p;  // per-step exchange probability
};

// geometric waiting time in steps for per-step probability p
inline std::uint64_t geometric_steps(Stream& s, double p,
                                     std::uint64_t never) {
  if (p <= 0.0) return never;
  if (p >= 1.0) return 1;
  const double u = s.uniform_pos();
  const double k = std::floor(std::log(u) / std::log1p(-p));
  if (!(k < static_cast<double>(never))) return never;
  return 1 + static_cast<std::uint64_t>(k);
}

}  // namespace detail

struct FlipFlopResult {
  std::vector<SignalCurve> curves;       // one per configuration
  std::vector<SpinConfiguration> configs;
  std::vector<double> dt_us;             // per configuration
};

// Incoherent bath-bath exchange: per step, pair (i,j) swaps with probability
// p_ij = w_ij^2 dt / gamma, and each spin flips with probability dt/(2 T1).
// State is piecewise constant, so steps between events are skipped with
// geometric waiting times; the whole curve is read off one trajectory per
// shot. Per-step probabilities are capped at 0.45 (< 1) with dt floored so
// that a rare near-contact pair cannot stall the walk; such a pair is already
// in the fast-exchange regime where the cap does not change the physics.
inline FlipFlopResult simulate_flipflop(const SimulationPlan& plan,
                                        std::size_t n_configs = 100) {
  plan.validate();
  if (!(plan.bath.disorder_gamma > 0.0))
    throw std::invalid_argument("simulate_flipflop: disorder_gamma must be > 0");
  const double gamma = plan.bath.disorder_gamma;
  const double t1 = plan.bath.t1_us;
  const double tau_max = plan.tau.back();

  FlipFlopResult result;
  result.curves.reserve(n_configs);
  result.configs.reserve(n_configs);

  for (std::size_t ci = 0; ci < n_configs; ++ci) {
    Stream cfg_stream(plan.seed, detail::kTagFlipFlopCfg, ci, 0);
    const SpinConfiguration cfg = sample_configuration(
        plan.bath, plan.geometry.depth_nm, cfg_stream);
    const std::size_t n = cfg.size();
    const std::vector<double> j =
        detail::couplings_for(cfg, plan.geometry, plan.constants);

    // all-to-all bath couplings
    std::vector<detail::PairRate> pairs;
    double max_w2 = 0.0;
    std::vector<double> px(n), py(n);
    for (std::size_t i = 0; i < n; ++i) {
      px[i] = cfg.r[i] * std::cos(cfg.alpha[i]);
      py[i] = cfg.r[i] * std::sin(cfg.alpha[i]);
    }
    for (std::size_t a = 0; a + 1 < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) {
        const double dx = px[b] - px[a], dy = py[b] - py[a];
        const double dist = std::hypot(dx, dy);
        const double w =
            bath_pair_coupling(dist, std::atan2(dy, dx), plan.constants);
        max_w2 = std::max(max_w2, w * w);
        pairs.push_back({static_cast<std::uint32_t>(a),
                         static_cast<std::uint32_t>(b), w * w});
      }

    double dt = plan.dt_us;
    if (dt <= 0.0) {
      dt = max_w2 > 0.0 ? 0.1 * gamma / max_w2 : tau_max;
      dt = std::max(dt, tau_max / 500000.0);
    }
    dt = std::min(dt, tau_max);
    if (std::isfinite(t1) && dt / (2.0 * t1) >= 1.0)
      throw std::invalid_argument("simulate_flipflop: dt violates p < 1 for T1");
    for (auto& pr : pairs) {
      double p = pr.p * dt / gamma;
      if (plan.dt_us > 0.0 && p >= 1.0)
        throw std::invalid_argument(
            "simulate_flipflop: dt violates p_ij < 1; reduce dt");
      pr.p = std::min(p, 0.45);
    }
    const double p_spin =
        std::isfinite(t1) ? dt / (2.0 * t1) : 0.0;
    const std::uint64_t total_steps =
        static_cast<std::uint64_t>(std::ceil(tau_max / dt)) + 1;

    const std::size_t n_sources = n + pairs.size();
    using Event = std::pair<std::uint64_t, std::uint32_t>;  // (step, source)
    const std::size_t npts = plan.tau.size();
    std::vector<double> sums(npts, 0.0), sqs(npts, 0.0);
    std::vector<double> vals(npts);
    std::vector<int> spin(n);

    for (std::uint64_t shot = 0; shot < plan.shots; ++shot) {
      Stream s(plan.seed, detail::kTagFlipFlopShot, ci, shot);
      double rate = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        spin[i] = s.sign();
        rate += j[i] * spin[i];
      }
      std::priority_queue<Event, std::vector<Event>, std::greater<Event>> heap;
      for (std::uint32_t src = 0; src < n_sources; ++src) {
        const double p = src < n ? p_spin : pairs[src - n].p;
        const std::uint64_t st = detail::geometric_steps(s, p, total_steps + 1);
        if (st <= total_steps) heap.push({st, src});
      }
      double phase = 0.0, t_cur = 0.0;
      std::size_t m = 0;
      while (m < npts) {
        double t_next_event = tau_max + dt;
        bool have_event = !heap.empty();
        if (have_event)
          t_next_event = static_cast<double>(heap.top().first) * dt;
        while (m < npts && plan.tau[m] <= t_next_event) {
          vals[m] = std::cos(phase + rate * (plan.tau[m] - t_cur));
          ++m;
        }
        if (m >= npts || !have_event) {
          // state never changes again; emit the rest with the final rate
          for (; m < npts; ++m)
            vals[m] = std::cos(phase + rate * (plan.tau[m] - t_cur));
          break;
        }
        const auto [step, src] = heap.top();
        heap.pop();
        const double t_ev = static_cast<double>(step) * dt;
        phase += rate * (t_ev - t_cur);
        t_cur = t_ev;
        if (src < n) {
          rate -= 2.0 * j[src] * spin[src];
          spin[src] = -spin[src];
        } else {
          const auto& pr = pairs[src - n];
          if (spin[pr.i] != spin[pr.j]) {
            rate += (j[pr.i] - j[pr.j]) * (spin[pr.j] - spin[pr.i]);
            std::swap(spin[pr.i], spin[pr.j]);
          }
        }
        const double p = src < n ? p_spin : pairs[src - n].p;
        const std::uint64_t nxt =
            step + detail::geometric_steps(s, p, total_steps + 1);
        if (nxt <= total_steps) heap.push({nxt, src});
      }
      for (std::size_t k = 0; k < npts; ++k) {
        sums[k] += vals[k];
        sqs[k] += vals[k] * vals[k];
      }
    }

    SignalCurve curve;
    curve.tau = plan.tau;
    curve.value.resize(npts);
    curve.stderr_.resize(npts);
    const double ns = static_cast<double>(plan.shots);
    for (std::size_t k = 0; k < npts; ++k) {
      const double mean = sums[k] / ns;
      double var = 0.0;
      if (plan.shots > 1)
        var = std::max(0.0, (sqs[k] - ns * mean * mean) / (ns - 1.0));
      curve.value[k] = mean;
      curve.stderr_[k] = std::sqrt(var / ns);
    }
    result.curves.push_back(std::move(curve));
    result.configs.push_back(cfg);
    result.dt_us.push_back(dt);
  }
  return result;
}

struct SurveyOptions {
  double contrast_threshold = -0.1;
  std::size_t tau_points = 160;
  std::uint64_t seed = 1;
};

// Places the stationary sub-population once per trial and asks whether the
// expected DEER contrast, Prod_i cos(J_i tau) times the hopping envelope of
// the remaining spins, dips below the threshold anywhere in the observable
// window (out to where the full-density Gaussian envelope is ~e^-9).
inline double stationary_fraction_survey(
    double fraction, double sigma,
    const std::function<double(Stream&)>& depth_sampler, std::size_t trials,
    const PhysicalConstants& c, const SurveyOptions& opts = {}) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw std::invalid_argument("survey: fraction must be in [0,1]");
  if (!(sigma >= 0.0)) throw std::invalid_argument("survey: sigma must be >= 0");
  if (sigma == 0.0 || trials == 0) return 0.0;

  std::size_t strong = 0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    Stream s(opts.seed, detail::kTagSurvey, trial, 0);
    const double depth = depth_sampler(s);
    const SensorGeometry geom(depth);
    BathParameters stat_bath;
    stat_bath.sigma = fraction * sigma;
    stat_bath.radius_nm = default_radius(sigma, depth);
    const SpinConfiguration cfg = sample_configuration(stat_bath, depth, s);
    const std::vector<double> j = detail::couplings_for(cfg, geom, c);

    const double tau_max = 3.0 / gamma_deer_dense(sigma, depth, c);
    const double tau_min = tau_max / 3000.0;
    const double hop_sigma = (1.0 - fraction) * sigma;
    const double lstep =
        std::log(tau_max / tau_min) / static_cast<double>(opts.tau_points - 1);
    bool dipped = false;
    for (std::size_t k = 0; k < opts.tau_points && !dipped; ++k) {
      const double tau = tau_min * std::exp(lstep * static_cast<double>(k));
      double sig = hop_sigma > 0.0
                       ? hopping_signal_model(hop_sigma, depth, tau, c)
                       : 1.0;
      for (double ji : j) sig *= std::cos(ji * tau);
      if (sig < opts.contrast_threshold) dipped = true;
    }
    if (dipped) ++strong;
  }
  return static_cast<double>(strong) / static_cast<double>(trials);
}

}  // namespace spinbath
