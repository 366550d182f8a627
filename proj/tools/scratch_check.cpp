#include <chrono>
#include <cstdio>

#include "spinbath/analytic.hpp"
#include "spinbath/bath.hpp"
#include "spinbath/constants.hpp"
#include "spinbath/filters.hpp"
#include "spinbath/montecarlo.hpp"

using namespace spinbath;

int main() {
  PhysicalConstants c;
  std::printf("K = %.6f rad nm^3/us, K/2pi = %.4f MHz nm^3\n",
              c.dipolar_constant(), c.dipolar_constant() / (2 * kPi));
  std::printf("tau_c(5nm) = %.4f us\n", crossover_time(5.0, c));
  std::printf("longtime coeff = %.6f\n", longtime_coefficient());

  // direct integral vs limits
  for (double beta : {1e-3, 1e-2, 0.1, 1.0, 3.14159, 10.0, 100.0, 1000.0, 1e4}) {
    auto t0 = std::chrono::steady_clock::now();
    QuadResult q = hopping_integral(beta, 1e-7);
    auto t1 = std::chrono::steady_clock::now();
    double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    double shortI = -3.0 * kPi / 16.0 * beta * beta;
    double longI = -longtime_coefficient() * std::cbrt(beta * beta);
    std::printf(
        "beta=%9.3g I=%14.8g err=%8.2g evals=%8ld conv=%d  short/I=%8.5f "
        "long/I=%8.5f  [%7.1f ms]\n",
        beta, q.value, q.error, q.evaluations, (int)q.converged,
        shortI / q.value, longI / q.value, ms);
  }

  auto tk0 = std::chrono::steady_clock::now();
  const HoppingKernel& kern = HoppingKernel::instance();
  auto tk1 = std::chrono::steady_clock::now();
  std::printf("kernel build: %.1f s\n",
              std::chrono::duration<double>(tk1 - tk0).count());
  for (double beta : {2e-4, 1e-2, 0.5, 3.3, 47.0, 999.0, 9000.0, 2e4}) {
    QuadResult q = hopping_integral(beta, 1e-7);
    std::printf("beta=%9.3g kernel=%14.8g direct=%14.8g rel=%8.2g\n", beta,
                kern(beta), q.value, kern(beta) / q.value - 1.0);
  }

  // slope of ln chi vs ln tau in [3 tau_c, 10 tau_c] (same for all d)
  {
    double b1 = 3 * kPi, b2 = 10 * kPi;
    int n = 9;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
      double b = b1 * std::pow(b2 / b1, i / double(n - 1));
      double x = std::log(b), y = std::log(-kern(b));
      sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    std::printf("log-log slope over [3tc,10tc]: %.4f\n", slope);
    // two-segment intersection (knee) in beta
    std::printf("knee beta (short=long): %.3f (pi=%.3f, 3pi=%.3f)\n",
                std::pow(longtime_coefficient() * 16 / (3 * kPi), 0.75), kPi,
                3 * kPi);
  }

  // exact vs longtime relative (on chi) at beta > 100
  for (double beta : {100.0, 200.0, 500.0, 1000.0, 5000.0}) {
    double chi_e = -kern(beta);
    double chi_l = longtime_coefficient() * std::cbrt(beta * beta);
    std::printf("beta=%7.0f  chi_l/chi_e-1 = %9.5f\n", beta,
                chi_l / chi_e - 1.0);
  }

  // M4 moment: I(beta) = -M2/2 b^2 + M4/24 b^4 ...
  {
    double b = 0.02;
    double i1 = hopping_integral(b, 1e-9).value;
    double m2 = 3 * kPi / 8;
    double m4 = (i1 + m2 / 2 * b * b) * 24.0 / (b * b * b * b);
    std::printf("M2 = %.6f (exact %.6f), M4 ~= %.4f\n", m2, 3 * kPi / 8, m4);
  }

  // quick hopping MC vs exact at d=5, sigma=0.005
  {
    SimulationPlan plan;
    plan.bath.sigma = 0.005;
    plan.geometry = SensorGeometry(5.0);
    plan.shots = 20000;
    plan.seed = 7;
    double tc = crossover_time(5.0, c);
    for (double f : {0.1, 0.5, 1.0, 3.0, 8.0})
      plan.tau.push_back(f * tc);
    auto t0 = std::chrono::steady_clock::now();
    SignalCurve mc = simulate_hopping(plan);
    auto t1 = std::chrono::steady_clock::now();
    std::printf("hopping MC 5 pts x 2e4 shots: %.2f s\n",
                std::chrono::duration<double>(t1 - t0).count());
    for (size_t i = 0; i < mc.size(); ++i) {
      double ex = hopping_signal_model(0.005, 5.0, mc.tau[i], c);
      std::printf("tau=%7.3f mc=%9.5f +- %7.5f exact=%9.5f z=%6.2f\n",
                  mc.tau[i], mc.value[i], mc.stderr_[i], ex,
                  (mc.value[i] - ex) / mc.stderr_[i]);
    }
  }
  return 0;
}
