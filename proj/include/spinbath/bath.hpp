#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "spinbath/constants.hpp"
#include "spinbath/rng.hpp"
#include "json.hpp"

// Random 2D spin-bath configurations over a disk and their spatial statistics.

namespace spinbath {

struct BathParameters {
  double sigma = 0.005;           // areal density, nm^-2
  double radius_nm = 0.0;         // simulation disk radius; 0 = choose from depth
  double t1_us = std::numeric_limits<double>::infinity();
  double disorder_gamma = 0.0;    // on-site disorder scale, rad/us
  double stationary_fraction = 0.0;
  std::uint64_t max_spins = 2000000;

  void validate() const {
    if (!(sigma >= 0.0)) throw std::invalid_argument("bath: sigma must be >= 0");
    if (radius_nm < 0.0)
      throw std::invalid_argument("bath: radius must be > 0 (or 0 for auto)");
    if (!(stationary_fraction >= 0.0 && stationary_fraction <= 1.0))
      throw std::invalid_argument("bath: stationary_fraction must be in [0,1]");
    if (!(t1_us > 0.0)) throw std::invalid_argument("bath: t1 must be > 0");
  }
};

// Disk radius such that spins beyond it contribute < 1e-3 of the second
// moment of the coupling distribution (integrand falls off as 1/r^6).
inline double default_radius(double sigma, double depth_nm) {
  double r = 25.0;
  r = std::max(r, 5.0 * depth_nm);
  if (sigma > 0.0) r = std::max(r, 5.0 / (2.0 * std::sqrt(sigma)));
  return r;
}

inline double effective_radius(const BathParameters& p, double depth_nm) {
  return p.radius_nm > 0.0 ? p.radius_nm : default_radius(p.sigma, depth_nm);
}

struct SpinConfiguration {
  std::vector<double> r;          // nm, in-plane distance from the sensor axis
  std::vector<double> alpha;      // rad
  std::vector<std::int8_t> state; // +1 / -1
  std::vector<std::uint8_t> stationary;

  std::size_t size() const { return r.size(); }
};

// Poisson(sigma * pi * R^2) spins placed uniformly over the disk; r = R*sqrt(u)
// avoids center bias. An optional disk-center offset (relative to the sensor
// axis) supports translation-invariance checks.
inline SpinConfiguration sample_configuration(const BathParameters& params,
                                              double depth_nm, Stream& stream,
                                              double center_x_nm = 0.0,
                                              double center_y_nm = 0.0) {
  params.validate();
  const double radius = effective_radius(params, depth_nm);
  const double mean_count = params.sigma * kPi * radius * radius;
  if (mean_count > static_cast<double>(params.max_spins))
    throw std::invalid_argument(
        "sample_configuration: expected spin count exceeds max_spins");
  const std::uint64_t n = stream.poisson(mean_count);

  SpinConfiguration cfg;
  cfg.r.reserve(n);
  cfg.alpha.reserve(n);
  cfg.state.reserve(n);
  cfg.stationary.reserve(n);
  const bool offset = (center_x_nm != 0.0 || center_y_nm != 0.0);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double rr = radius * std::sqrt(stream.uniform());
    const double aa = 2.0 * kPi * stream.uniform();
    double r_out = rr, a_out = aa;
    if (offset) {
      const double x = center_x_nm + rr * std::cos(aa);
      const double y = center_y_nm + rr * std::sin(aa);
      r_out = std::hypot(x, y);
      a_out = std::atan2(y, x);
    }
    cfg.r.push_back(r_out);
    cfg.alpha.push_back(a_out);
    cfg.state.push_back(static_cast<std::int8_t>(stream.sign()));
    cfg.stationary.push_back(stream.bernoulli(params.stationary_fraction) ? 1
                                                                          : 0);
  }
  return cfg;
}

// nearest-neighbor distance pdf for a 2D Poisson process:
//   w(r) = 2 pi sigma r exp(-pi sigma r^2)
inline double nn_pdf(double r, double sigma) {
  if (r < 0.0) throw std::invalid_argument("nn_pdf: r must be >= 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("nn_pdf: sigma must be > 0");
  return 2.0 * kPi * sigma * r * std::exp(-kPi * r * r * sigma);
}

inline double nn_cdf(double r, double sigma) {
  return 1.0 - std::exp(-kPi * r * r * sigma);
}

// first moment of nn_pdf
inline double nn_mean(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("nn_mean: sigma must be > 0");
  return 0.5 / std::sqrt(sigma);
}

// in-plane distance from the sensor axis to the nearest spin
inline double nearest_spin_distance(const SpinConfiguration& cfg) {
  double best = std::numeric_limits<double>::infinity();
  for (double ri : cfg.r) best = std::min(best, ri);
  return best;
}

inline void to_json(nlohmann::json& j, const SpinConfiguration& cfg) {
  j = nlohmann::json{{"r_nm", cfg.r},
                     {"alpha_rad", cfg.alpha},
                     {"state", cfg.state},
                     {"stationary", cfg.stationary}};
}

inline void from_json(const nlohmann::json& j, SpinConfiguration& cfg) {
  j.at("r_nm").get_to(cfg.r);
  j.at("alpha_rad").get_to(cfg.alpha);
  j.at("state").get_to(cfg.state);
  j.at("stationary").get_to(cfg.stationary);
  if (cfg.alpha.size() != cfg.r.size() || cfg.state.size() != cfg.r.size() ||
      cfg.stationary.size() != cfg.r.size())
    throw std::invalid_argument("SpinConfiguration: mismatched array lengths");
}

}  // namespace spinbath
