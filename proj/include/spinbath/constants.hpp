#pragma once

#include <cmath>
#include <stdexcept>

// Physical constants and the sensor/bath-spin dipolar coupling.
//
// Canonical unit system: lengths in nm, times in us, angular frequencies in
// rad/us. All unit conversion happens in the constructors / factory below;
// everything downstream works in canonical units only.

namespace spinbath {

inline constexpr double kPi = 3.14159265358979323846;

// quantization-axis tilt for a sensor along a <111> axis under a surface
// normal along <100>: cos^2(theta) = 1/3
inline double magic_angle() { return std::acos(1.0 / std::sqrt(3.0)); }

struct PhysicalConstants {
  double gamma_e = 1.76085963023e11;   // rad s^-1 T^-1
  double mu0_over_4pi = 1.00000000055e-7;  // T m A^-1
  double hbar = 1.054571817e-34;       // J s

  static PhysicalConstants codata() { return PhysicalConstants{}; }

  // (mu0/4pi) * gamma_e^2 * hbar converted from m^3/s to rad nm^3 us^-1.
  // 1 m^3/s = 1e21 nm^3/us.
  double dipolar_constant() const {
    return mu0_over_4pi * gamma_e * gamma_e * hbar * 1e21;
  }
};

inline double dipolar_constant(const PhysicalConstants& c) {
  return c.dipolar_constant();
}

struct SensorGeometry {
  double depth_nm = 5.0;          // distance from sensor to the spin plane
  double tilt_rad = magic_angle();

  SensorGeometry() = default;
  SensorGeometry(double depth, double tilt = magic_angle())
      : depth_nm(depth), tilt_rad(tilt) {
    validate();
  }

  void validate() const {
    if (!(depth_nm > 0.0))
      throw std::invalid_argument("SensorGeometry: depth must be > 0");
    if (!(tilt_rad >= 0.0 && tilt_rad < kPi / 2.0))
      throw std::invalid_argument("SensorGeometry: tilt must be in [0, pi/2)");
  }
};

// Secular dipolar coupling J between the sensor and one bath spin at in-plane
// polar position (r, alpha), in rad/us. Sign convention follows the tilted
// axis n = (sin(theta), 0, cos(theta)) with the spin plane offset -depth along
// z, which at the magic angle reduces to
//   J = (K/2) (2 r^2 cos^2(a) - r^2 - 2 sqrt(2) r d cos(a)) / (r^2+d^2)^{5/2}.
inline double coupling_tensor(double r_nm, double alpha_rad,
                              const SensorGeometry& geom,
                              const PhysicalConstants& c) {
  geom.validate();
  if (r_nm < 0.0) throw std::invalid_argument("coupling: r must be >= 0");
  const double d = geom.depth_nm;
  const double ux = r_nm * std::cos(alpha_rad);
  const double uy = r_nm * std::sin(alpha_rad);
  const double uz = -d;
  const double rho2 = ux * ux + uy * uy + uz * uz;
  const double rho = std::sqrt(rho2);
  const double nx = std::sin(geom.tilt_rad);
  const double nz = std::cos(geom.tilt_rad);
  const double cosang = (ux * nx + uz * nz) / rho;
  const double k = c.dipolar_constant();
  return 0.5 * k * (3.0 * cosang * cosang - 1.0) / (rho2 * rho);
}

inline double coupling_magic_angle(double r_nm, double alpha_rad,
                                   const SensorGeometry& geom,
                                   const PhysicalConstants& c) {
  geom.validate();
  if (r_nm < 0.0) throw std::invalid_argument("coupling: r must be >= 0");
  const double d = geom.depth_nm;
  const double ca = std::cos(alpha_rad);
  const double num = 2.0 * r_nm * r_nm * ca * ca - r_nm * r_nm -
                     2.0 * std::sqrt(2.0) * r_nm * d * ca;
  const double t = r_nm * r_nm + d * d;
  const double den = t * t * std::sqrt(t);
  return 0.5 * c.dipolar_constant() * num / den;
}

inline double coupling(double r_nm, double alpha_rad,
                       const SensorGeometry& geom, const PhysicalConstants& c) {
  if (std::fabs(geom.tilt_rad - magic_angle()) < 1e-12)
    return coupling_magic_angle(r_nm, alpha_rad, geom, c);
  return coupling_tensor(r_nm, alpha_rad, geom, c);
}

// In-plane secular coupling between two bath spins separated by r at bond
// azimuth psi; at the magic angle 3 (u.n)^2 - 1 = cos(2 psi).
inline double bath_pair_coupling(double r_nm, double psi_rad,
                                 const PhysicalConstants& c) {
  if (!(r_nm > 0.0))
    throw std::invalid_argument("bath_pair_coupling: r must be > 0");
  const double cp = std::cos(psi_rad);
  const double num = 3.0 * cp * cp * (2.0 / 3.0) - 1.0;  // cos(2 psi)
  return 0.5 * c.dipolar_constant() * num / (r_nm * r_nm * r_nm);
}

}  // namespace spinbath
