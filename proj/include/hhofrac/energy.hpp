#pragma once

// Elastic energy density, degradation function and tension/compression
// splits for plane strain. Strains are 2x2 symmetric tensors embedded in 3D
// with e13 = e23 = e33 = 0, so traces and deviators use 3D definitions.

#include "common.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

namespace hhofrac {

enum class Formulation { isotropic, hybrid_spectral, hybrid_voldev };

inline std::string_view to_string(Formulation f) {
  switch (f) {
  case Formulation::isotropic: return "isotropic";
  case Formulation::hybrid_spectral: return "hybrid-sp";
  case Formulation::hybrid_voldev: return "hybrid-vd";
  }
  return "?";
}

inline Formulation parse_formulation(std::string_view s) {
  if (s == "isotropic") return Formulation::isotropic;
  if (s == "hybrid-sp") return Formulation::hybrid_spectral;
  if (s == "hybrid-vd") return Formulation::hybrid_voldev;
  throw ConfigError("unknown formulation '" + std::string(s) + "' (isotropic | hybrid-sp | hybrid-vd)");
}

/// Material data in kN and mm.
struct MaterialParams {
  double lambda = 121.15;
  double mu = 80.77;
  double gc = 2.7e-3;
  double ell = 0.0075;
  double eta = 0.;
  double g_min = 1e-7;
  Formulation formulation = Formulation::hybrid_voldev;

  double bulk_modulus() const { return lambda + 2. * mu / 3.; }

  void validate() const {
    if (!(mu > 0.)) throw ConfigError("mu must be positive");
    if (!(lambda > -2. * mu / 3.)) throw ConfigError("lambda must exceed -2 mu / 3");
    if (!(gc > 0.)) throw ConfigError("gc must be positive");
    if (!(ell > 0.)) throw ConfigError("ell must be positive");
    if (!(eta >= 0.)) throw ConfigError("eta must be non-negative");
    if (!(g_min > 0. && g_min < 1.)) throw ConfigError("g_min must lie in (0, 1)");
  }
};

/// Symmetric plane strain; `xy` is the tensor component e12 (not engineering shear).
struct Strain2 {
  double xx = 0.;
  double yy = 0.;
  double xy = 0.;

  double trace() const { return xx + yy; }
  double dot(const Strain2& o) const { return xx * o.xx + yy * o.yy + 2. * xy * o.xy; }
};

inline double positive_part(double a) { return 0.5 * (std::abs(a) + a); }
inline double negative_part(double a) { return 0.5 * (std::abs(a) - a); }

inline double psi0(const Strain2& e, const MaterialParams& p) {
  const double tr = e.trace();
  return 0.5 * p.lambda * tr * tr + p.mu * e.dot(e);
}

struct Eigen2 {
  double value1; ///< larger eigenvalue
  double value2;
  Vector2 dir1;
  Vector2 dir2;
};

/// Closed-form eigendecomposition of a symmetric 2x2 tensor.
inline Eigen2 eig2_sym(const Strain2& e) {
  const double mean = 0.5 * (e.xx + e.yy);
  const double half_diff = 0.5 * (e.xx - e.yy);
  const double radius = std::hypot(half_diff, e.xy);
  Eigen2 out{mean + radius, mean - radius, Vector2::UnitX(), Vector2::UnitY()};
  if (radius == 0.) return out;
  // e - value2 * I = (value1 - value2) n1 n1^T: take its larger column.
  const Vector2 c0(e.xx - out.value2, e.xy);
  const Vector2 c1(e.xy, e.yy - out.value2);
  out.dir1 = (c0.squaredNorm() >= c1.squaredNorm() ? c0 : c1).normalized();
  out.dir2 = Vector2(-out.dir1.y(), out.dir1.x());
  return out;
}

struct EnergySplit {
  double positive;
  double negative;
};

/// Spectral split. The out-of-plane principal strain is zero and contributes
/// to neither part; e+:e+ = sum of squared positive principal strains.
inline EnergySplit split_spectral(const Strain2& e, const MaterialParams& p) {
  const double mean = 0.5 * (e.xx + e.yy);
  const double radius = std::hypot(0.5 * (e.xx - e.yy), e.xy);
  const double e1 = mean + radius, e2 = mean - radius;
  const double tr = e.trace();
  const double tp = positive_part(tr), tn = negative_part(tr);
  const double p1 = positive_part(e1), p2 = positive_part(e2);
  const double n1 = negative_part(e1), n2 = negative_part(e2);
  return {0.5 * p.lambda * tp * tp + p.mu * (p1 * p1 + p2 * p2),
          0.5 * p.lambda * tn * tn + p.mu * (n1 * n1 + n2 * n2)};
}

/// Volumetric-deviatoric split with the 3D deviator e' = e - tr(e)/3 I3.
inline EnergySplit split_voldev(const Strain2& e, const MaterialParams& p) {
  const double tr = e.trace();
  const double third = tr / 3.;
  const double dxx = e.xx - third, dyy = e.yy - third;
  const double dev2 = dxx * dxx + dyy * dyy + third * third + 2. * e.xy * e.xy;
  const double tp = positive_part(tr), tn = negative_part(tr);
  const double k = p.bulk_modulus();
  return {0.5 * k * tp * tp + p.mu * dev2, 0.5 * k * tn * tn};
}

/// Energy density that drives the phase field: psi0 for the isotropic
/// formulation, its tensile part for the hybrid ones.
inline double driving_energy(const Strain2& e, const MaterialParams& p) {
  switch (p.formulation) {
  case Formulation::isotropic: return psi0(e, p);
  case Formulation::hybrid_spectral: return split_spectral(e, p).positive;
  case Formulation::hybrid_voldev: return split_voldev(e, p).positive;
  }
  return psi0(e, p);
}

/// g(phi) = (1 - phi)^2 with phi clamped to [0, 1], floored at g_min.
inline double degradation(double phi, const MaterialParams& p) {
  const double c = std::clamp(phi, 0., 1.);
  return std::max((1. - c) * (1. - c), p.g_min);
}

} // namespace hhofrac
