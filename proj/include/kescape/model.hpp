#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "kescape/elliptic.hpp"

namespace kescape {

/// Curvature parameters of the two-field potential. Both bending coefficients
/// are fixed at one. Construction enforces mu1 > mu2 > 0.
class ModelParams {
 public:
  ModelParams(double mu1, double mu2);

  double mu1() const noexcept { return mu1_; }
  double mu2() const noexcept { return mu2_; }
  /// mu1 - mu2, the stiffness of the field-2 direction at the metastable state.
  double gap() const noexcept { return mu1_ - mu2_; }

  static constexpr double bending = 1.0;

 private:
  double mu1_;
  double mu2_;
};

struct FieldPoint {
  double phi1;
  double phi2;
};

/// Field values and their spatial derivatives at one point.
struct FieldJet {
  double phi1;
  double phi2;
  double dphi1;
  double dphi2;
};

/// Second derivatives of the potential, the coefficient of the fluctuation operator.
struct PotentialHessian {
  double h11;
  double h12;
  double h22;
};

/// U(phi1, phi2) = -mu1/2 phi1^2 + phi1^4/4 - mu2/2 phi2^2 + phi2^4/4 + phi1^2 phi2^2 / 2
double potential(double phi1, double phi2, const ModelParams& p) noexcept;
FieldPoint potential_gradient(double phi1, double phi2, const ModelParams& p) noexcept;
PotentialHessian potential_hessian(double phi1, double phi2, const ModelParams& p) noexcept;

enum class StateKind { metastable, saddle };

struct UniformState {
  double phi1;
  double phi2;
  StateKind kind;

  /// (sign * sqrt(mu1), 0)
  static UniformState metastable(const ModelParams& p, int sign = +1);
  /// (0, sign * sqrt(mu2))
  static UniformState saddle(const ModelParams& p, int sign = +1);
};

/// pi / sqrt(mu1 - mu2): below it the uniform saddle governs escape.
double critical_length(const ModelParams& p);

/// Interval length 2 K(m) / sqrt(mu1 - mu2) on which the instanton with
/// parameter m obeys Neumann conditions. Requires 0 <= m < 1.
double length_from_m(double m, const ModelParams& p);

/// Inverse of length_from_m by bisection on the monotone map, carried to full
/// double resolution in m.
/// Throws DomainError for L <= critical_length (no nonuniform saddle) and
/// ValidityError when the resulting m exceeds mu2 / (mu1 - mu2).
double m_from_length(double L, const ModelParams& p);

/// Largest length that admits a real instanton representable in double precision.
double max_instanton_length(const ModelParams& p);

/// Smooth field configuration on [-L/2, L/2] with analytic derivatives.
struct FieldProfile {
  double length;
  std::function<FieldJet(double z)> eval;
};

FieldProfile uniform_profile(const UniformState& state, double length);

/// Exact nonuniform stationary solution
///   phi1 = s1 sqrt(m) sqrt((2 mu1 - mu2) - m (mu1 - mu2)) sn(sqrt(mu1 - mu2) z | m)
///   phi2 = s2 sqrt(mu2 - m (mu1 - mu2)) dn(sqrt(mu1 - mu2) z | m)
/// on [-L/2, L/2] with L = length_from_m(m). Field energies do not depend on
/// the branch signs.
class Instanton {
 public:
  Instanton(double m, const ModelParams& p, int sign1 = +1, int sign2 = +1);
  static Instanton for_length(double L, const ModelParams& p, int sign1 = +1, int sign2 = +1);

  double m() const noexcept { return m_; }
  double length() const noexcept { return length_; }
  int sign1() const noexcept { return sign1_; }
  int sign2() const noexcept { return sign2_; }
  const ModelParams& params() const noexcept { return params_; }

  /// Fields and derivatives at z; requires |z| <= L/2.
  FieldJet eval(double z) const;
  FieldProfile profile() const;

 private:
  double m_;
  double length_;
  int sign1_;
  int sign2_;
  ModelParams params_;
  double wavenumber_;
  double amplitude1_;
  double amplitude2_;
};

/// Samples of both fields on one uniform grid whose endpoints are exactly +-L/2.
struct FieldPair {
  std::vector<double> z;
  std::vector<double> phi1;
  std::vector<double> phi2;

  std::size_t size() const noexcept { return z.size(); }
  double length() const { return z.back() - z.front(); }
  double spacing() const { return length() / static_cast<double>(z.size() - 1); }
};

FieldPair sample(const FieldProfile& profile, std::size_t n_points);

/// Max over interior grid points of the Euler-Lagrange residuals, with second
/// derivatives by central differences. Requires at least 64 points.
double euler_lagrange_residual(const FieldPair& fields, const ModelParams& p);

/// Energy functional by composite 8-point Gauss-Legendre quadrature. The
/// constant `density_offset` is subtracted from the energy density before
/// integrating, which lets callers form energy differences without cancellation.
double energy(const FieldProfile& profile, const ModelParams& p, std::size_t panels = 128,
              double density_offset = 0.0);

/// Discrete energy of lattice samples: trapezoid weights for the potential and
/// forward differences for the gradient term. The Neumann lattice dynamics is
/// the weighted gradient flow of this functional.
double lattice_energy(const FieldPair& fields, const ModelParams& p);

/// Activation barrier from the metastable state. Uniform saddle for L <= L_c,
/// instanton beyond.
double barrier(double L, const ModelParams& p);

}  // namespace kescape
