#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "kescape/model.hpp"

namespace kescape {

/// A determinant held as sign and log-magnitude.
struct SignedLog {
  double log_abs;
  int sign;

  double value() const { return sign * std::exp(log_abs); }
};

/// Second-order finite-difference discretization of the two-field fluctuation
/// operator -d^2/dz^2 + U''(phi(z)) about a background profile, on n uniformly
/// spaced sites including both endpoints. Neumann conditions come from
/// mirrored ghost sites; the resulting matrix is symmetrized by the half
/// weight of the endpoint cells, which leaves the spectrum unchanged.
///
/// Unknowns are interleaved per site, (field1, field2), so the matrix is
/// symmetric with half bandwidth 2.
class FluctuationLattice {
 public:
  FluctuationLattice(const FieldProfile& background, const ModelParams& p, std::size_t n_sites);

  std::size_t dimension() const noexcept { return diag_.size(); }
  std::size_t sites() const noexcept { return diag_.size() / 2; }
  double spacing() const noexcept { return spacing_; }

  /// Number of eigenvalues strictly below `shift` (Sylvester inertia of the
  /// LDL^T factorization of A - shift I).
  std::size_t count_below(double shift) const;

  SignedLog log_determinant(double shift = 0.0) const;

  /// Smallest eigenvalue: inertia bisection to isolate it, then inverse
  /// iteration with a shift just below it.
  double lowest_eigenvalue() const;

  std::vector<double> apply(std::span<const double> x) const;

  /// Dense copy, row-major, for tests and small problems.
  std::vector<double> dense() const;

 private:
  struct Factorization {
    std::vector<double> d;
    std::vector<double> l1;  // L(i+1, i)
    std::vector<double> l2;  // L(i+2, i)
  };

  Factorization factor(double shift) const;
  static std::vector<double> solve(const Factorization& f, std::span<const double> rhs);

  double spacing_;
  std::vector<double> diag_;
  std::vector<double> band1_;  // A(i+1, i)
  std::vector<double> band2_;  // A(i+2, i)
};

}  // namespace kescape
