#include "kescape/lattice_operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "kescape/errors.hpp"

namespace kescape {

FluctuationLattice::FluctuationLattice(const FieldProfile& background, const ModelParams& p,
                                       std::size_t n_sites) {
  if (n_sites < 3) throw DomainError("fluctuation lattice: need at least 3 sites");
  const std::size_t dim = 2 * n_sites;
  spacing_ = background.length / static_cast<double>(n_sites - 1);
  const double inv_h2 = 1.0 / (spacing_ * spacing_);
  diag_.assign(dim, 0.0);
  band1_.assign(dim - 1, 0.0);
  band2_.assign(dim - 2, 0.0);

  for (std::size_t j = 0; j < n_sites; ++j) {
    const double z = j + 1 == n_sites ? 0.5 * background.length
                                      : -0.5 * background.length + spacing_ * static_cast<double>(j);
    const FieldJet f = background.eval(z);
    const PotentialHessian h = potential_hessian(f.phi1, f.phi2, p);
    diag_[2 * j] = 2.0 * inv_h2 + h.h11;
    diag_[2 * j + 1] = 2.0 * inv_h2 + h.h22;
    band1_[2 * j] = h.h12;
    if (j + 1 < n_sites) {
      // ghost-site rows carry -2/h^2; symmetrizing splits it as sqrt(2) each way
      const bool edge = j == 0 || j + 2 == n_sites;
      const double hop = (edge ? -std::numbers::sqrt2 : -1.0) * inv_h2;
      band2_[2 * j] = hop;
      band2_[2 * j + 1] = hop;
    }
  }
}

FluctuationLattice::Factorization FluctuationLattice::factor(double shift) const {
  const std::size_t n = diag_.size();
  Factorization f;
  f.d.assign(n, 0.0);
  f.l1.assign(n, 0.0);
  f.l2.assign(n, 0.0);
  const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
  for (std::size_t i = 0; i < n; ++i) {
    double d = diag_[i] - shift;
    if (i >= 1) d -= f.l1[i - 1] * f.l1[i - 1] * f.d[i - 1];
    if (i >= 2) d -= f.l2[i - 2] * f.l2[i - 2] * f.d[i - 2];
    if (d == 0.0) d = tiny;
    f.d[i] = d;
    if (i + 1 < n) {
      double a = band1_[i];
      if (i >= 1) a -= f.l2[i - 1] * f.l1[i - 1] * f.d[i - 1];
      f.l1[i] = a / d;
    }
    if (i + 2 < n) f.l2[i] = band2_[i] / d;
  }
  return f;
}

std::vector<double> FluctuationLattice::solve(const Factorization& f, std::span<const double> rhs) {
  const std::size_t n = f.d.size();
  std::vector<double> x(rhs.begin(), rhs.end());
  for (std::size_t i = 1; i < n; ++i) {
    x[i] -= f.l1[i - 1] * x[i - 1];
    if (i >= 2) x[i] -= f.l2[i - 2] * x[i - 2];
  }
  for (std::size_t i = 0; i < n; ++i) x[i] /= f.d[i];
  for (std::size_t k = n; k-- > 0;) {
    if (k + 1 < n) x[k] -= f.l1[k] * x[k + 1];
    if (k + 2 < n) x[k] -= f.l2[k] * x[k + 2];
  }
  return x;
}

std::size_t FluctuationLattice::count_below(double shift) const {
  const Factorization f = factor(shift);
  return static_cast<std::size_t>(std::count_if(f.d.begin(), f.d.end(), [](double d) { return d < 0.0; }));
}

SignedLog FluctuationLattice::log_determinant(double shift) const {
  const Factorization f = factor(shift);
  SignedLog out{0.0, 1};
  for (double d : f.d) {
    out.log_abs += std::log(std::abs(d));
    if (d < 0.0) out.sign = -out.sign;
  }
  return out;
}

std::vector<double> FluctuationLattice::apply(std::span<const double> x) const {
  const std::size_t n = diag_.size();
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] += diag_[i] * x[i];
    if (i + 1 < n) {
      y[i] += band1_[i] * x[i + 1];
      y[i + 1] += band1_[i] * x[i];
    }
    if (i + 2 < n) {
      y[i] += band2_[i] * x[i + 2];
      y[i + 2] += band2_[i] * x[i];
    }
  }
  return y;
}

std::vector<double> FluctuationLattice::dense() const {
  const std::size_t n = diag_.size();
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    a[i * n + i] = diag_[i];
    if (i + 1 < n) a[i * n + i + 1] = a[(i + 1) * n + i] = band1_[i];
    if (i + 2 < n) a[i * n + i + 2] = a[(i + 2) * n + i] = band2_[i];
  }
  return a;
}

double FluctuationLattice::lowest_eigenvalue() const {
  const std::size_t n = diag_.size();
  double lo = std::numeric_limits<double>::infinity();
  double min_diag = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double radius = 0.0;
    if (i >= 1) radius += std::abs(band1_[i - 1]);
    if (i + 1 < n) radius += std::abs(band1_[i]);
    if (i >= 2) radius += std::abs(band2_[i - 2]);
    if (i + 2 < n) radius += std::abs(band2_[i]);
    lo = std::min(lo, diag_[i] - radius);
    min_diag = std::min(min_diag, diag_[i]);
  }
  lo -= 1.0;
  // a unit vector's Rayleigh quotient bounds the minimum from above
  double hi = min_diag + 1.0;

  for (int iter = 0; iter < 200; ++iter) {
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(lo) + std::abs(hi))) break;
    const double mid = 0.5 * (lo + hi);
    if (count_below(mid) == 0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  // lo sits just below the smallest eigenvalue, so A - lo I is positive definite.
  const Factorization f = factor(lo);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.01 * static_cast<double>(i % 7);
  double rayleigh = 0.5 * (lo + hi);
  for (int iter = 0; iter < 50; ++iter) {
    x = solve(f, x);
    double norm = 0.0;
    for (double v : x) norm += v * v;
    norm = std::sqrt(norm);
    if (!std::isfinite(norm) || norm == 0.0) break;
    for (double& v : x) v /= norm;
    const std::vector<double> ax = apply(x);
    double next = 0.0;
    for (std::size_t i = 0; i < n; ++i) next += x[i] * ax[i];
    const bool done = std::abs(next - rayleigh) <= 1e-15 * std::max(1.0, std::abs(next));
    rayleigh = next;
    if (done && iter > 0) break;
  }
  return rayleigh;
}

}  // namespace kescape
