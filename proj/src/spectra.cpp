#include "kescape/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "kescape/errors.hpp"

namespace kescape {

std::size_t SpectrumReport::negative_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(eigenvalues.begin(), eigenvalues.end(),
                                                [](const Eigenvalue& e) { return e.value < 0.0; }));
}

SpectrumReport spectrum_uniform(double L, const ModelParams& p, OperatorKind kind, int n_max) {
  if (!(L > 0.0)) throw DomainError("spectrum_uniform: length must be positive");
  if (n_max < 1) throw DomainError("spectrum_uniform: n_max must be at least 1");

  const double shift1 = kind == OperatorKind::stable ? 2.0 * p.mu1() : -p.gap();
  const double shift2 = kind == OperatorKind::stable ? p.gap() : 2.0 * p.mu2();
  const double q = std::numbers::pi / L;

  SpectrumReport report{kind, {}};
  report.eigenvalues.reserve(2 * static_cast<std::size_t>(n_max + 1));
  for (int n = 0; n <= n_max; ++n) {
    const double kinetic = q * q * n * n;
    report.eigenvalues.push_back({kinetic + shift1, Branch::field1, n});
    report.eigenvalues.push_back({kinetic + shift2, Branch::field2, n});
  }
  std::stable_sort(report.eigenvalues.begin(), report.eigenvalues.end(),
                   [](const Eigenvalue& a, const Eigenvalue& b) { return a.value < b.value; });
  return report;
}

double log_sinh(double x) {
  // sinh x = e^x (1 - e^{-2x}) / 2
  if (x < 1.0) return std::log(std::sinh(x));
  return x + std::log1p(-std::exp(-2.0 * x)) - std::numbers::ln2;
}

double prefactor_below(double L, const ModelParams& p) {
  const double lc = critical_length(p);
  if (!(L > 0.0) || L >= lc) {
    throw DomainError("prefactor_below: requires 0 < L < L_c=" + std::to_string(lc) + " (got L=" +
                      std::to_string(L) + ")");
  }
  const double k = std::sqrt(p.gap());
  const double log_value = -std::log(std::numbers::pi) + 0.25 * std::log(p.mu1() / p.mu2()) +
                           0.5 * (log_sinh(k * L) - log_sinh(std::sqrt(2.0 * p.mu2()) * L) +
                                  log_sinh(std::sqrt(2.0 * p.mu1()) * L) -
                                  std::log(std::abs(std::sin(k * L)))) +
                           std::log(p.gap());
  return std::exp(log_value);
}

RateResult kramers_rate(double delta_e, double gamma0, double lambda_neg, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw DomainError("kramers_rate: noise strength must be positive (got " + std::to_string(epsilon) + ")");
  }
  if (!(lambda_neg < 0.0)) {
    throw DomainError("kramers_rate: the unstable eigenvalue must be negative");
  }
  return {delta_e, gamma0, lambda_neg, epsilon, gamma0 * std::exp(-delta_e / epsilon)};
}

}  // namespace kescape
