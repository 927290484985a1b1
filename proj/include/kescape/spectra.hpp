#pragma once

#include <cstddef>
#include <vector>

#include "kescape/model.hpp"

namespace kescape {

enum class Branch { field1, field2 };
enum class OperatorKind { stable, saddle };

struct Eigenvalue {
  double value;
  Branch branch;
  int index;  // cosine mode number n >= 0
};

/// Neumann spectrum of the fluctuation operator about a uniform state,
/// ordered by value.
struct SpectrumReport {
  OperatorKind kind;
  std::vector<Eigenvalue> eigenvalues;

  std::size_t negative_count() const noexcept;
};

/// Stable:  pi^2 n^2 / L^2 + 2 mu1        and pi^2 n^2 / L^2 + (mu1 - mu2)
/// Saddle:  pi^2 n^2 / L^2 - (mu1 - mu2)  and pi^2 n^2 / L^2 + 2 mu2
/// for n = 0..n_max on each branch.
SpectrumReport spectrum_uniform(double L, const ModelParams& p, OperatorKind kind, int n_max = 128);

/// Closed-form Kramers prefactor for 0 < L < L_c,
///   (1/pi) (mu1/mu2)^(1/4) sqrt(sinh(kL) / sinh(sqrt(2 mu2) L))
///          sqrt(sinh(sqrt(2 mu1) L) / |sin(kL)|) (mu1 - mu2),   k = sqrt(mu1 - mu2).
/// The two symmetric saddles are already accounted for; callers must not
/// apply another factor of two.
double prefactor_below(double L, const ModelParams& p);

struct RateResult {
  double delta_e;
  double gamma0;
  double lambda_neg;
  double epsilon;
  double gamma;
};

/// gamma = gamma0 exp(-delta_e / epsilon). Requires epsilon > 0 and lambda_neg < 0.
RateResult kramers_rate(double delta_e, double gamma0, double lambda_neg, double epsilon);

/// log(sinh(x)) for x > 0 without overflow.
double log_sinh(double x);

}  // namespace kescape
