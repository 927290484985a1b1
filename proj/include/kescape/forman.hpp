#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>

#include <Eigen/Core>

#include "kescape/lattice_operator.hpp"
#include "kescape/model.hpp"

namespace kescape {

using Matrix4 = Eigen::Matrix4d;

/// Boundary data M, N of the condition M (eta, eta')(-L/2) + N (eta, eta')(L/2) = 0.
struct BoundaryMatrices {
  Matrix4 M;
  Matrix4 N;
};

/// Neumann conditions on both fields: eta'(-L/2) = 0 in the first two rows,
/// eta'(L/2) = 0 in the last two.
BoundaryMatrices neumann_boundary_matrices();

enum class FluctuationKind { uniform_stable, uniform_saddle, nonuniform_saddle };

/// Which linearized operator -d^2/dz^2 + U''(phi) to build a fundamental matrix for.
struct OperatorSpec {
  FluctuationKind kind;
  ModelParams params;
  std::optional<Instanton> instanton;  // set iff kind == nonuniform_saddle

  static OperatorSpec uniform_stable(const ModelParams& p);
  static OperatorSpec uniform_saddle(const ModelParams& p);
  static OperatorSpec nonuniform_saddle(const Instanton& inst);
};

/// Y(L/2) for the first-order system (eta, eta')' = [[0, I], [U'', 0]] (eta, eta'),
/// Y(-L/2) = I. Columns whose norm grew past a threshold were divided down
/// during integration; the true matrix is y * diag(exp(column_log_scale)).
struct FundamentalMatrix {
  Matrix4 y = Matrix4::Identity();
  std::array<double, 4> column_log_scale{};

  /// Sum of the column corrections, i.e. log of the factor applied to det(Y).
  double log_scale() const noexcept;
  /// y with the column scales restored; may overflow for long intervals.
  Matrix4 unscaled() const;
};

struct IntegrationOptions {
  std::size_t steps = 4096;
  double rescale_threshold = 1e100;
};

/// Classical fixed-step RK4 from -L/2 to L/2 with step L/steps.
/// Throws NumericalOverflowError on non-finite entries.
FundamentalMatrix integrate_fundamental(const OperatorSpec& spec, double L,
                                        const IntegrationOptions& options = {});

/// Constant-coefficient closed form for the uniform kinds (cosh/sinh blocks for
/// positive coefficients, cos/sin for negative ones).
FundamentalMatrix closed_form_fundamental(const OperatorSpec& spec, double L,
                                          double rescale_threshold = 1e100);

/// det[M + N Y] with the column scales folded in.
SignedLog boundary_determinant(const FundamentalMatrix& y, const BoundaryMatrices& bc);

/// log det[M + N Y_s] - log det[M + N Y_u]. Y_s is the stable-state closed
/// form; Y_u is integrated about the uniform saddle below L_c and about the
/// instanton above it. Throws SingularityError within 1e-9 of L_c.
SignedLog log_det_ratio(double L, const ModelParams& p, const IntegrationOptions& options = {});
double det_ratio(double L, const ModelParams& p, const IntegrationOptions& options = {});

struct LatticeOptions {
  std::size_t base_sites = 400;
  double tolerance = 1e-4;
  std::size_t max_levels = 8;  // at most (base_sites - 1) * 2^7 + 1 sites
};

/// Negative eigenvalue of the fluctuation operator about the governing saddle.
/// Exactly -(mu1 - mu2) for L <= L_c. Above L_c the instanton operator is
/// discretized on n, 2n-1, 4n-3, ... sites (spacing halved each time), the
/// lowest eigenvalue of each is found by shifted inverse iteration, and
/// successive Richardson extrapolations are compared. The grid is refined
/// until two of them agree to the relative tolerance; ConvergenceError when
/// max_levels is exhausted. Deep in the soft-mode regime the eigenvalue is
/// tiny and needs the finer levels.
double negative_eigenvalue(double L, const ModelParams& p, const LatticeOptions& options = {});

struct PrefactorEvaluation {
  double gamma0;
  double lambda_neg;
  SignedLog det_ratio;
};

/// gamma0 = (1/pi) sqrt|det ratio| |lambda_neg|. Throws SingularityError for
/// |L - L_c| <= 1e-6.
PrefactorEvaluation evaluate_prefactor(double L, const ModelParams& p,
                                       const IntegrationOptions& integration = {},
                                       const LatticeOptions& lattice = {});
double prefactor(double L, const ModelParams& p);

enum class Side { below, above };

struct LineFit {
  double slope;
  double intercept;
};

/// Ordinary least squares y = slope * x + intercept.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Fits log(gamma0) against log|L - L_c| (natural logs) at n_points
/// log-spaced distances |L - L_c| in [window.first, window.second].
LineFit fit_critical_exponent(const ModelParams& p, Side side, std::pair<double, double> window,
                              std::size_t n_points);

}  // namespace kescape
