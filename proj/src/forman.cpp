#include "kescape/forman.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "kescape/errors.hpp"

namespace kescape {

namespace {

constexpr double kSingularWindow = 1e-9;
constexpr double kPrefactorExclusion = 1e-6;

PotentialHessian uniform_coefficients(const OperatorSpec& spec) {
  const ModelParams& p = spec.params;
  const UniformState s = spec.kind == FluctuationKind::uniform_stable ? UniformState::metastable(p)
                                                                      : UniformState::saddle(p);
  return potential_hessian(s.phi1, s.phi2, p);
}

// (eta, eta')' = [[0, I], [V, 0]] (eta, eta'), applied column-wise to Y.
Matrix4 apply_system(const PotentialHessian& v, const Matrix4& y) {
  Matrix4 out;
  out.topRows<2>() = y.bottomRows<2>();
  out.row(2) = v.h11 * y.row(0) + v.h12 * y.row(1);
  out.row(3) = v.h12 * y.row(0) + v.h22 * y.row(1);
  return out;
}

}  // namespace

BoundaryMatrices neumann_boundary_matrices() {
  BoundaryMatrices bc{Matrix4::Zero(), Matrix4::Zero()};
  bc.M(0, 2) = 1.0;
  bc.M(1, 3) = 1.0;
  bc.N(2, 2) = 1.0;
  bc.N(3, 3) = 1.0;
  return bc;
}

OperatorSpec OperatorSpec::uniform_stable(const ModelParams& p) {
  return {FluctuationKind::uniform_stable, p, std::nullopt};
}

OperatorSpec OperatorSpec::uniform_saddle(const ModelParams& p) {
  return {FluctuationKind::uniform_saddle, p, std::nullopt};
}

OperatorSpec OperatorSpec::nonuniform_saddle(const Instanton& inst) {
  return {FluctuationKind::nonuniform_saddle, inst.params(), inst};
}

double FundamentalMatrix::log_scale() const noexcept {
  return column_log_scale[0] + column_log_scale[1] + column_log_scale[2] + column_log_scale[3];
}

Matrix4 FundamentalMatrix::unscaled() const {
  Matrix4 out = y;
  for (int j = 0; j < 4; ++j) out.col(j) *= std::exp(column_log_scale[j]);
  return out;
}

FundamentalMatrix integrate_fundamental(const OperatorSpec& spec, double L,
                                        const IntegrationOptions& options) {
  if (!std::isfinite(L) || !(L >= 0.0)) throw DomainError("integrate_fundamental: invalid length");
  if (options.steps < 256) throw DomainError("integrate_fundamental: need at least 256 steps");

  double length = L;
  std::function<PotentialHessian(double)> coefficients;
  if (spec.kind == FluctuationKind::nonuniform_saddle) {
    if (!spec.instanton) throw DomainError("integrate_fundamental: nonuniform saddle needs an instanton");
    const Instanton& inst = *spec.instanton;
    if (std::abs(inst.length() - L) > 1e-8 * std::max(1.0, L)) {
      throw DomainError("integrate_fundamental: instanton length " + std::to_string(inst.length()) +
                        " does not match L=" + std::to_string(L));
    }
    length = inst.length();
    coefficients = [&inst](double z) {
      const FieldJet f = inst.eval(z);
      return potential_hessian(f.phi1, f.phi2, inst.params());
    };
  } else {
    const PotentialHessian v = uniform_coefficients(spec);
    coefficients = [v](double) { return v; };
  }

  FundamentalMatrix out;
  if (length == 0.0) return out;

  const double h = length / static_cast<double>(options.steps);
  const double start = -0.5 * length;
  PotentialHessian v_left = coefficients(start);
  for (std::size_t k = 0; k < options.steps; ++k) {
    const double z = start + h * static_cast<double>(k);
    const double z_end = k + 1 == options.steps ? 0.5 * length : z + h;
    const PotentialHessian v_mid = coefficients(z + 0.5 * h);
    const PotentialHessian v_right = coefficients(z_end);

    const Matrix4& y = out.y;
    const Matrix4 k1 = apply_system(v_left, y);
    const Matrix4 k2 = apply_system(v_mid, y + 0.5 * h * k1);
    const Matrix4 k3 = apply_system(v_mid, y + 0.5 * h * k2);
    const Matrix4 k4 = apply_system(v_right, y + h * k3);
    out.y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    v_left = v_right;

    for (int j = 0; j < 4; ++j) {
      const double norm = out.y.col(j).norm();
      if (norm > options.rescale_threshold) {
        out.y.col(j) /= norm;
        out.column_log_scale[j] += std::log(norm);
      }
    }
    if (!out.y.allFinite()) {
      throw NumericalOverflowError("integrate_fundamental: non-finite value at z=" + std::to_string(z_end));
    }
  }
  return out;
}

FundamentalMatrix closed_form_fundamental(const OperatorSpec& spec, double L, double rescale_threshold) {
  if (spec.kind == FluctuationKind::nonuniform_saddle) {
    throw DomainError("closed_form_fundamental: only constant-coefficient operators have a closed form");
  }
  const PotentialHessian v = uniform_coefficients(spec);
  FundamentalMatrix out;
  const std::array<double, 2> coefficient{v.h11, v.h22};
  for (int f = 0; f < 2; ++f) {
    const int d = f + 2;
    const double c = coefficient[f];
    if (c > 0.0) {
      const double a = std::sqrt(c);
      const double x = a * L;
      double ch;
      double sh;
      if (x + std::log(std::max(1.0, a)) > std::log(rescale_threshold)) {
        // cosh and sinh times e^{-x}
        const double e = std::exp(-2.0 * x);
        ch = 0.5 * (1.0 + e);
        sh = 0.5 * (1.0 - e);
        out.column_log_scale[f] = x;
        out.column_log_scale[d] = x;
      } else {
        ch = std::cosh(x);
        sh = std::sinh(x);
      }
      out.y(f, f) = ch;
      out.y(f, d) = sh / a;
      out.y(d, f) = a * sh;
      out.y(d, d) = ch;
    } else if (c < 0.0) {
      const double a = std::sqrt(-c);
      const double x = a * L;
      out.y(f, f) = std::cos(x);
      out.y(f, d) = std::sin(x) / a;
      out.y(d, f) = -a * std::sin(x);
      out.y(d, d) = std::cos(x);
    } else {
      out.y(f, d) = L;
    }
  }
  return out;
}

SignedLog boundary_determinant(const FundamentalMatrix& y, const BoundaryMatrices& bc) {
  // M + N Y S = (M S^-1 + N Y) S with S the diagonal of column scales. The
  // M S^-1 entries can underflow on long intervals, so each row is carried
  // with its own exponent offset t_i (its largest log magnitude).
  const Matrix4 ny = bc.N * y.y;
  Matrix4 a = Matrix4::Zero();
  double row_log_sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    double t = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < 4; ++j) {
      if (bc.M(i, j) != 0.0) t = std::max(t, std::log(std::abs(bc.M(i, j))) - y.column_log_scale[j]);
      if (ny(i, j) != 0.0) t = std::max(t, std::log(std::abs(ny(i, j))));
    }
    if (!std::isfinite(t)) return {-std::numeric_limits<double>::infinity(), 1};
    for (int j = 0; j < 4; ++j) {
      if (bc.M(i, j) != 0.0) a(i, j) += bc.M(i, j) * std::exp(-y.column_log_scale[j] - t);
      if (ny(i, j) != 0.0) a(i, j) += ny(i, j) * std::exp(-t);
    }
    row_log_sum += t;
  }
  const double det = Eigen::FullPivLU<Matrix4>(a).determinant();
  return {std::log(std::abs(det)) + row_log_sum + y.log_scale(), det < 0.0 ? -1 : 1};
}

SignedLog log_det_ratio(double L, const ModelParams& p, const IntegrationOptions& options) {
  if (!std::isfinite(L) || !(L > 0.0)) throw DomainError("det_ratio: length must be positive");
  const double lc = critical_length(p);
  if (std::abs(L - lc) <= kSingularWindow) {
    throw SingularityError("det_ratio: L=" + std::to_string(L) +
                           " is at the critical length, where the saddle operator has a zero mode");
  }
  const BoundaryMatrices bc = neumann_boundary_matrices();

  double length = L;
  FundamentalMatrix saddle;
  if (L < lc) {
    saddle = integrate_fundamental(OperatorSpec::uniform_saddle(p), L, options);
  } else {
    const Instanton inst = Instanton::for_length(L, p);
    length = inst.length();
    saddle = integrate_fundamental(OperatorSpec::nonuniform_saddle(inst), length, options);
  }
  const FundamentalMatrix stable =
      closed_form_fundamental(OperatorSpec::uniform_stable(p), length, options.rescale_threshold);

  const SignedLog num = boundary_determinant(stable, bc);
  const SignedLog den = boundary_determinant(saddle, bc);
  if (!std::isfinite(den.log_abs)) {
    throw SingularityError("det_ratio: saddle boundary determinant vanished at L=" + std::to_string(L));
  }
  return {num.log_abs - den.log_abs, num.sign * den.sign};
}

double det_ratio(double L, const ModelParams& p, const IntegrationOptions& options) {
  const double value = log_det_ratio(L, p, options).value();
  if (!std::isfinite(value)) {
    throw NumericalOverflowError("det_ratio: ratio not representable as a double at L=" + std::to_string(L));
  }
  return value;
}

double negative_eigenvalue(double L, const ModelParams& p, const LatticeOptions& options) {
  if (!std::isfinite(L) || !(L > 0.0)) throw DomainError("negative_eigenvalue: length must be positive");
  if (L <= critical_length(p)) return -p.gap();
  if (options.base_sites < 16) throw DomainError("negative_eigenvalue: need at least 16 base sites");
  if (options.max_levels < 3) throw DomainError("negative_eigenvalue: need at least 3 grid levels");

  const FieldProfile background = Instanton::for_length(L, p).profile();
  // eigenvalue error is even in the spacing, leading term h^2
  std::vector<double> level;
  std::size_t sites = options.base_sites;
  double previous = 0.0;
  double current = 0.0;
  for (std::size_t k = 0; k < options.max_levels; ++k) {
    level.push_back(FluctuationLattice(background, p, sites).lowest_eigenvalue());
    sites = 2 * sites - 1;
    if (level.size() < 2) continue;
    previous = current;
    current = (4.0 * level[level.size() - 1] - level[level.size() - 2]) / 3.0;
    if (level.size() < 3) continue;
    if (std::abs(current - previous) <= options.tolerance * std::abs(current)) {
      if (!(current < 0.0)) {
        throw ConvergenceError("negative_eigenvalue: lowest eigenvalue is not negative at L=" + std::to_string(L));
      }
      return current;
    }
  }
  throw ConvergenceError("negative_eigenvalue: Richardson estimates " + std::to_string(previous) + " and " +
                         std::to_string(current) + " still disagree at L=" + std::to_string(L) + " after " +
                         std::to_string(level.size()) + " grid levels");
}

PrefactorEvaluation evaluate_prefactor(double L, const ModelParams& p, const IntegrationOptions& integration,
                                       const LatticeOptions& lattice) {
  if (!std::isfinite(L) || !(L > 0.0)) throw DomainError("prefactor: length must be positive");
  if (std::abs(L - critical_length(p)) <= kPrefactorExclusion) {
    throw SingularityError("prefactor: L=" + std::to_string(L) + " lies within 1e-6 of the critical length");
  }
  const SignedLog ratio = log_det_ratio(L, p, integration);
  const double lambda = negative_eigenvalue(L, p, lattice);
  const double gamma0 = std::exp(0.5 * ratio.log_abs) * std::abs(lambda) / std::numbers::pi;
  return {gamma0, lambda, ratio};
}

double prefactor(double L, const ModelParams& p) { return evaluate_prefactor(L, p).gamma0; }

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_line: need matching samples, at least two");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("fit_line: abscissae are all equal");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

LineFit fit_critical_exponent(const ModelParams& p, Side side, std::pair<double, double> window,
                              std::size_t n_points) {
  const auto [lo, hi] = window;
  if (n_points < 8) throw DomainError("fit_critical_exponent: need at least 8 points");
  if (!(lo > kPrefactorExclusion) || !(hi > lo)) {
    throw DomainError("fit_critical_exponent: window must satisfy 1e-6 < lo < hi");
  }
  const double lc = critical_length(p);
  if (side == Side::below && !(hi < lc)) {
    throw DomainError("fit_critical_exponent: window reaches L <= 0");
  }
  if (side == Side::above && !(lc + hi < max_instanton_length(p))) {
    throw DomainError("fit_critical_exponent: window extends past the instanton family");
  }

  std::vector<double> log_distance(n_points);
  std::vector<double> log_gamma(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n_points - 1);
    const double delta = lo * std::pow(hi / lo, t);
    const double L = side == Side::below ? lc - delta : lc + delta;
    log_distance[i] = std::log(delta);
    log_gamma[i] = std::log(prefactor(L, p));
  }
  return fit_line(log_distance, log_gamma);
}

}  // namespace kescape
