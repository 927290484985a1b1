#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace oracle {

long double complete_k(long double m) {
  long double a = 1.0L;
  long double b = std::sqrt(1.0L - m);
  for (int i = 0; i < 64 && std::fabs(a - b) > 1e-19L * a; ++i) {
    const long double next = 0.5L * (a + b);
    b = std::sqrt(a * b);
    a = next;
  }
  return std::numbers::pi_v<long double> / (2.0L * a);
}

long double complete_e(long double m) {
  if (m == 1.0L) return 1.0L;
  long double a = 1.0L;
  long double b = std::sqrt(1.0L - m);
  long double c = std::sqrt(m);
  long double sum = 0.5L * c * c;
  long double weight = 0.5L;
  for (int i = 0; i < 64 && std::fabs(c) > 1e-19L; ++i) {
    c = 0.5L * (a - b);
    const long double next = 0.5L * (a + b);
    b = std::sqrt(a * b);
    a = next;
    weight *= 2.0L;
    sum += weight * c * c;
  }
  return (1.0L - sum) * std::numbers::pi_v<long double> / (2.0L * a);
}

namespace {

double incomplete_f(double phi, double k, double big_k) {
  const double n = std::round(phi / std::numbers::pi);
  return 2.0 * n * big_k + std::ellint_1(k, phi - n * std::numbers::pi);
}

}  // namespace

Triple jacobi_by_inversion(double u, double m) {
  if (!(m >= 0.0 && m < 1.0)) throw std::invalid_argument("oracle jacobi: m in [0, 1)");
  const double k = std::sqrt(m);
  const double big_k = std::comp_ellint_1(k);
  const double x = std::abs(u);
  double lo = x * std::sqrt(1.0 - m) * 0.999 - 1e-300;
  double hi = x * 1.001 + 1e-300;
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (incomplete_f(mid, k, big_k) < x) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double phi = 0.5 * (lo + hi);
  const double s = std::sin(phi);
  const double c = std::cos(phi);
  return {u < 0 ? -s : s, c, std::sqrt(1.0 - m * s * s)};
}

double m_for_length(double L, double mu1, double mu2) {
  const long double k = std::sqrt(static_cast<long double>(mu1 - mu2));
  long double lo = 0.0L;
  long double hi = 1.0L - 1e-18L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    if (2.0L * complete_k(mid) / k < L) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return static_cast<double>(0.5L * (lo + hi));
}

long double prefactor_closed_form(long double L, long double mu1, long double mu2) {
  const long double g = std::sqrt(mu1 - mu2);
  const long double a = std::sinh(g * L) / std::sinh(std::sqrt(2.0L * mu2) * L);
  const long double b = std::sinh(std::sqrt(2.0L * mu1) * L) / std::fabs(std::sin(g * L));
  return std::pow(mu1 / mu2, 0.25L) * std::sqrt(a) * std::sqrt(b) * (mu1 - mu2) / std::numbers::pi_v<long double>;
}

Background instanton_background(double L, double mu1, double mu2) {
  const double m = m_for_length(L, mu1, mu2);
  const double g = mu1 - mu2;
  const double k = std::sqrt(g);
  const double a = std::sqrt(m * ((2.0 * mu1 - mu2) - m * g));
  const double b = std::sqrt(std::max(0.0, mu2 - m * g));
  return {L, [=](double z, double& phi1, double& phi2) {
            const Triple t = jacobi_by_inversion(k * z, m);
            phi1 = a * t.sn;
            phi2 = b * t.dn;
          }};
}

Background uniform_background(double L, double phi1, double phi2) {
  return {L, [=](double, double& u, double& v) {
            u = phi1;
            v = phi2;
          }};
}

namespace {

struct Site {
  double h11, h12, h22;
};

std::vector<Site> hessians(const Background& bg, double mu1, double mu2, std::size_t n) {
  std::vector<Site> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = -0.5 * bg.length + bg.length * static_cast<double>(i) / static_cast<double>(n - 1);
    double u = 0.0;
    double v = 0.0;
    bg.fields(z, u, v);
    out[i] = {-mu1 + 3.0 * u * u + v * v, 2.0 * u * v, -mu2 + 3.0 * v * v + u * u};
  }
  return out;
}

// Field-major ordering: index f * n + i. Rows at the ends use the mirrored
// ghost site, so the end rows carry -2/h^2 towards the interior.
Eigen::SparseMatrix<double> ghost_operator(const Background& bg, double mu1, double mu2, std::size_t n) {
  const double h = bg.length / static_cast<double>(n - 1);
  const double s = 1.0 / (h * h);
  const auto hs = hessians(bg, mu1, mu2, n);
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t f = 0; f < 2; ++f) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<int>(f * n + i);
      t.emplace_back(r, r, 2.0 * s + (f == 0 ? hs[i].h11 : hs[i].h22));
      t.emplace_back(r, static_cast<int>((1 - f) * n + i), hs[i].h12);
      if (i == 0) {
        t.emplace_back(r, r + 1, -2.0 * s);
      } else if (i == n - 1) {
        t.emplace_back(r, r - 1, -2.0 * s);
      } else {
        t.emplace_back(r, r - 1, -s);
        t.emplace_back(r, r + 1, -s);
      }
    }
  }
  Eigen::SparseMatrix<double> a(static_cast<int>(2 * n), static_cast<int>(2 * n));
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

// Trapezoid weights make W A symmetric; A x = lambda x becomes W A x = lambda W x.
Eigen::VectorXd trapezoid_weights(std::size_t n) {
  Eigen::VectorXd w = Eigen::VectorXd::Ones(static_cast<int>(2 * n));
  for (std::size_t f = 0; f < 2; ++f) {
    w(static_cast<int>(f * n)) = 0.5;
    w(static_cast<int>(f * n + n - 1)) = 0.5;
  }
  return w;
}

Eigen::VectorXd generalized_eigenvalues(const Background& bg, double mu1, double mu2, std::size_t n) {
  const Eigen::MatrixXd a = Eigen::MatrixXd(ghost_operator(bg, mu1, mu2, n));
  const Eigen::VectorXd w = trapezoid_weights(n);
  Eigen::MatrixXd wa = w.asDiagonal() * a;
  wa = 0.5 * (wa + wa.transpose()).eval();
  const Eigen::MatrixXd b = w.asDiagonal();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(wa, b, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

double lattice_lowest_eigenvalue(const Background& bg, double mu1, double mu2, std::size_t n) {
  return generalized_eigenvalues(bg, mu1, mu2, n)(0);
}

std::vector<double> lattice_spectrum(const Background& bg, double mu1, double mu2, std::size_t n) {
  const Eigen::VectorXd ev = generalized_eigenvalues(bg, mu1, mu2, n);
  return {ev.data(), ev.data() + ev.size()};
}

LogDet lattice_log_det_ratio(const Background& stable, const Background& saddle, double mu1, double mu2,
                             std::size_t n) {
  auto log_det = [&](const Background& bg) {
    Eigen::SparseMatrix<double> a = ghost_operator(bg, mu1, mu2, n);
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw std::runtime_error("oracle: SparseLU failed");
    return LogDet{static_cast<double>(lu.logAbsDeterminant()), static_cast<int>(lu.signDeterminant())};
  };
  const LogDet s = log_det(stable);
  const LogDet u = log_det(saddle);
  return {s.log_abs - u.log_abs, s.sign * u.sign};
}

}  // namespace oracle
