#include "kescape/elliptic.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "kescape/errors.hpp"

namespace kescape::elliptic {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxAgmTerms = 40;

void require_parameter(double m, bool allow_one, const char* who) {
  if (!(m >= 0.0) || m > 1.0 || (!allow_one && m == 1.0)) {
    throw DomainError(std::string(who) + ": parameter m=" + std::to_string(m) +
                      (allow_one ? " outside [0, 1]" : " outside [0, 1)"));
  }
}

}  // namespace

double complete_k(double m) {
  require_parameter(m, false, "complete_k");
  double a = 1.0;
  double b = std::sqrt(1.0 - m);
  for (int n = 0; n < kMaxAgmTerms && std::abs(a - b) > kEps * a; ++n) {
    const double next_a = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = next_a;
  }
  return std::numbers::pi / (2.0 * a);
}

double complete_e(double m) {
  require_parameter(m, true, "complete_e");
  if (m == 1.0) return 1.0;
  // E = K (1 - sum_n 2^(n-1) c_n^2), c_0^2 = m
  double a = 1.0;
  double b = std::sqrt(1.0 - m);
  double weight = 0.5;
  double sum = weight * m;
  for (int n = 0; n < kMaxAgmTerms; ++n) {
    const double c = 0.5 * (a - b);
    weight *= 2.0;
    sum += weight * c * c;
    const double next_a = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = next_a;
    if (std::abs(c) <= kEps * a) break;
  }
  return std::numbers::pi / (2.0 * a) * (1.0 - sum);
}

JacobiTriple jacobi(double u, double m) {
  require_parameter(m, true, "jacobi");
  if (!std::isfinite(u)) throw DomainError("jacobi: non-finite argument");

  if (m == 0.0) return {std::sin(u), std::cos(u), 1.0};
  if (m == 1.0) {
    const double sech = 1.0 / std::cosh(u);
    return {std::tanh(u), sech, sech};
  }

  // sn is odd, cn and dn are even.
  const double sign = u < 0.0 ? -1.0 : 1.0;
  const double x = std::abs(u);

  std::array<double, kMaxAgmTerms + 1> a{};
  std::array<double, kMaxAgmTerms + 1> c{};
  a[0] = 1.0;
  c[0] = std::sqrt(m);
  double b = std::sqrt(1.0 - m);
  int n = 0;
  while (n < kMaxAgmTerms && std::abs(c[n]) > kEps * a[n]) {
    a[n + 1] = 0.5 * (a[n] + b);
    c[n + 1] = 0.5 * (a[n] - b);
    b = std::sqrt(a[n] * b);
    ++n;
  }
  if (n == 0) {
    // m below ~1e-31: circular functions to working precision
    const double cx = std::cos(x);
    return {sign * std::sin(x), cx, std::sqrt((1.0 - m) + m * cx * cx)};
  }

  double phi = std::ldexp(a[n] * x, n);
  for (; n > 0; --n) phi = 0.5 * (phi + std::asin(c[n] / a[n] * std::sin(phi)));

  const double sn = std::sin(phi);
  const double cn = std::cos(phi);
  // dn^2 = (1 - m) + m cn^2 has no cancellation, unlike 1 - m sn^2 or the
  // cos(phi1 - phi0) ratio, which is 0/0 at u = K.
  const double dn = std::sqrt((1.0 - m) + m * cn * cn);
  return {sign * sn, cn, dn};
}

}  // namespace kescape::elliptic
