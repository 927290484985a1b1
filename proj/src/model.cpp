#include "kescape/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "kescape/errors.hpp"

namespace kescape {

namespace {

struct GaussRule {
  std::array<double, 8> nodes;
  std::array<double, 8> weights;
};

// 8-point Gauss-Legendre rule on [-1, 1], roots of P_8 by Newton iteration.
const GaussRule& gauss_legendre_8() {
  static const GaussRule rule = [] {
    GaussRule r{};
    constexpr int n = 8;
    for (int i = 0; i < n; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = pk;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      r.nodes[i] = x;
      r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
  }();
  return rule;
}

double largest_m_below_one() { return std::nextafter(1.0, 0.0); }

// Upper end of the instanton family: the amplitude bound mu2/(mu1 - mu2) or
// the last double below one.
double m_ceiling(const ModelParams& p) {
  const double bound = p.mu2() / p.gap();
  return bound < 1.0 ? bound : largest_m_below_one();
}

}  // namespace

ModelParams::ModelParams(double mu1, double mu2) : mu1_(mu1), mu2_(mu2) {
  if (!std::isfinite(mu1) || !std::isfinite(mu2) || !(mu2 > 0.0) || !(mu1 > mu2)) {
    throw DomainError("model parameters require mu1 > mu2 > 0 (got mu1=" + std::to_string(mu1) +
                      ", mu2=" + std::to_string(mu2) + ")");
  }
}

double potential(double phi1, double phi2, const ModelParams& p) noexcept {
  const double a = phi1 * phi1;
  const double b = phi2 * phi2;
  return -0.5 * p.mu1() * a + 0.25 * a * a - 0.5 * p.mu2() * b + 0.25 * b * b + 0.5 * a * b;
}

FieldPoint potential_gradient(double phi1, double phi2, const ModelParams& p) noexcept {
  const double a = phi1 * phi1;
  const double b = phi2 * phi2;
  return {phi1 * (-p.mu1() + a + b), phi2 * (-p.mu2() + b + a)};
}

PotentialHessian potential_hessian(double phi1, double phi2, const ModelParams& p) noexcept {
  const double a = phi1 * phi1;
  const double b = phi2 * phi2;
  return {-p.mu1() + 3.0 * a + b, 2.0 * phi1 * phi2, -p.mu2() + 3.0 * b + a};
}

UniformState UniformState::metastable(const ModelParams& p, int sign) {
  return {(sign < 0 ? -1.0 : 1.0) * std::sqrt(p.mu1()), 0.0, StateKind::metastable};
}

UniformState UniformState::saddle(const ModelParams& p, int sign) {
  return {0.0, (sign < 0 ? -1.0 : 1.0) * std::sqrt(p.mu2()), StateKind::saddle};
}

double critical_length(const ModelParams& p) { return std::numbers::pi / std::sqrt(p.gap()); }

double length_from_m(double m, const ModelParams& p) {
  if (!(m >= 0.0) || m >= 1.0) {
    throw DomainError("length_from_m: m=" + std::to_string(m) + " outside [0, 1)");
  }
  return 2.0 * elliptic::complete_k(m) / std::sqrt(p.gap());
}

double max_instanton_length(const ModelParams& p) { return length_from_m(m_ceiling(p), p); }

double m_from_length(double L, const ModelParams& p) {
  const double lc = critical_length(p);
  if (!std::isfinite(L) || L <= lc) {
    throw DomainError("m_from_length: no nonuniform saddle for L=" + std::to_string(L) +
                      " <= L_c=" + std::to_string(lc));
  }
  double lo = 0.0;
  double hi = largest_m_below_one();
  if (length_from_m(hi, p) < L) {
    throw DomainError("m_from_length: L=" + std::to_string(L) +
                      " exceeds the longest instanton representable in double precision");
  }
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi || hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * hi) {
      break;
    }
    if (length_from_m(mid, p) < L) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double m = std::abs(length_from_m(hi, p) - L) <= std::abs(length_from_m(lo, p) - L) ? hi : lo;
  if (m > p.mu2() / p.gap()) {
    throw ValidityError("m_from_length: m=" + std::to_string(m) + " exceeds mu2/(mu1-mu2)=" +
                        std::to_string(p.mu2() / p.gap()) +
                        "; the instanton amplitude would be imaginary");
  }
  return m;
}

FieldProfile uniform_profile(const UniformState& state, double length) {
  return {length, [phi1 = state.phi1, phi2 = state.phi2](double) {
            return FieldJet{phi1, phi2, 0.0, 0.0};
          }};
}

Instanton::Instanton(double m, const ModelParams& p, int sign1, int sign2)
    : m_(m),
      length_(length_from_m(m, p)),
      sign1_(sign1 < 0 ? -1 : 1),
      sign2_(sign2 < 0 ? -1 : 1),
      params_(p),
      wavenumber_(std::sqrt(p.gap())) {
  const double radicand1 = (2.0 * p.mu1() - p.mu2()) - m * p.gap();
  double radicand2 = p.mu2() - m * p.gap();
  if (radicand2 < 0.0) {
    if (radicand2 < -1e-14 * p.mu2()) {
      throw ValidityError("instanton: m=" + std::to_string(m) + " makes the phi2 amplitude imaginary");
    }
    radicand2 = 0.0;
  }
  amplitude1_ = std::sqrt(m * radicand1);
  amplitude2_ = std::sqrt(radicand2);
}

Instanton Instanton::for_length(double L, const ModelParams& p, int sign1, int sign2) {
  return Instanton(m_from_length(L, p), p, sign1, sign2);
}

FieldJet Instanton::eval(double z) const {
  const double half = 0.5 * length_;
  if (!(std::abs(z) <= half * (1.0 + 1e-12) + 1e-14)) {
    throw DomainError("instanton: z=" + std::to_string(z) + " outside [-L/2, L/2]");
  }
  const auto j = elliptic::jacobi(wavenumber_ * z, m_);
  const double a = sign1_ * amplitude1_;
  const double b = sign2_ * amplitude2_;
  return {a * j.sn, b * j.dn, a * wavenumber_ * j.cn * j.dn, -b * wavenumber_ * m_ * j.sn * j.cn};
}

FieldProfile Instanton::profile() const {
  return {length_, [inst = *this](double z) { return inst.eval(z); }};
}

FieldPair sample(const FieldProfile& profile, std::size_t n_points) {
  if (n_points < 2) throw DomainError("sample: need at least 2 grid points");
  FieldPair out;
  out.z.resize(n_points);
  out.phi1.resize(n_points);
  out.phi2.resize(n_points);
  const double half = 0.5 * profile.length;
  const double h = profile.length / static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) {
    double z = -half + h * static_cast<double>(i);
    if (i == n_points - 1) z = half;
    const FieldJet f = profile.eval(z);
    out.z[i] = z;
    out.phi1[i] = f.phi1;
    out.phi2[i] = f.phi2;
  }
  return out;
}

double euler_lagrange_residual(const FieldPair& fields, const ModelParams& p) {
  const std::size_t n = fields.size();
  if (n < 64) throw DomainError("euler_lagrange_residual: need at least 64 grid points");
  const double inv_h2 = 1.0 / (fields.spacing() * fields.spacing());
  const auto& u = fields.phi1;
  const auto& v = fields.phi2;
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double d2u = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv_h2;
    const double d2v = (v[i - 1] - 2.0 * v[i] + v[i + 1]) * inv_h2;
    const FieldPoint g = potential_gradient(u[i], v[i], p);
    worst = std::max({worst, std::abs(d2u - g.phi1), std::abs(d2v - g.phi2)});
  }
  return worst;
}

double energy(const FieldProfile& profile, const ModelParams& p, std::size_t panels,
              double density_offset) {
  if (panels == 0) throw DomainError("energy: need at least one panel");
  const GaussRule& rule = gauss_legendre_8();
  const double width = profile.length / static_cast<double>(panels);
  const double start = -0.5 * profile.length;
  double total = 0.0;
  for (std::size_t k = 0; k < panels; ++k) {
    const double centre = start + (static_cast<double>(k) + 0.5) * width;
    double panel = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const FieldJet f = profile.eval(centre + 0.5 * width * rule.nodes[i]);
      const double density = 0.5 * (f.dphi1 * f.dphi1 + f.dphi2 * f.dphi2) +
                             potential(f.phi1, f.phi2, p) - density_offset;
      panel += rule.weights[i] * density;
    }
    total += 0.5 * width * panel;
  }
  return total;
}

double lattice_energy(const FieldPair& fields, const ModelParams& p) {
  const std::size_t n = fields.size();
  if (n < 2) throw DomainError("lattice_energy: need at least 2 grid points");
  const double h = fields.spacing();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double weight = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    total += weight * h * potential(fields.phi1[i], fields.phi2[i], p);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double g1 = fields.phi1[i + 1] - fields.phi1[i];
    const double g2 = fields.phi2[i + 1] - fields.phi2[i];
    total += 0.5 * (g1 * g1 + g2 * g2) / h;
  }
  return total;
}

double barrier(double L, const ModelParams& p) {
  if (!std::isfinite(L) || !(L > 0.0)) {
    throw DomainError("barrier: length must be positive (got " + std::to_string(L) + ")");
  }
  if (L <= critical_length(p)) {
    return 0.25 * L * (p.mu1() * p.mu1() - p.mu2() * p.mu2());
  }
  const Instanton inst = Instanton::for_length(L, p);
  const UniformState meta = UniformState::metastable(p);
  const double rest = potential(meta.phi1, meta.phi2, p);
  const auto panels =
      std::max<std::size_t>(128, static_cast<std::size_t>(std::ceil(4.0 * std::sqrt(p.gap()) * L)));
  return energy(inst.profile(), p, panels, rest);
}

}  // namespace kescape
