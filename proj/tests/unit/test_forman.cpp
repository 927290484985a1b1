#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/LU>

#include "kescape/errors.hpp"
#include "kescape/forman.hpp"
#include "kescape/spectra.hpp"
#include "oracles.hpp"

using namespace kescape;

namespace {

// [[cosh wL, sinh wL / w], [w sinh wL, cosh wL]] per field, in (eta1, eta2, eta1', eta2') order.
Matrix4 hyperbolic_blocks(double w1, double w2, double L) {
  Matrix4 y = Matrix4::Zero();
  const double w[2] = {w1, w2};
  for (int f = 0; f < 2; ++f) {
    y(f, f) = std::cosh(w[f] * L);
    y(f, f + 2) = std::sinh(w[f] * L) / w[f];
    y(f + 2, f) = w[f] * std::sinh(w[f] * L);
    y(f + 2, f + 2) = std::cosh(w[f] * L);
  }
  return y;
}

double max_rel(const Matrix4& a, const Matrix4& b) {
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_SUITE("forman") {
  TEST_CASE("Neumann boundary matrices") {
    const auto bc = neumann_boundary_matrices();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        CHECK(bc.M(i, j) == ((i == 0 && j == 2) || (i == 1 && j == 3) ? 1.0 : 0.0));
        CHECK(bc.N(i, j) == ((i == 2 && j == 2) || (i == 3 && j == 3) ? 1.0 : 0.0));
      }
    Eigen::Vector4d constant(0.7, -1.3, 0.0, 0.0);
    CHECK((bc.M * constant + bc.N * constant).norm() == 0.0);
    // sin(pi z / L) has zero slope at +-L/2 and so satisfies the condition;
    // cos(pi z / L) does not.
    const double L = 2.0;
    const double w = std::numbers::pi / L;
    auto sine = [&](double z) { return Eigen::Vector4d(std::sin(w * z), 0, w * std::cos(w * z), 0); };
    auto cosine = [&](double z) { return Eigen::Vector4d(std::cos(w * z), 0, -w * std::sin(w * z), 0); };
    CHECK((bc.M * sine(-L / 2) + bc.N * sine(L / 2)).norm() < 1e-15);
    CHECK((bc.M * cosine(-L / 2) + bc.N * cosine(L / 2)).norm() > 1.0);
    Eigen::FullPivLU<Matrix4> lu(bc.M + bc.N);
    CHECK(lu.rank() == 2);
    Eigen::FullPivLU<Eigen::Matrix<double, 4, 8>> lu2((Eigen::Matrix<double, 4, 8>() << bc.M, bc.N).finished());
    CHECK(lu2.rank() == 4);
  }

  TEST_CASE("uniform stable fundamental matrix") {
    const ModelParams p(4, 2);
    const auto spec = OperatorSpec::uniform_stable(p);
    const auto num = integrate_fundamental(spec, 1.0);
    const Matrix4 exact = hyperbolic_blocks(std::sqrt(8.0), std::sqrt(2.0), 1.0);
    CHECK(max_rel(num.unscaled(), exact) < 1e-9);
    CHECK(max_rel(closed_form_fundamental(spec, 1.0).unscaled(), exact) < 1e-14);
    const double tiny = 1e-8;
    CHECK(max_rel(integrate_fundamental(spec, tiny).unscaled(), hyperbolic_blocks(std::sqrt(8.0), std::sqrt(2.0), tiny)) < 1e-14);
    CHECK_THROWS_AS(integrate_fundamental(spec, 1.0, {.steps = 100}), DomainError);
  }

  TEST_CASE("uniform saddle closed form has circular block") {
    const ModelParams p(3, 2);
    const double L = 1.3;
    const auto y = closed_form_fundamental(OperatorSpec::uniform_saddle(p), L).unscaled();
    // field 1 coefficient is -(mu1 - mu2) = -1: cos/sin
    CHECK(y(0, 0) == doctest::Approx(std::cos(L)));
    CHECK(y(0, 2) == doctest::Approx(std::sin(L)));
    CHECK(y(2, 0) == doctest::Approx(-std::sin(L)));
    CHECK(y(1, 1) == doctest::Approx(std::cosh(2 * L)));
    CHECK(max_rel(integrate_fundamental(OperatorSpec::uniform_saddle(p), L).unscaled(), y) < 1e-10);
  }

  TEST_CASE("fourth-order convergence") {
    const ModelParams p(4, 2);
    const auto spec = OperatorSpec::uniform_stable(p);
    const double L = 3.0;
    const Matrix4 exact = closed_form_fundamental(spec, L).unscaled();
    const double e1 = max_rel(integrate_fundamental(spec, L, {.steps = 256}).unscaled(), exact);
    const double e2 = max_rel(integrate_fundamental(spec, L, {.steps = 512}).unscaled(), exact);
    CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.2));
  }

  TEST_CASE("small-m instanton reduces to the uniform saddle") {
    // phi1 is O(sqrt m), so the cross coupling and hence the difference in Y is too
    const ModelParams p(4, 2);
    auto gap_at = [&](double m) {
      const Instanton inst(m, p);
      const auto a = integrate_fundamental(OperatorSpec::nonuniform_saddle(inst), inst.length()).unscaled();
      const auto b = closed_form_fundamental(OperatorSpec::uniform_saddle(p), inst.length()).unscaled();
      return max_rel(a, b);
    };
    const double d8 = gap_at(1e-8);
    const double d12 = gap_at(1e-12);
    CHECK(d8 < 1e-3);
    CHECK(d12 < 1e-5);
    CHECK(d8 / d12 == doctest::Approx(100.0).epsilon(0.01));
    const Instanton inst(1e-8, p);
    CHECK_THROWS_AS(integrate_fundamental(OperatorSpec::nonuniform_saddle(inst), inst.length() + 0.1), DomainError);
  }

  TEST_CASE("determinant ratio below the critical length matches the closed form") {
    const ModelParams p(4, 2);
    const double L = 0.5 * critical_length(p);
    const double expected = std::pow(std::numbers::pi * static_cast<double>(oracle::prefactor_closed_form(L, 4, 2)) / p.gap(), 2);
    CHECK(std::abs(det_ratio(L, p)) == doctest::Approx(expected).epsilon(1e-6));
  }

  TEST_CASE("determinant ratio above the critical length matches the lattice oracle") {
    const double L = 1.5 * critical_length(ModelParams(4, 2));
    const auto stable = oracle::uniform_background(L, 2.0, 0.0);
    const auto saddle = oracle::instanton_background(L, 4, 2);
    const auto r400 = oracle::lattice_log_det_ratio(stable, saddle, 4, 2, 401);
    const auto r800 = oracle::lattice_log_det_ratio(stable, saddle, 4, 2, 801);
    const auto r1600 = oracle::lattice_log_det_ratio(stable, saddle, 4, 2, 1601);
    const double e1 = oracle::richardson(r400.log_abs, r800.log_abs);
    const double e2 = oracle::richardson(r800.log_abs, r1600.log_abs);
    CHECK(std::abs(e1 - e2) < 1e-4);
    const auto ratio = log_det_ratio(L, ModelParams(4, 2));
    CHECK(ratio.sign == r1600.sign);
    CHECK(std::exp(ratio.log_abs - e2) == doctest::Approx(1.0).epsilon(1e-3));
  }

  TEST_CASE("sign of the saddle determinant and the lattice negative count") {
    const ModelParams p(3, 2);
    const auto bc = neumann_boundary_matrices();
    const double lc = critical_length(p);
    for (double L : {1.2 * lc, 2.0 * lc, 3.0 * lc}) {
      const auto inst = Instanton::for_length(L, p);
      const auto du = boundary_determinant(integrate_fundamental(OperatorSpec::nonuniform_saddle(inst), L), bc);
      const auto spectrum = oracle::lattice_spectrum(oracle::instanton_background(L, 3, 2), 3, 2, 201);
      int negatives = 0;
      for (double v : spectrum) negatives += v < 0;
      CHECK(negatives == 1);
      // an odd number of negative eigenvalues; the stable determinant is positive
      CHECK(du.sign == -1);
      CHECK(boundary_determinant(closed_form_fundamental(OperatorSpec::uniform_stable(p), L), bc).sign == 1);
    }
    // the uniform saddle continued past L_c picks up a second negative mode
    const auto below = boundary_determinant(closed_form_fundamental(OperatorSpec::uniform_saddle(p), 0.9 * lc), bc);
    const auto above = boundary_determinant(closed_form_fundamental(OperatorSpec::uniform_saddle(p), 1.1 * lc), bc);
    CHECK(below.sign == -1);
    CHECK(above.sign == 1);
  }

  TEST_CASE("column rescaling does not change the ratio") {
    const ModelParams p(3, 2);
    for (double L : {4.0, 6.0, 8.0}) {
      const auto a = log_det_ratio(L, p, {.rescale_threshold = 1e100});
      const auto b = log_det_ratio(L, p, {.rescale_threshold = 1e2});
      CHECK(a.sign == b.sign);
      CHECK(std::abs(a.log_abs - b.log_abs) <= 1e-12 * std::abs(a.log_abs));
    }
  }

  TEST_CASE("boundary determinant past the double range") {
    // stable state of (10, 9): coefficients 2 mu1 and mu1 - mu2; exact det = a1 sinh(a1 L) a2 sinh(a2 L)
    const ModelParams p(10, 9);
    const double L = 200.0;
    const double a1 = std::sqrt(20.0);
    const double a2 = 1.0;
    const double exact = (a1 + a2) * L + std::log(a1 * a2 / 4.0);
    const auto bc = neumann_boundary_matrices();
    const auto y = integrate_fundamental(OperatorSpec::uniform_stable(p), L, {.steps = 65536, .rescale_threshold = 1e50});
    CHECK(y.log_scale() > 709.0);
    const auto numeric = boundary_determinant(y, bc);
    const auto closed = boundary_determinant(closed_form_fundamental(OperatorSpec::uniform_stable(p), L, 1e50), bc);
    CHECK(numeric.sign == 1);
    CHECK(closed.sign == 1);
    // RK4 truncation: the exponent picks up about L (a1 h)^4 / 120 with h = L / steps
    CHECK(std::abs(numeric.log_abs - exact) < 1e-6);
    CHECK(closed.log_abs == doctest::Approx(exact).epsilon(1e-14));
  }

  TEST_CASE("singular length") {
    const ModelParams p(4, 2);
    const double lc = critical_length(p);
    CHECK_THROWS_AS(det_ratio(lc, p), SingularityError);
    CHECK_THROWS_AS(det_ratio(lc + 5e-10, p), SingularityError);
    CHECK_THROWS_AS(prefactor(lc - 5e-7, p), SingularityError);
    CHECK_THROWS_AS(det_ratio(-1.0, p), DomainError);
  }

  TEST_CASE("negative eigenvalue") {
    const ModelParams p(4, 2);
    const double lc = critical_length(p);
    CHECK(negative_eigenvalue(0.5, p) == -2.0);
    CHECK(negative_eigenvalue(lc, p) == -2.0);
    CHECK(negative_eigenvalue(lc + 1e-5, p) == doctest::Approx(-2.0).epsilon(1e-3));

    const double L = 2 * lc;
    const auto bg = oracle::instanton_background(L, 4, 2);
    const double o1 = oracle::richardson(oracle::lattice_lowest_eigenvalue(bg, 4, 2, 201),
                                         oracle::lattice_lowest_eigenvalue(bg, 4, 2, 401));
    const double o2 = oracle::richardson(oracle::lattice_lowest_eigenvalue(bg, 4, 2, 401),
                                         oracle::lattice_lowest_eigenvalue(bg, 4, 2, 801));
    CHECK(std::abs(o1 - o2) <= 1e-4 * std::abs(o2));
    CHECK(negative_eigenvalue(L, p) == doctest::Approx(o2).epsilon(1e-4));
    CHECK_THROWS_AS(negative_eigenvalue(L, p, {.base_sites = 8}), DomainError);
    CHECK_THROWS_AS(negative_eigenvalue(L, p, {.base_sites = 20, .tolerance = 1e-12}), ConvergenceError);
  }

  TEST_CASE("prefactor") {
    const ModelParams p(4, 2);
    const double lc = critical_length(p);
    CHECK(prefactor(0.8 * lc, p) == doctest::Approx(prefactor_below(0.8 * lc, p)).epsilon(1e-6));
    double prev_below = 0, prev_above = 0;
    for (double d : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
      const double b = prefactor(lc - d, p);
      const double a = prefactor(lc + d, p);
      CHECK(b > prev_below);
      CHECK(a > prev_above);
      prev_below = b;
      prev_above = a;
    }
    const auto ev = evaluate_prefactor(1.3 * lc, p);
    CHECK(ev.lambda_neg < 0);
    CHECK(ev.gamma0 == doctest::Approx(std::exp(0.5 * ev.det_ratio.log_abs) * std::abs(ev.lambda_neg) / std::numbers::pi));
  }

  TEST_CASE("line fits") {
    std::vector<double> x, y;
    const double c = 3.7;
    for (int i = 0; i < 10; ++i) {
      const double d = 1e-4 * std::pow(100.0, i / 9.0);
      x.push_back(std::log(d));
      y.push_back(std::log(c * std::pow(d, -0.5)));
    }
    const auto fit = fit_line(x, y);
    CHECK(std::abs(fit.slope + 0.5) < 1e-10);
    CHECK(std::abs(fit.intercept - std::log(c)) < 1e-10);
    CHECK_THROWS_AS(fit_line(std::vector<double>{1.0}, std::vector<double>{1.0}), DomainError);
    CHECK_THROWS_AS(fit_line(std::vector<double>{1.0, 1.0}, std::vector<double>{1.0, 2.0}), DomainError);
  }

  TEST_CASE("critical exponent fits") {
    const ModelParams p(4, 2);
    const auto below = fit_critical_exponent(p, Side::below, {1e-4, 1e-2}, 12);
    CHECK(std::abs(below.slope + 0.5) < 0.01);
    const auto above = fit_critical_exponent(p, Side::above, {1e-3, 1e-1}, 12);
    CHECK(std::abs(above.slope + 0.5) < 0.05);
    CHECK_THROWS_AS(fit_critical_exponent(p, Side::below, {1e-4, 1e-2}, 7), DomainError);
    CHECK_THROWS_AS(fit_critical_exponent(p, Side::below, {1e-2, 1e-4}, 8), DomainError);
    CHECK_THROWS_AS(fit_critical_exponent(p, Side::below, {1e-4, 5.0}, 8), DomainError);
    CHECK_THROWS_AS(fit_critical_exponent(p, Side::above, {1e-4, 1e3}, 8), DomainError);
  }
}
