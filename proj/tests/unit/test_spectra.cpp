#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kescape/errors.hpp"
#include "kescape/forman.hpp"
#include "kescape/spectra.hpp"
#include "oracles.hpp"

using namespace kescape;

TEST_SUITE("spectra") {
  TEST_CASE("lowest modes") {
    const ModelParams p(4, 2);
    const auto st = spectrum_uniform(1.0, p, OperatorKind::stable, 4);
    CHECK(st.eigenvalues.size() == 10);
    CHECK(st.eigenvalues[0].value == 2.0);
    CHECK(st.eigenvalues[0].branch == Branch::field2);
    CHECK(st.eigenvalues[0].index == 0);
    CHECK(st.eigenvalues[1].value == 8.0);
    CHECK(st.negative_count() == 0);

    const auto sd = spectrum_uniform(1.0, p, OperatorKind::saddle, 4);
    CHECK(sd.eigenvalues[0].value == -2.0);
    CHECK(sd.eigenvalues[0].branch == Branch::field1);
    CHECK(sd.negative_count() == 1);
  }

  TEST_CASE("soft mode at the critical length") {
    const ModelParams p(3, 2);
    const double lc = critical_length(p);
    const auto at = spectrum_uniform(lc, p, OperatorKind::saddle, 3);
    bool found = false;
    for (const auto& e : at.eigenvalues)
      if (e.branch == Branch::field1 && e.index == 1) {
        CHECK(std::abs(e.value) < 1e-14);
        found = true;
      }
    CHECK(found);
    CHECK(spectrum_uniform(lc * (1 - 1e-6), p, OperatorKind::saddle).negative_count() == 1);
    CHECK(spectrum_uniform(lc * (1 + 1e-6), p, OperatorKind::saddle).negative_count() == 2);
  }

  TEST_CASE("ordering within branches") {
    const ModelParams p(4, 2);
    const auto r = spectrum_uniform(2.5, p, OperatorKind::saddle);
    for (Branch b : {Branch::field1, Branch::field2}) {
      double prev = -1e300;
      int prev_index = -1;
      std::size_t count = 0;
      for (const auto& e : r.eigenvalues) {
        if (e.branch != b) continue;
        CHECK(e.index == prev_index + 1);
        CHECK(e.value > prev);
        prev = e.value;
        prev_index = e.index;
        ++count;
      }
      CHECK(count == 129);
    }
    CHECK_THROWS_AS(spectrum_uniform(-1.0, p, OperatorKind::stable), DomainError);
    CHECK_THROWS_AS(spectrum_uniform(1.0, p, OperatorKind::stable, 0), DomainError);
  }

  TEST_CASE("closed-form prefactor against the long double evaluation") {
    const ModelParams p(4, 2);
    for (double L : {0.05, 0.5, 1.0, 2.0, 2.2}) {
      CHECK(prefactor_below(L, p) ==
            doctest::Approx(static_cast<double>(oracle::prefactor_closed_form(L, 4, 2))).epsilon(1e-13));
    }
    // large mu keeps the sinh ratios finite through log form
    const ModelParams big(5000, 4999);
    CHECK(std::isfinite(prefactor_below(3.0, big)));
    CHECK_THROWS_AS(prefactor_below(critical_length(p), p), DomainError);
    CHECK_THROWS_AS(prefactor_below(3.0, p), DomainError);
    CHECK_THROWS_AS(prefactor_below(0.0, p), DomainError);
  }

  TEST_CASE("inverse square root divergence below the critical length") {
    const ModelParams p(4, 2);
    const double lc = critical_length(p);
    std::vector<double> x, y;
    for (int i = 0; i <= 12; ++i) {
      const double d = 1e-6 * std::pow(1e3, i / 12.0);
      x.push_back(std::log(d));
      y.push_back(std::log(prefactor_below(lc - d, p)));
    }
    CHECK(fit_line(x, y).slope == doctest::Approx(-0.5).epsilon(0.02));
    CHECK(std::abs(fit_line(x, y).slope + 0.5) < 0.01);
  }

  TEST_CASE("lattice eigenvalue-product oracle at L = 1") {
    const ModelParams p(4, 2);
    const auto stable = oracle::uniform_background(1.0, 2.0, 0.0);
    const auto saddle = oracle::uniform_background(1.0, 0.0, std::sqrt(2.0));
    const auto a = oracle::lattice_log_det_ratio(stable, saddle, 4, 2, 401);
    const auto b = oracle::lattice_log_det_ratio(stable, saddle, 4, 2, 801);
    CHECK(a.sign == -1);
    const double ratio = std::exp(oracle::richardson(a.log_abs, b.log_abs));
    const double gamma0 = std::sqrt(ratio) * p.gap() / std::numbers::pi;
    CHECK(gamma0 == doctest::Approx(prefactor_below(1.0, p)).epsilon(1e-4));
  }

  TEST_CASE("Kramers rate") {
    const auto r = kramers_rate(2.5, 1.7, -1.0, 0.5);
    CHECK(r.gamma == doctest::Approx(1.7 * std::exp(-5.0)).epsilon(1e-15));
    CHECK(r.delta_e == 2.5);
    CHECK(r.lambda_neg == -1.0);
    CHECK(kramers_rate(0.0, 3.0, -1.0, 0.1).gamma == 3.0);
    CHECK(kramers_rate(1.0, 3.0, -1.0, 1e-3).gamma < 1e-300);
    CHECK_THROWS_AS(kramers_rate(1.0, 1.0, -1.0, 0.0), DomainError);
    CHECK_THROWS_AS(kramers_rate(1.0, 1.0, -1.0, -0.5), DomainError);
    CHECK_THROWS_AS(kramers_rate(1.0, 1.0, 0.5, 0.5), DomainError);
  }

  TEST_CASE("log_sinh") {
    for (double x : {1e-8, 0.3, 5.0, 40.0}) CHECK(log_sinh(x) == doctest::Approx(std::log(std::sinh(x))).epsilon(1e-14));
    CHECK(log_sinh(2000.0) == doctest::Approx(2000.0 - std::log(2.0)).epsilon(1e-15));
  }
}
