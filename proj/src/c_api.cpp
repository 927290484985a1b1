#include "kescape/kescape.h"

#include <exception>
#include <new>
#include <string>
#include <vector>

#include "kescape/errors.hpp"
#include "kescape/forman.hpp"
#include "kescape/langevin.hpp"
#include "kescape/model.hpp"
#include "kescape/spectra.hpp"
#include "kescape/version.hpp"

struct kescape_model {
  kescape::ModelParams params;
};

namespace {

thread_local std::string last_error;

kescape_status status_of(kescape::ErrorCode code) {
  using kescape::ErrorCode;
  switch (code) {
    case ErrorCode::domain: return KESCAPE_ERR_DOMAIN;
    case ErrorCode::validity: return KESCAPE_ERR_VALIDITY;
    case ErrorCode::singularity: return KESCAPE_ERR_SINGULARITY;
    case ErrorCode::convergence: return KESCAPE_ERR_CONVERGENCE;
    case ErrorCode::numerical_overflow: return KESCAPE_ERR_OVERFLOW;
    case ErrorCode::instability: return KESCAPE_ERR_INSTABILITY;
    case ErrorCode::insufficient_sampling: return KESCAPE_ERR_SAMPLING;
  }
  return KESCAPE_ERR_INTERNAL;
}

kescape_status fail(kescape_status status, const char* message) {
  last_error = message;
  return status;
}

// Runs `body` with exceptions mapped onto status codes.
template <class F>
kescape_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return KESCAPE_OK;
  } catch (const kescape::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(KESCAPE_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(KESCAPE_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(KESCAPE_ERR_INTERNAL, "unknown error");
  }
}

#define KESCAPE_REQUIRE(cond)                                                         \
  do {                                                                                \
    if (!(cond)) return fail(KESCAPE_ERR_INVALID_ARGUMENT, "null argument: " #cond);  \
  } while (0)

kescape::LatticeConfig to_config(const kescape_lattice_config& c) {
  kescape::LatticeConfig cfg =
      kescape::LatticeConfig::with_default_dt(c.n_sites, c.length, c.epsilon, c.seed, c.max_time);
  if (c.dt != 0.0) cfg.dt = c.dt;
  return cfg;
}

}  // namespace

extern "C" {

const char* kescape_version(void) { return kescape::version_string(); }

const char* kescape_last_error(void) { return last_error.c_str(); }

const char* kescape_status_name(kescape_status status) {
  switch (status) {
    case KESCAPE_OK: return "ok";
    case KESCAPE_ERR_DOMAIN: return "domain";
    case KESCAPE_ERR_VALIDITY: return "validity";
    case KESCAPE_ERR_SINGULARITY: return "singularity";
    case KESCAPE_ERR_CONVERGENCE: return "convergence";
    case KESCAPE_ERR_OVERFLOW: return "numerical_overflow";
    case KESCAPE_ERR_INSTABILITY: return "instability";
    case KESCAPE_ERR_SAMPLING: return "insufficient_sampling";
    case KESCAPE_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case KESCAPE_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

kescape_status kescape_model_create(double mu1, double mu2, kescape_model** out) {
  KESCAPE_REQUIRE(out);
  return guarded([&] { *out = new kescape_model{kescape::ModelParams(mu1, mu2)}; });
}

void kescape_model_destroy(kescape_model* model) { delete model; }

kescape_status kescape_critical_length(const kescape_model* model, double* out) {
  KESCAPE_REQUIRE(model && out);
  return guarded([&] { *out = kescape::critical_length(model->params); });
}

kescape_status kescape_length_from_m(const kescape_model* model, double m, double* out) {
  KESCAPE_REQUIRE(model && out);
  return guarded([&] { *out = kescape::length_from_m(m, model->params); });
}

kescape_status kescape_m_from_length(const kescape_model* model, double length, double* out) {
  KESCAPE_REQUIRE(model && out);
  return guarded([&] { *out = kescape::m_from_length(length, model->params); });
}

kescape_status kescape_max_instanton_length(const kescape_model* model, double* out) {
  KESCAPE_REQUIRE(model && out);
  return guarded([&] { *out = kescape::max_instanton_length(model->params); });
}

kescape_status kescape_instanton_sample(const kescape_model* model, double length, size_t n_points, double* z,
                                        double* phi1, double* phi2) {
  KESCAPE_REQUIRE(model && z && phi1 && phi2);
  return guarded([&] {
    const auto inst = kescape::Instanton::for_length(length, model->params);
    const auto fields = kescape::sample(inst.profile(), n_points);
    for (size_t i = 0; i < n_points; ++i) {
      z[i] = fields.z[i];
      phi1[i] = fields.phi1[i];
      phi2[i] = fields.phi2[i];
    }
  });
}

kescape_status kescape_barrier(const kescape_model* model, double length, double* out) {
  KESCAPE_REQUIRE(model && out);
  return guarded([&] { *out = kescape::barrier(length, model->params); });
}

kescape_status kescape_prefactor(const kescape_model* model, double length, double* gamma0, double* lambda_neg) {
  KESCAPE_REQUIRE(model && gamma0);
  return guarded([&] {
    const auto eval = kescape::evaluate_prefactor(length, model->params);
    *gamma0 = eval.gamma0;
    if (lambda_neg) *lambda_neg = eval.lambda_neg;
  });
}

kescape_status kescape_prefactor_closed_form(const kescape_model* model, double length, double* gamma0) {
  KESCAPE_REQUIRE(model && gamma0);
  return guarded([&] { *gamma0 = kescape::prefactor_below(length, model->params); });
}

kescape_status kescape_det_ratio(const kescape_model* model, double length, double* out) {
  KESCAPE_REQUIRE(model && out);
  return guarded([&] { *out = kescape::det_ratio(length, model->params); });
}

kescape_status kescape_negative_eigenvalue(const kescape_model* model, double length, double* out) {
  KESCAPE_REQUIRE(model && out);
  return guarded([&] { *out = kescape::negative_eigenvalue(length, model->params); });
}

kescape_status kescape_fit_critical_exponent(const kescape_model* model, kescape_side side, double window_lo,
                                             double window_hi, size_t n_points, double* slope,
                                             double* intercept) {
  KESCAPE_REQUIRE(model && slope);
  if (side != KESCAPE_SIDE_BELOW && side != KESCAPE_SIDE_ABOVE) {
    return fail(KESCAPE_ERR_INVALID_ARGUMENT, "side must be KESCAPE_SIDE_BELOW or KESCAPE_SIDE_ABOVE");
  }
  return guarded([&] {
    const auto fit = kescape::fit_critical_exponent(
        model->params, side == KESCAPE_SIDE_BELOW ? kescape::Side::below : kescape::Side::above,
        {window_lo, window_hi}, n_points);
    *slope = fit.slope;
    if (intercept) *intercept = fit.intercept;
  });
}

kescape_status kescape_kramers_rate(double delta_e, double gamma0, double lambda_neg, double epsilon,
                                    double* gamma) {
  KESCAPE_REQUIRE(gamma);
  return guarded([&] { *gamma = kescape::kramers_rate(delta_e, gamma0, lambda_neg, epsilon).gamma; });
}

kescape_lattice_config kescape_lattice_config_default(void) {
  const kescape::LatticeConfig d;
  return {d.n_sites, d.length, 0.0, d.epsilon, d.seed, d.max_time};
}

kescape_status kescape_first_passage(const kescape_model* model, const kescape_lattice_config* config,
                                     uint64_t run_index, double* time, int* censored) {
  KESCAPE_REQUIRE(model && config && time);
  return guarded([&] {
    const auto passage = kescape::first_passage_run(to_config(*config), model->params, run_index);
    *time = passage.time;
    if (censored) *censored = passage.censored ? 1 : 0;
  });
}

kescape_status kescape_run_ensemble(const kescape_model* model, const kescape_lattice_config* config,
                                    size_t n_runs, size_t jobs, double* times, int* censored) {
  KESCAPE_REQUIRE(model && config && times);
  return guarded([&] {
    const auto stats = kescape::run_ensemble(to_config(*config), model->params, n_runs, jobs);
    for (size_t r = 0; r < n_runs; ++r) {
      times[r] = stats.first_passage_times[r];
      if (censored) censored[r] = stats.censored[r] ? 1 : 0;
    }
  });
}

kescape_status kescape_arrhenius_scan(const kescape_model* model, const kescape_lattice_config* config,
                                      const double* epsilons, size_t n_epsilons, size_t n_runs, size_t jobs,
                                      kescape_arrhenius_result* out) {
  KESCAPE_REQUIRE(model && config && epsilons && out);
  return guarded([&] {
    const std::vector<double> eps(epsilons, epsilons + n_epsilons);
    const auto fit = kescape::arrhenius_scan(to_config(*config), model->params, eps, n_runs, jobs);
    *out = {fit.slope, fit.standard_error, fit.intercept};
  });
}

}  // extern "C"
