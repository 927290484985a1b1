#include "kescape/langevin.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include "kescape/errors.hpp"
#include "kescape/forman.hpp"

namespace kescape {

namespace {

void check_stepping(const LatticeConfig& cfg) {
  if (cfg.n_sites < 16) throw DomainError("lattice: need at least 16 sites");
  if (!(cfg.length > 0.0)) throw DomainError("lattice: length must be positive");
  const double dz = cfg.spacing();
  if (!(cfg.dt > 0.0) || !(cfg.dt < 0.5 * dz * dz)) {
    throw DomainError("lattice: dt=" + std::to_string(cfg.dt) + " violates 0 < dt < dz^2/2=" +
                      std::to_string(0.5 * dz * dz));
  }
  if (!(cfg.epsilon >= 0.0)) throw DomainError("lattice: negative noise strength");
}

void check_state(const LatticeState& state, const LatticeConfig& cfg) {
  if (state.phi1.size() != cfg.n_sites || state.phi2.size() != cfg.n_sites) {
    throw DomainError("lattice: state size does not match n_sites");
  }
}

// Explicit update of both fields into (out1, out2). Noise is drawn site by
// site, field 1 before field 2, when `noise` is non-null.
class Stepper {
 public:
  Stepper(const LatticeConfig& cfg, const ModelParams& p)
      : n_(cfg.n_sites),
        dt_(cfg.dt),
        mu1_(p.mu1()),
        mu2_(p.mu2()),
        inv_h2_(1.0 / (cfg.spacing() * cfg.spacing())),
        limit_(10.0 * std::sqrt(p.mu1())),
        sigma_inner_(std::sqrt(2.0 * cfg.epsilon * cfg.dt / cfg.spacing())),
        sigma_edge_(std::sqrt(4.0 * cfg.epsilon * cfg.dt / cfg.spacing())) {}

  void operator()(const double* u, const double* v, double* out1, double* out2, NoiseStream* noise) const {
    const std::size_t last = n_ - 1;
    for (std::size_t i = 0; i < n_; ++i) {
      double lap_u;
      double lap_v;
      if (i == 0) {
        lap_u = 2.0 * (u[1] - u[0]);
        lap_v = 2.0 * (v[1] - v[0]);
      } else if (i == last) {
        lap_u = 2.0 * (u[last - 1] - u[last]);
        lap_v = 2.0 * (v[last - 1] - v[last]);
      } else {
        lap_u = u[i - 1] - 2.0 * u[i] + u[i + 1];
        lap_v = v[i - 1] - 2.0 * v[i] + v[i + 1];
      }
      const double a = u[i] * u[i];
      const double b = v[i] * v[i];
      double next_u = u[i] + dt_ * (lap_u * inv_h2_ + u[i] * (mu1_ - a - b));
      double next_v = v[i] + dt_ * (lap_v * inv_h2_ + v[i] * (mu2_ - b - a));
      if (noise != nullptr) {
        const double sigma = (i == 0 || i == last) ? sigma_edge_ : sigma_inner_;
        next_u += sigma * noise->gaussian();
        next_v += sigma * noise->gaussian();
      }
      if (!(std::abs(next_u) < limit_) || !(std::abs(next_v) < limit_)) {
        throw InstabilityError("lattice: field left |phi| < 10 sqrt(mu1) at site " + std::to_string(i) +
                               "; dt is too large for this noise level");
      }
      out1[i] = next_u;
      out2[i] = next_v;
    }
  }

 private:
  std::size_t n_;
  double dt_;
  double mu1_;
  double mu2_;
  double inv_h2_;
  double limit_;
  double sigma_inner_;
  double sigma_edge_;
};

LatticeState advance(const LatticeState& state, const LatticeConfig& cfg, const ModelParams& p,
                     NoiseStream* noise) {
  check_stepping(cfg);
  check_state(state, cfg);
  LatticeState next;
  next.phi1.resize(cfg.n_sites);
  next.phi2.resize(cfg.n_sites);
  Stepper(cfg, p)(state.phi1.data(), state.phi2.data(), next.phi1.data(), next.phi2.data(), noise);
  next.time = state.time + cfg.dt;
  return next;
}

}  // namespace

void LatticeConfig::validate() const {
  check_stepping(*this);
  if (!(epsilon > 0.0)) throw DomainError("lattice: epsilon must be positive");
  if (!(max_time > 0.0)) throw DomainError("lattice: max_time must be positive");
}

LatticeConfig LatticeConfig::with_default_dt(std::size_t n_sites, double length, double epsilon,
                                             std::uint64_t seed, double max_time) {
  LatticeConfig cfg;
  cfg.n_sites = n_sites;
  cfg.length = length;
  cfg.epsilon = epsilon;
  cfg.seed = seed;
  cfg.max_time = max_time;
  if (n_sites >= 2) cfg.dt = default_dt_fraction * cfg.spacing() * cfg.spacing();
  return cfg;
}

LatticeState LatticeState::uniform(std::size_t n_sites, double phi1, double phi2) {
  return {std::vector<double>(n_sites, phi1), std::vector<double>(n_sites, phi2), 0.0};
}

FieldPair LatticeState::as_fields(double length) const {
  FieldPair out;
  const std::size_t n = phi1.size();
  out.z.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.z[i] = -0.5 * length + length * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.z.back() = 0.5 * length;
  out.phi1 = phi1;
  out.phi2 = phi2;
  return out;
}

LatticeState deterministic_step(const LatticeState& state, const LatticeConfig& cfg, const ModelParams& p) {
  return advance(state, cfg, p, nullptr);
}

LatticeState stochastic_step(const LatticeState& state, const LatticeConfig& cfg, const ModelParams& p,
                             NoiseStream& noise) {
  if (cfg.epsilon == 0.0) return advance(state, cfg, p, nullptr);
  return advance(state, cfg, p, &noise);
}

Passage first_passage(const LatticeConfig& cfg, const ModelParams& p, NoiseStream& noise) {
  cfg.validate();
  const std::size_t n = cfg.n_sites;
  const double target = 0.5 * std::sqrt(p.mu1());
  const double norm = 1.0 / static_cast<double>(n - 1);
  std::vector<double> u(n, -std::sqrt(p.mu1()));
  std::vector<double> v(n, 0.0);
  std::vector<double> u_next(n);
  std::vector<double> v_next(n);
  const Stepper step(cfg, p);

  const auto max_steps = static_cast<std::uint64_t>(std::ceil(cfg.max_time / cfg.dt));
  for (std::uint64_t k = 1; k <= max_steps; ++k) {
    step(u.data(), v.data(), u_next.data(), v_next.data(), &noise);
    u.swap(u_next);
    v.swap(v_next);
    double mean = 0.5 * (u.front() + u.back());
    for (std::size_t i = 1; i + 1 < n; ++i) mean += u[i];
    if (mean * norm > target) return {static_cast<double>(k) * cfg.dt, false};
  }
  return {cfg.max_time, true};
}

Passage first_passage_run(const LatticeConfig& cfg, const ModelParams& p, std::uint64_t run_index) {
  NoiseStream noise = NoiseStream::for_run(cfg.seed, run_index);
  return first_passage(cfg, p, noise);
}

EscapeStats EscapeStats::from_passages(std::span<const Passage> passages) {
  EscapeStats stats;
  stats.n_runs = passages.size();
  stats.first_passage_times.reserve(passages.size());
  stats.censored.reserve(passages.size());
  for (const Passage& run : passages) {
    stats.first_passage_times.push_back(run.time);
    stats.censored.push_back(run.censored);
    if (run.censored) ++stats.n_censored;
  }
  if (stats.n_runs == 0) return stats;

  std::vector<double> sorted = stats.first_passage_times;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double sum = 0.0;
  for (double t : sorted) sum += t;
  stats.mean = sum / n;
  if (sorted.size() > 1) {
    double ss = 0.0;
    for (double t : sorted) ss += (t - stats.mean) * (t - stats.mean);
    stats.standard_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return stats;
}

EscapeStats run_ensemble(const LatticeConfig& cfg, const ModelParams& p, std::size_t n_runs, std::size_t jobs) {
  cfg.validate();
  std::vector<Passage> passages(n_runs);
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, n_runs));
  if (workers == 1) {
    for (std::size_t r = 0; r < n_runs; ++r) passages[r] = first_passage_run(cfg, p, r);
    return EscapeStats::from_passages(passages);
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (std::size_t r = next++; r < n_runs && !failed; r = next++) {
          passages[r] = first_passage_run(cfg, p, r);
        }
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return EscapeStats::from_passages(passages);
}

ArrheniusFit fit_arrhenius(std::span<const double> epsilons, std::span<const EscapeStats> stats,
                           std::uint64_t seed, std::size_t resamples) {
  if (epsilons.size() != stats.size() || epsilons.size() < 2) {
    throw DomainError("fit_arrhenius: need matching statistics for at least two temperatures");
  }
  ArrheniusFit fit{};
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    if (!(epsilons[k] > 0.0) || !(stats[k].mean > 0.0)) {
      throw DomainError("fit_arrhenius: temperatures and mean times must be positive");
    }
    fit.inverse_epsilon.push_back(1.0 / epsilons[k]);
    fit.log_mean_time.push_back(std::log(stats[k].mean));
  }
  const LineFit line = fit_line(fit.inverse_epsilon, fit.log_mean_time);
  fit.slope = line.slope;
  fit.intercept = line.intercept;

  if (resamples < 2) return fit;
  std::vector<double> slopes;
  slopes.reserve(resamples);
  std::vector<double> resampled_log(epsilons.size());
  for (std::size_t b = 0; b < resamples; ++b) {
    SplitMix64 engine = SplitMix64::substream(seed, b);
    for (std::size_t k = 0; k < stats.size(); ++k) {
      const auto& times = stats[k].first_passage_times;
      double sum = 0.0;
      for (std::size_t i = 0; i < times.size(); ++i) sum += times[engine() % times.size()];
      resampled_log[k] = std::log(sum / static_cast<double>(times.size()));
    }
    slopes.push_back(fit_line(fit.inverse_epsilon, resampled_log).slope);
  }
  double mean = 0.0;
  for (double s : slopes) mean += s;
  mean /= static_cast<double>(slopes.size());
  double ss = 0.0;
  for (double s : slopes) ss += (s - mean) * (s - mean);
  fit.standard_error = std::sqrt(ss / static_cast<double>(slopes.size() - 1));
  return fit;
}

std::uint64_t scan_seed(std::uint64_t base_seed, std::size_t k) noexcept {
  return SplitMix64::mix(base_seed + SplitMix64::kGolden * (k + 1));
}

ArrheniusFit arrhenius_scan(const LatticeConfig& base, const ModelParams& p, std::span<const double> epsilons,
                            std::size_t n_runs, std::size_t jobs) {
  if (n_runs < 100) throw DomainError("arrhenius_scan: need at least 100 runs per temperature");
  const double delta_e = barrier(base.length, p);
  for (double eps : epsilons) {
    const double ratio = delta_e / eps;
    if (!(ratio >= 4.0) || !(ratio <= 9.0)) {
      throw DomainError("arrhenius_scan: barrier/epsilon=" + std::to_string(ratio) + " outside [4, 9]");
    }
  }
  std::vector<EscapeStats> stats;
  stats.reserve(epsilons.size());
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    LatticeConfig cfg = base;
    cfg.epsilon = epsilons[k];
    cfg.seed = scan_seed(base.seed, k);
    stats.push_back(run_ensemble(cfg, p, n_runs, jobs));
    if (static_cast<double>(stats.back().n_censored) > 0.2 * static_cast<double>(n_runs)) {
      throw InsufficientSamplingError("arrhenius_scan: " + std::to_string(stats.back().n_censored) + " of " +
                                      std::to_string(n_runs) + " runs censored at epsilon=" +
                                      std::to_string(epsilons[k]) + "; raise max_time");
    }
  }
  return fit_arrhenius(epsilons, stats, base.seed);
}

}  // namespace kescape
