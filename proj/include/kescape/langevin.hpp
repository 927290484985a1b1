#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "kescape/model.hpp"

namespace kescape {

/// Explicit Euler-Maruyama discretization of the coupled stochastic field
/// equations on n_sites points spanning [-L/2, L/2], endpoints included.
///
/// `epsilon` is the temperature of the Kramers formula: each field obeys
///   d phi = -(delta H / delta phi) dt + sqrt(2 epsilon) dW,
/// so the lattice stationary measure is proportional to exp(-H_lattice / epsilon).
struct LatticeConfig {
  std::size_t n_sites = 32;
  double length = 2.0;
  double dt = 0.0;
  double epsilon = 0.5;
  std::uint64_t seed = 1;
  double max_time = 1e4;

  static constexpr double default_dt_fraction = 0.4;

  double spacing() const { return length / static_cast<double>(n_sites - 1); }

  /// Requires n_sites >= 16, dt < spacing^2 / 2, epsilon > 0, max_time > 0.
  void validate() const;

  /// dt = 0.4 spacing^2.
  static LatticeConfig with_default_dt(std::size_t n_sites, double length, double epsilon,
                                       std::uint64_t seed, double max_time);
};

struct LatticeState {
  std::vector<double> phi1;
  std::vector<double> phi2;
  double time = 0.0;

  static LatticeState uniform(std::size_t n_sites, double phi1, double phi2);
  FieldPair as_fields(double length) const;
};

/// SplitMix64, a 64-bit splittable generator. Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += kGolden;
    return mix(state_);
  }

  /// The SplitMix64 output finalizer.
  static std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Substream rule: state = mix(mix(seed) + golden * (index + 1)).
  /// Stable across releases; run outputs depend on it.
  static SplitMix64 substream(std::uint64_t seed, std::uint64_t index) noexcept {
    return SplitMix64(mix(mix(seed) + kGolden * (index + 1)));
  }

  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

 private:
  std::uint64_t state_;
};

/// Gaussian noise source for one run.
class NoiseStream {
 public:
  explicit NoiseStream(SplitMix64 engine) : engine_(engine) {}
  static NoiseStream for_run(std::uint64_t seed, std::uint64_t run_index) {
    return NoiseStream(SplitMix64::substream(seed, run_index));
  }

  double gaussian() { return normal_(engine_); }

 private:
  SplitMix64 engine_;
  boost::random::normal_distribution<double> normal_;
};

/// One explicit Euler step of the zero-noise flow. Throws InstabilityError
/// when a field leaves |phi| < 10 sqrt(mu1).
LatticeState deterministic_step(const LatticeState& state, const LatticeConfig& cfg, const ModelParams& p);

/// Euler-Maruyama step: the deterministic update plus Gaussian increments of
/// variance 2 epsilon dt / (w dz), with cell weight w = 1 inside and 1/2 at the
/// two endpoints. epsilon = 0 reproduces deterministic_step exactly.
LatticeState stochastic_step(const LatticeState& state, const LatticeConfig& cfg, const ModelParams& p,
                             NoiseStream& noise);

struct Passage {
  double time;
  bool censored;
};

/// Starts at phi1 = -sqrt(mu1), phi2 = 0 and runs until the cell-weighted
/// spatial mean of phi1 first exceeds sqrt(mu1)/2. Runs reaching max_time are
/// reported censored with time = max_time.
Passage first_passage(const LatticeConfig& cfg, const ModelParams& p, NoiseStream& noise);

/// first_passage with the noise substream of (cfg.seed, run_index).
Passage first_passage_run(const LatticeConfig& cfg, const ModelParams& p, std::uint64_t run_index);

struct EscapeStats {
  std::vector<double> first_passage_times;  // indexed by run
  std::vector<bool> censored;
  std::size_t n_runs = 0;
  std::size_t n_censored = 0;
  double mean = 0.0;
  double standard_error = 0.0;  // sample std / sqrt(n_runs)

  /// Statistics are computed from the sorted times, so they do not depend on
  /// the order runs finished in.
  static EscapeStats from_passages(std::span<const Passage> passages);
};

/// Runs 0..n_runs-1 on `jobs` worker threads. Each run owns its state and
/// noise substream; results are identical for any job count.
EscapeStats run_ensemble(const LatticeConfig& cfg, const ModelParams& p, std::size_t n_runs,
                         std::size_t jobs = 1);

struct ArrheniusFit {
  double slope;           // estimate of the barrier
  double standard_error;  // bootstrap over runs
  double intercept;
  std::vector<double> inverse_epsilon;
  std::vector<double> log_mean_time;
};

/// Least-squares fit of ln(mean first-passage time) against 1/epsilon with a
/// bootstrap over runs for the slope error.
ArrheniusFit fit_arrhenius(std::span<const double> epsilons, std::span<const EscapeStats> stats,
                           std::uint64_t seed, std::size_t resamples = 200);

/// Seed used for the k-th temperature of a scan: mix(seed + golden * (k + 1)).
std::uint64_t scan_seed(std::uint64_t base_seed, std::size_t k) noexcept;

/// Ensembles at each epsilon followed by fit_arrhenius. Requires n_runs >= 100
/// and barrier/epsilon in [4, 9] for every epsilon. Throws
/// InsufficientSamplingError when more than 20% of runs at any epsilon are censored.
ArrheniusFit arrhenius_scan(const LatticeConfig& base, const ModelParams& p, std::span<const double> epsilons,
                            std::size_t n_runs, std::size_t jobs = 1);

}  // namespace kescape
