// kescape: batch front end for barrier, prefactor and escape-time calculations.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "kescape/kescape.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitModule = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a library call fails; carries the library's message.
struct ModuleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(kescape_status status, const std::string& what) {
  if (status == KESCAPE_OK) return;
  throw ModuleError(what + ": " + kescape_status_name(status) + " error: " + kescape_last_error());
}

class Model {
 public:
  Model(double mu1, double mu2) {
    if (kescape_model_create(mu1, mu2, &handle_) != KESCAPE_OK) throw UsageError(kescape_last_error());
  }
  ~Model() { kescape_model_destroy(handle_); }
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  const kescape_model* get() const { return handle_; }

 private:
  kescape_model* handle_ = nullptr;
};

std::string number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// RFC 4180: quote fields containing separators, quotes or line breaks.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += csv_field(cells[i]);
      }
      out += "\r\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }

  // Numeric-looking cells become numbers, everything else strings.
  json as_json() const {
    json arr = json::array();
    for (const auto& r : rows) {
      json obj = json::object();
      for (std::size_t i = 0; i < header.size(); ++i) {
        char* end = nullptr;
        const double v = std::strtod(r[i].c_str(), &end);
        if (!r[i].empty() && end && *end == '\0') {
          obj[header[i]] = v;
        } else {
          obj[header[i]] = r[i];
        }
      }
      arr.push_back(obj);
    }
    return arr;
  }
};

// Relative paths land in $KESCAPE_OUTPUT_DIR when it is set.
fs::path resolve_output(const std::string& path) {
  fs::path p(path);
  if (const char* dir = std::getenv("KESCAPE_OUTPUT_DIR"); dir && *dir && p.is_relative()) p = fs::path(dir) / p;
  return p;
}

void write_atomically(const fs::path& target, const std::string& content) {
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ModuleError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw ModuleError("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw ModuleError("cannot rename onto " + target.string() + ": " + ec.message());
  }
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  if (n > 1) out.back() = hi;
  return out;
}

// Evaluates rows[i] = f(i) on a bounded worker pool; the first failure wins.
void parallel_rows(std::size_t n, int jobs, const std::function<void(std::size_t)>& f) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> guard(failure_lock);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct Options {
  double mu1 = 3.0;
  double mu2 = 2.0;
  std::string output;
  std::string format = "auto";

  double l_min = 0.5;
  double l_max = 12.0;
  int n = 200;
  int jobs = 1;

  double length = 5.0;
  int points = 1024;

  std::string side = "above";
  std::optional<double> window_lo;
  std::optional<double> window_hi;
  int fit_points = 12;

  std::size_t n_sites = 32;
  double sim_length = 2.0;
  double dt = 0.0;
  double epsilon = 0.5;
  std::uint64_t seed = 1;
  double max_time = 1e4;
  std::size_t runs = 100;
};

struct Output {
  std::string content;
  std::string summary;
  std::optional<std::string> manifest = std::nullopt;
};

std::string render(const Table& t, const std::string& format, const json& meta) {
  if (format == "json") {
    json doc = meta;
    doc["rows"] = t.as_json();
    return doc.dump(2) + "\n";
  }
  return t.csv();
}

std::string regime(double L, double lc) { return L < lc ? "below" : "above"; }

void require_range(const Options& o) {
  if (!(o.l_min > 0.0) || !(o.l_max > o.l_min)) throw UsageError("need 0 < --l-min < --l-max");
  if (o.n < 2) throw UsageError("--n must be at least 2");
  if (o.jobs < 1) throw UsageError("--jobs must be at least 1");
}

json params_json(const Options& o) { return {{"mu1", o.mu1}, {"mu2", o.mu2}}; }

Output cmd_instanton(const Options& o, const Model& m) {
  if (o.points < 2) throw UsageError("--points must be at least 2");
  const auto n = static_cast<std::size_t>(o.points);
  std::vector<double> z(n), a(n), b(n);
  check(kescape_instanton_sample(m.get(), o.length, n, z.data(), a.data(), b.data()), "instanton");
  double mpar = 0;
  check(kescape_m_from_length(m.get(), o.length, &mpar), "instanton");
  Table t{{"z", "phi1", "phi2"}, {}};
  for (std::size_t i = 0; i < n; ++i) t.rows.push_back({number(z[i]), number(a[i]), number(b[i])});
  json meta = {{"command", "instanton"}, {"params", params_json(o)}, {"length", o.length}, {"m", mpar}};
  return {render(t, o.format, meta), "instanton: m=" + number(mpar) + ", " + std::to_string(n) + " points"};
}

Output cmd_barrier(const Options& o, const Model& m) {
  require_range(o);
  double lc = 0;
  check(kescape_critical_length(m.get(), &lc), "barrier");
  const auto grid = linspace(o.l_min, o.l_max, o.n);
  Table t{{"L", "delta_e", "regime"}, std::vector<std::vector<std::string>>(grid.size())};
  parallel_rows(grid.size(), o.jobs, [&](std::size_t i) {
    double e = 0;
    check(kescape_barrier(m.get(), grid[i], &e), "barrier at L=" + number(grid[i]));
    t.rows[i] = {number(grid[i]), number(e), regime(grid[i], lc)};
  });
  json meta = {{"command", "barrier"}, {"params", params_json(o)}, {"critical_length", lc}};
  return {render(t, o.format, meta), "barrier: " + std::to_string(grid.size()) + " lengths, L_c=" + number(lc)};
}

Output cmd_prefactor(const Options& o, const Model& m, bool with_barrier) {
  require_range(o);
  double lc = 0;
  check(kescape_critical_length(m.get(), &lc), "prefactor");
  const auto grid = linspace(o.l_min, o.l_max, o.n);
  Table t;
  t.header = with_barrier ? std::vector<std::string>{"L", "delta_e", "gamma0", "lambda_neg", "regime"}
                          : std::vector<std::string>{"L", "gamma0", "lambda_neg", "regime"};
  t.rows.resize(grid.size());
  parallel_rows(grid.size(), o.jobs, [&](std::size_t i) {
    const double L = grid[i];
    double g = 0, lam = 0;
    check(kescape_prefactor(m.get(), L, &g, &lam), "prefactor at L=" + number(L));
    if (with_barrier) {
      double e = 0;
      check(kescape_barrier(m.get(), L, &e), "barrier at L=" + number(L));
      t.rows[i] = {number(L), number(e), number(g), number(lam), regime(L, lc)};
    } else {
      t.rows[i] = {number(L), number(g), number(lam), regime(L, lc)};
    }
  });
  const char* name = with_barrier ? "sweep" : "prefactor";
  json meta = {{"command", name}, {"params", params_json(o)}, {"critical_length", lc}};
  return {render(t, o.format, meta), std::string(name) + ": " + std::to_string(grid.size()) + " lengths, L_c=" + number(lc)};
}

Output cmd_fit(const Options& o, const Model& m) {
  const bool below = o.side == "below";
  // below: close to the analytic asymptote; above: the range of the published line fit
  const double lo = o.window_lo.value_or(below ? 1e-4 : 1e-3);
  const double hi = o.window_hi.value_or(below ? 1e-2 : 1e-1);
  if (!(lo > 0.0) || !(hi > lo)) throw UsageError("need 0 < --window-lo < --window-hi");
  if (o.fit_points < 8) throw UsageError("--points must be at least 8 for fit");
  double slope = 0, intercept = 0;
  check(kescape_fit_critical_exponent(m.get(), below ? KESCAPE_SIDE_BELOW : KESCAPE_SIDE_ABOVE, lo, hi,
                                      static_cast<std::size_t>(o.fit_points), &slope, &intercept),
        "fit");
  json doc = {{"command", "fit"},
              {"params", params_json(o)},
              {"side", o.side},
              {"window", {lo, hi}},
              {"points", o.fit_points},
              {"log_base", "e"},
              {"slope", slope},
              {"intercept", intercept}};
  std::string content;
  if (o.format == "csv") {
    Table t{{"side", "window_lo", "window_hi", "points", "slope", "intercept"},
            {{o.side, number(lo), number(hi), std::to_string(o.fit_points), number(slope), number(intercept)}}};
    content = t.csv();
  } else {
    content = doc.dump(2) + "\n";
  }
  return {content, "fit (" + o.side + "): slope=" + number(slope) + " intercept=" + number(intercept)};
}

Output cmd_simulate(const Options& o, const Model& m) {
  if (o.runs < 1) throw UsageError("--runs must be at least 1");
  if (o.jobs < 1) throw UsageError("--jobs must be at least 1");
  kescape_lattice_config cfg = kescape_lattice_config_default();
  cfg.n_sites = o.n_sites;
  cfg.length = o.sim_length;
  cfg.dt = o.dt;
  cfg.epsilon = o.epsilon;
  cfg.seed = o.seed;
  cfg.max_time = o.max_time;

  const auto start = std::chrono::steady_clock::now();
  std::vector<double> times(o.runs);
  std::vector<int> censored(o.runs);
  check(kescape_run_ensemble(m.get(), &cfg, o.runs, static_cast<std::size_t>(o.jobs), times.data(), censored.data()),
        "simulate");
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Table t{{"run_index", "first_passage_time", "censored"}, {}};
  std::size_t n_censored = 0;
  double sum = 0;
  for (std::size_t r = 0; r < o.runs; ++r) {
    t.rows.push_back({std::to_string(r), number(times[r]), censored[r] ? "1" : "0"});
    n_censored += censored[r] ? 1 : 0;
    sum += times[r];
  }
  const double spacing = cfg.length / static_cast<double>(cfg.n_sites - 1);
  const double dt = cfg.dt != 0.0 ? cfg.dt : 0.4 * spacing * spacing;
  json lattice = {{"n_sites", cfg.n_sites}, {"length", cfg.length}, {"dt", dt},      {"epsilon", cfg.epsilon},
                  {"seed", cfg.seed},       {"max_time", cfg.max_time}, {"runs", o.runs}};
  json manifest = {{"command", "simulate"},
                   {"version", kescape_version()},
                   {"params", params_json(o)},
                   {"lattice", lattice},
                   {"jobs", o.jobs},
                   {"n_censored", n_censored},
                   {"wall_time", wall}};
  json meta = {{"command", "simulate"}, {"params", params_json(o)}, {"lattice", lattice}};
  return {render(t, o.format, meta),
          "simulate: " + std::to_string(o.runs) + " runs, mean first-passage time " +
              number(sum / static_cast<double>(o.runs)) + ", " + std::to_string(n_censored) + " censored",
          manifest.dump(2) + "\n"};
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Escape rates for the two-field model on a Neumann interval.\n"
               "Defaults mu1=3, mu2=2. Relative output paths are resolved in $KESCAPE_OUTPUT_DIR when set;\n"
               "-o - writes to standard output."};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string(kescape_version()));

  auto common = [&](CLI::App* sub, const std::string& default_format) {
    sub->add_option("--mu1", o.mu1, "curvature of field 1")->capture_default_str();
    sub->add_option("--mu2", o.mu2, "curvature of field 2 (mu1 > mu2 > 0)")->capture_default_str();
    sub->add_option("-o,--output", o.output, "output file (default <command>.<format>)");
    sub->add_option("--format", o.format, "csv or json (default " + default_format + ")")
        ->check(CLI::IsMember({"csv", "json"}));
  };
  auto range = [&](CLI::App* sub) {
    sub->add_option("--l-min", o.l_min, "smallest interval length")->capture_default_str();
    sub->add_option("--l-max", o.l_max, "largest interval length")->capture_default_str();
    sub->add_option("--n", o.n, "number of lengths")->capture_default_str();
    sub->add_option("--jobs", o.jobs, "worker threads")->capture_default_str();
  };

  auto* instanton = app.add_subcommand("instanton", "sample the instanton profile: z, phi1, phi2");
  common(instanton, "csv");
  instanton->add_option("--length", o.length, "interval length (> L_c)")->capture_default_str();
  instanton->add_option("--points", o.points, "grid points")->capture_default_str();

  auto* barrier = app.add_subcommand("barrier", "activation barrier against L");
  common(barrier, "csv");
  range(barrier);

  auto* prefactor = app.add_subcommand("prefactor", "Kramers prefactor and negative eigenvalue against L");
  common(prefactor, "csv");
  range(prefactor);

  auto* sweep = app.add_subcommand("sweep", "barrier, prefactor and negative eigenvalue against L");
  common(sweep, "csv");
  range(sweep);

  auto* fit = app.add_subcommand("fit", "fit ln gamma0 against ln|L - L_c| near the critical length");
  common(fit, "json");
  fit->add_option("--side", o.side, "below or above L_c")->check(CLI::IsMember({"below", "above"}))->capture_default_str();
  fit->add_option("--window-lo", o.window_lo, "smallest |L - L_c| (default 1e-4 below, 1e-3 above)");
  fit->add_option("--window-hi", o.window_hi, "largest |L - L_c| (default 1e-2 below, 1e-1 above)");
  fit->add_option("--points", o.fit_points, "number of lengths")->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "first-passage times of the Langevin lattice");
  common(simulate, "csv");
  simulate->add_option("--n-sites", o.n_sites, "lattice sites")->capture_default_str();
  simulate->add_option("--length", o.sim_length, "interval length")->capture_default_str();
  simulate->add_option("--dt", o.dt, "time step (default 0.4 dz^2)");
  simulate->add_option("--epsilon", o.epsilon, "noise strength (temperature)")->capture_default_str();
  simulate->add_option("--seed", o.seed, "64-bit seed")->capture_default_str();
  simulate->add_option("--max-time", o.max_time, "censoring time")->capture_default_str();
  simulate->add_option("--runs", o.runs, "number of runs")->capture_default_str();
  simulate->add_option("--jobs", o.jobs, "worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string command = chosen->get_name();
  if (o.format == "auto") o.format = command == "fit" ? "json" : "csv";

  try {
    const Model model(o.mu1, o.mu2);
    Output out;
    if (command == "instanton") out = cmd_instanton(o, model);
    else if (command == "barrier") out = cmd_barrier(o, model);
    else if (command == "prefactor") out = cmd_prefactor(o, model, false);
    else if (command == "sweep") out = cmd_prefactor(o, model, true);
    else if (command == "fit") out = cmd_fit(o, model);
    else out = cmd_simulate(o, model);

    const std::string path = o.output.empty() ? command + "." + o.format : o.output;
    if (path == "-") {
      std::cout << out.content;
      std::cerr << out.summary << "\n";
    } else {
      const fs::path target = resolve_output(path);
      write_atomically(target, out.content);
      if (out.manifest) {
        fs::path manifest = target;
        manifest += ".manifest.json";
        write_atomically(manifest, *out.manifest);
      }
      std::cout << out.summary << " -> " << target.string() << "\n";
    }
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "kescape " << command << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "kescape " << command << ": " << e.what() << "\n";
    return kExitModule;
  }
}
