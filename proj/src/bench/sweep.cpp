#include "sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "m1bit/io.hpp"
#include "m1bit/solvers.hpp"

namespace m1bit::bench {

namespace {

const std::map<std::string, Experiment>& experiment_table() {
  static const std::map<std::string, Experiment> table = {
      {"tau_sweep", Experiment::tau_sweep},
      {"gamma_sweep", Experiment::gamma_sweep},
      {"saturation_ratio", Experiment::saturation_ratio},
      {"sparsity", Experiment::sparsity},
      {"measurements", Experiment::measurements},
      {"ct_knee", Experiment::ct_knee},
      {"ct_head", Experiment::ct_head},
      {"ct_noise", Experiment::ct_noise},
  };
  return table;
}

Index even_round(double v) {
  auto n = static_cast<Index>(std::lround(v));
  if (n % 2 != 0) ++n;
  return n;
}

struct MethodOutcome {
  VectorXd x;
  bool converged = true;
};

MethodOutcome solve_by_name(const std::string& method, const SyntheticProblem<double>& pr,
                            double mu, double tau_override, double gamma_override) {
  const Index m = pr.spec.m;
  const Index n = pr.obs.saturated_count();
  const Hyperparams h = default_hyperparams(m, std::max<Index>(n, 1));
  SolverParams<double> params;
  params.mu = mu;
  params.lambda = n > 0 ? h.lambda : 0.0;
  params.tau = n > 0 ? h.tau : 0.0;
  params.gamma = h.gamma;
  params.c = 1.0;  // synthetic signals are generated with unit norm
  if (tau_override == tau_override) params.tau = tau_override;      // NaN = keep default
  if (gamma_override == gamma_override) params.gamma = gamma_override;

  MethodOutcome out;
  if (method == "lasso") {
    std::vector<Index> keep;
    for (Index i = 0; i < m; ++i)
      if (!pr.obs.psi[i]) keep.push_back(i);
    SensingMatrix<double> sub;
    sub.A.resize(static_cast<Index>(keep.size()), pr.spec.d);
    VectorXd p(static_cast<Index>(keep.size()));
    for (Index k = 0; k < static_cast<Index>(keep.size()); ++k) {
      sub.A.row(k) = pr.U.A.row(keep[static_cast<std::size_t>(k)]);
      p[k] = pr.obs.p[keep[static_cast<std::size_t>(k)]];
    }
    Solution<double> sol = solve_lasso(sub, p, mu, params);
    out.x = sol.x_hat;
    out.converged = sol.converged;
  } else if (method == "rdcs") {
    Solution<double> sol = solve_rdcs(pr.U, pr.obs, mu, params);
    out.x = sol.x_hat;
    out.converged = sol.converged;
  } else if (method == "csc") {
    Solution<double> sol = solve_m1bitcsc(pr.U, pr.obs, params);
    out.x = sol.x_hat;
    out.converged = sol.converged;
  } else if (method == "csr") {
    Solution<double> sol = solve_m1bitcsr(pr.U, pr.obs, params);
    out.x = sol.x_hat;
    out.converged = sol.converged;
  } else {
    throw std::invalid_argument("unknown method '" + method + "'");
  }
  return out;
}

bool is_ct(Experiment e) {
  return e == Experiment::ct_knee || e == Experiment::ct_head || e == Experiment::ct_noise;
}

}  // namespace

Experiment experiment_from_string(const std::string& name) {
  auto it = experiment_table().find(name);
  if (it == experiment_table().end())
    throw std::invalid_argument("unknown experiment '" + name + "'");
  return it->second;
}

std::string experiment_name(Experiment e) {
  for (const auto& [k, v] : experiment_table())
    if (v == e) return k;
  return "?";
}

void SweepSpec::apply_defaults() {
  switch (experiment) {
    case Experiment::tau_sweep:
      if (base.d == 0) base = {1000, 100, 500, 100, 20.0, seed};
      if (grid.empty())
        grid = {0.0, -0.02, -0.04, -0.06, -0.1, -0.2, -0.4, -0.7, -1.0};
      if (methods.empty()) methods = {"csc"};
      break;
    case Experiment::gamma_sweep:
      if (base.d == 0) base = {1000, 100, 500, 400, 10.0, seed};
      if (grid.empty()) grid = {1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};
      if (methods.empty()) methods = {"csr"};
      break;
    case Experiment::saturation_ratio:
      if (base.d == 0) base = {1000, 300, 500, 0, 10.0, seed};
      if (grid.empty()) grid = {0.0, 0.1, 0.2, 0.3, 0.4};
      if (methods.empty()) methods = {"lasso", "rdcs", "csc", "csr"};
      break;
    case Experiment::sparsity:
      if (base.d == 0) base = {1000, 0, 500, 100, 10.0, seed};
      if (grid.empty()) grid = {100, 200, 300, 400, 500};
      if (methods.empty()) methods = {"lasso", "rdcs", "csc", "csr"};
      break;
    case Experiment::measurements:
      if (base.d == 0) base = {1000, 300, 0, 0, 10.0, seed};
      if (grid.empty()) grid = {350, 500, 800, 1000, 1400, 2000};
      if (methods.empty()) methods = {"lasso", "rdcs", "csc", "csr"};
      break;
    case Experiment::ct_knee:
      ct.phantom = ct::PhantomKind::knee;
      if (grid.empty()) grid = {0.5};
      if (methods.empty()) methods = {"fbp", "sart-isd", "m1bit-isd", "m1bit-ideal"};
      if (trials > 1) trials = 1;  // noiseless CT runs are deterministic
      break;
    case Experiment::ct_head:
      ct.phantom = ct::PhantomKind::head;
      if (grid.empty()) grid = {0.6, 0.4};
      if (methods.empty()) methods = {"fbp", "sart-isd", "m1bit-isd", "m1bit-ideal"};
      if (trials > 1) trials = 1;
      break;
    case Experiment::ct_noise:
      ct.phantom = ct::PhantomKind::head;
      ct.kappa_frac = 0.6;
      if (grid.empty()) grid = {0.0, 0.1};  // noise sigma
      if (methods.empty()) methods = {"fbp", "sart-isd", "m1bit-isd", "m1bit-ideal"};
      break;
  }
}

std::string SweepSpec::descriptor() const {
  std::ostringstream os;
  os << "experiment=" << experiment_name(experiment) << " trials=" << trials << " seed=" << seed
     << " mu=" << fmt17(mu);
  os << " d=" << base.d << " K=" << base.K << " m=" << base.m << " n=" << base.n
     << " s_n=" << fmt17(base.s_n);
  os << " phantom="
     << (ct.phantom == ct::PhantomKind::knee ? "knee"
                                             : ct.phantom == ct::PhantomKind::head ? "head" : "shepp")
     << " nx=" << ct.nx << " pixel=" << fmt17(ct.pixel_size) << " views=" << ct.n_views
     << " kappa_frac=" << fmt17(ct.kappa_frac) << " noise_sigma=" << fmt17(ct.noise_sigma);
  os << " grid=";
  for (std::size_t i = 0; i < grid.size(); ++i) os << (i ? "|" : "") << fmt17(grid[i]);
  os << " methods=";
  for (std::size_t i = 0; i < methods.size(); ++i) os << (i ? "|" : "") << methods[i];
  return os.str();
}

SweepSpec spec_from_descriptor(const std::string& line) {
  SweepSpec spec;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = tok.substr(0, eq);
    const std::string val = tok.substr(eq + 1);
    if (key == "experiment") spec.experiment = experiment_from_string(val);
    else if (key == "trials") spec.trials = std::stoi(val);
    else if (key == "seed") spec.seed = std::stoull(val);
    else if (key == "mu") spec.mu = parse_double(val);
    else if (key == "d") spec.base.d = std::stol(val);
    else if (key == "K") spec.base.K = std::stol(val);
    else if (key == "m") spec.base.m = std::stol(val);
    else if (key == "n") spec.base.n = std::stol(val);
    else if (key == "s_n") spec.base.s_n = parse_double(val);
    else if (key == "phantom") spec.ct.phantom = ct::phantom_kind_from_string(val);
    else if (key == "nx") spec.ct.nx = spec.ct.ny = std::stol(val);
    else if (key == "pixel") spec.ct.pixel_size = parse_double(val);
    else if (key == "views") spec.ct.n_views = std::stoi(val);
    else if (key == "kappa_frac") spec.ct.kappa_frac = parse_double(val);
    else if (key == "noise_sigma") spec.ct.noise_sigma = parse_double(val);
    else if (key == "grid") {
      spec.grid.clear();
      for (const auto& f : split_fields(val, '|'))
        if (!f.empty()) spec.grid.push_back(parse_double(f));
    } else if (key == "methods") {
      spec.methods.clear();
      for (const auto& f : split_fields(val, '|'))
        if (!f.empty()) spec.methods.push_back(f);
    }
  }
  spec.base.seed = spec.seed;
  return spec;
}

double tune_mu_for_lasso(const SyntheticProblemSpec& base, std::uint64_t held_out_seed) {
  SyntheticProblemSpec spec = base;
  spec.seed = held_out_seed;
  const SyntheticProblem<double> pr = make_problem(spec);
  double best_mu = 1e-2, best_snr = -std::numeric_limits<double>::infinity();
  for (double e = -3.0; e <= 0.51; e += 0.5) {
    const double mu = std::pow(10.0, e);
    MethodOutcome out = solve_by_name("lasso", pr, mu, std::nan(""), std::nan(""));
    const double snr = snr_db(pr.x_true, out.x);
    if (snr > best_snr) {
      best_snr = snr;
      best_mu = mu;
    }
  }
  return best_mu;
}

namespace {

void run_synthetic(const SweepSpec& spec, SweepResult& result) {
  for (std::size_t gi = 0; gi < spec.grid.size(); ++gi) {
    const double gv = spec.grid[gi];
    SyntheticProblemSpec cfg = spec.base;
    double tau_override = std::nan("");
    double gamma_override = std::nan("");
    switch (spec.experiment) {
      case Experiment::tau_sweep:
        tau_override = gv;
        break;
      case Experiment::gamma_sweep:
        gamma_override = gv;
        break;
      case Experiment::saturation_ratio:
        cfg.n = even_round(gv * static_cast<double>(cfg.m));
        break;
      case Experiment::sparsity:
        cfg.K = static_cast<Index>(std::lround(gv));
        cfg.n = even_round(0.2 * static_cast<double>(cfg.m));
        break;
      case Experiment::measurements:
        cfg.m = static_cast<Index>(std::lround(gv));
        cfg.n = even_round(0.2 * static_cast<double>(cfg.m));
        break;
      default:
        throw std::logic_error("run_synthetic: not a synthetic experiment");
    }

    // mu protocol: tuned for lasso on a held-out seed, reused by all methods.
    const double mu = spec.mu > 0 ? spec.mu : tune_mu_for_lasso(cfg, spec.seed + 1000003);
    result.mu_used = mu;

    // Trials fill preassigned slots; safe to parallelize.
    const auto n_methods = static_cast<Index>(spec.methods.size());
    std::vector<TrialRecord> records(static_cast<std::size_t>(spec.trials * n_methods));
    parallel_for(spec.trials, [&](Index t) {
      SyntheticProblemSpec tcfg = cfg;
      tcfg.seed = spec.seed + static_cast<std::uint64_t>(t);
      const SyntheticProblem<double> pr = make_problem(tcfg);
      for (Index mi = 0; mi < n_methods; ++mi) {
        const auto tick = std::chrono::steady_clock::now();
        MethodOutcome out =
            solve_by_name(spec.methods[static_cast<std::size_t>(mi)], pr, mu, tau_override, gamma_override);
        TrialRecord rec;
        rec.grid_value = gv;
        rec.method_id = static_cast<int>(mi);
        rec.trial = static_cast<int>(t);
        rec.metric = snr_db(pr.x_true, out.x);
        rec.aux = out.x.norm();
        rec.converged = out.converged;
        rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - tick).count();
        records[static_cast<std::size_t>(t * n_methods + mi)] = rec;
      }
    });
    for (auto& rec : records) result.trial_log.push_back(rec);
  }
}

void run_ct(const SweepSpec& spec, SweepResult& result) {
  for (double gv : spec.grid) {
    for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
      for (int t = 0; t < spec.trials; ++t) {
        CtConfig cfg = spec.ct;
        cfg.method = spec.methods[mi];
        cfg.seed = spec.seed + static_cast<std::uint64_t>(t);
        if (spec.experiment == Experiment::ct_noise)
          cfg.noise_sigma = gv;
        else
          cfg.kappa_frac = gv;
        const auto tick = std::chrono::steady_clock::now();
        CtRunResult run = run_ct_method(cfg);
        TrialRecord rec;
        rec.grid_value = gv;
        rec.method_id = static_cast<int>(mi);
        rec.trial = t;
        rec.metric = run.rmse_hu;
        rec.aux = static_cast<double>(run.rounds.size());
        rec.converged = true;  // budget-capped solves still count; failures throw
        rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - tick).count();
        result.trial_log.push_back(rec);
      }
    }
  }
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec_in) {
  SweepSpec spec = spec_in;
  spec.apply_defaults();
  if (spec.trials < 1) throw std::invalid_argument("run_sweep: trials must be >= 1");
  if (spec.grid.empty()) throw std::invalid_argument("run_sweep: empty grid");
  spec.base.seed = spec.seed;

  SweepResult result;
  result.spec = spec;
  result.methods = spec.methods;
  result.mu_used = spec.mu;

  if (is_ct(spec.experiment))
    run_ct(spec, result);
  else
    run_synthetic(spec, result);

  // Aggregate rows in (grid, method) order from the per-trial log.
  for (double gv : spec.grid) {
    for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
      SweepRow row;
      row.grid_value = gv;
      row.method_id = static_cast<int>(mi);
      double sum = 0, sum_aux = 0, sum_wall = 0;
      std::vector<double> vals;
      for (const auto& rec : result.trial_log) {
        if (rec.grid_value != gv || rec.method_id != static_cast<int>(mi)) continue;
        ++row.trials;
        if (!rec.converged) continue;  // excluded rows stay visible in the trial log
        ++row.converged;
        sum += rec.metric;
        sum_aux += rec.aux;
        sum_wall += rec.wall_time;
        vals.push_back(rec.metric);
      }
      if (row.converged > 0) {
        row.mean_metric = sum / row.converged;
        row.mean_aux = sum_aux / row.converged;
        row.mean_wall = sum_wall / row.converged;
        double ss = 0;
        for (double v : vals) ss += (v - row.mean_metric) * (v - row.mean_metric);
        row.std_metric = row.converged > 1 ? std::sqrt(ss / (row.converged - 1)) : 0.0;
      }
      result.rows.push_back(row);
    }
  }
  return result;
}

namespace {
std::vector<std::string> header_comments(const SweepResult& r) {
  std::vector<std::string> c;
  c.push_back("m1bit sweep");
  c.push_back(r.spec.descriptor());
  c.push_back("mu_used=" + fmt17(r.mu_used));
  std::string methods = "method_ids=";
  for (std::size_t i = 0; i < r.methods.size(); ++i)
    methods += (i ? "," : "") + std::to_string(i) + ":" + r.methods[i];
  c.push_back(methods);
  return c;
}
}  // namespace

void emit_csv(const SweepResult& result, const std::string& path) {
  CsvTable t;
  t.comments = header_comments(result);
  t.columns = {"grid_value", "method_id", "mean_metric", "std_metric", "mean_aux", "trials", "converged"};
  for (const auto& row : result.rows)
    t.rows.push_back({row.grid_value, static_cast<double>(row.method_id), row.mean_metric,
                      row.std_metric, row.mean_aux, static_cast<double>(row.trials),
                      static_cast<double>(row.converged)});
  write_csv(path, t);
}

void emit_trials_csv(const SweepResult& result, const std::string& path) {
  CsvTable t;
  t.comments = header_comments(result);
  t.columns = {"grid_value", "method_id", "trial", "metric", "aux", "converged"};
  for (const auto& rec : result.trial_log)
    t.rows.push_back({rec.grid_value, static_cast<double>(rec.method_id),
                      static_cast<double>(rec.trial), rec.metric, rec.aux,
                      rec.converged ? 1.0 : 0.0});
  write_csv(path, t);
}

void emit_timing_csv(const SweepResult& result, const std::string& path) {
  CsvTable t;
  t.comments = header_comments(result);
  t.comments.push_back("wall-clock values; not byte-reproducible");
  t.columns = {"grid_value", "method_id", "trial", "wall_time"};
  for (const auto& rec : result.trial_log)
    t.rows.push_back({rec.grid_value, static_cast<double>(rec.method_id),
                      static_cast<double>(rec.trial), rec.wall_time});
  write_csv(path, t);
}

void emit_image(const MatrixXd& img, double pixel_size, const std::string& path) {
  double lo = img.minCoeff(), hi = img.maxCoeff();
  if (!(hi > lo)) hi = lo + 1.0;
  write_pgm16(path, img, pixel_size, lo, hi);
}

}  // namespace m1bit::bench
