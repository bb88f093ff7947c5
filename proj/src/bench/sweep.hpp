// Parameter sweeps reproducing the synthetic and CT experiment tables.
#pragma once

#include <string>
#include <vector>

#include "ct_experiments.hpp"
#include "m1bit/core.hpp"
#include "m1bit/sensing.hpp"

namespace m1bit::bench {

enum class Experiment {
  tau_sweep,
  gamma_sweep,
  saturation_ratio,
  sparsity,
  measurements,
  ct_knee,
  ct_head,
  ct_noise,
};

Experiment experiment_from_string(const std::string& name);
std::string experiment_name(Experiment e);

struct SweepSpec {
  Experiment experiment = Experiment::saturation_ratio;
  std::vector<double> grid;          // empty -> per-experiment default
  std::vector<std::string> methods;  // empty -> per-experiment default
  int trials = 20;
  std::uint64_t seed = 1;
  double mu = -1.0;  // <= 0: tune on lasso over a half-decade grid, held-out seed
  SyntheticProblemSpec base;  // synthetic experiments; d/K/m/n/s_n
  CtConfig ct;                // ct experiments

  /// Fills grid/methods/base defaults for the chosen experiment.
  void apply_defaults();
  /// One-line key=value descriptor embedded in every emitted artifact.
  std::string descriptor() const;
};

/// Parses a descriptor() line back into a spec (regeneration hook).
SweepSpec spec_from_descriptor(const std::string& line);

struct TrialRecord {
  double grid_value = 0;
  int method_id = 0;
  int trial = 0;
  double metric = 0;   // SNR dB (synthetic) or RMSE HU (ct)
  double aux = 0;      // reconstruction l2 norm (synthetic), ISD rounds (ct)
  bool converged = true;
  double wall_time = 0;
};

struct SweepRow {
  double grid_value = 0;
  int method_id = 0;
  double mean_metric = 0;
  double std_metric = 0;
  double mean_aux = 0;
  int trials = 0;
  int converged = 0;   // trials included in the aggregate
  double mean_wall = 0;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<std::string> methods;
  std::vector<SweepRow> rows;
  std::vector<TrialRecord> trial_log;
  double mu_used = 0;
};

SweepResult run_sweep(const SweepSpec& spec);

/// Lasso-based mu tuning: half-decade grid over [1e-3, 10^0.5], scored by SNR
/// on a single held-out instance.
double tune_mu_for_lasso(const SyntheticProblemSpec& base, std::uint64_t held_out_seed);

/// Deterministic outputs (no wall-clock content): aggregate table and the
/// per-trial log. Timing goes to a separate companion file.
void emit_csv(const SweepResult& result, const std::string& path);
void emit_trials_csv(const SweepResult& result, const std::string& path);
void emit_timing_csv(const SweepResult& result, const std::string& path);

/// 16-bit graymap + sidecar; window [lo, hi] defaults to the value range.
void emit_image(const MatrixXd& img, double pixel_size, const std::string& path);

}  // namespace m1bit::bench
