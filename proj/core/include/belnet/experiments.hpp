#pragma once

// Experiment presets and reproduction pipelines: Burgers paired ensembles,
// the DeepONet contrast, multiscale patch sweeps, the gradient battery and
// data generation. Shared by the CLI and the acceptance suite.

#include "belnet/pde.hpp"
#include "belnet/sampling.hpp"
#include "belnet/training.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>

namespace belnet::exp {

struct ExperimentConfig {
  std::string experiment = "burgers";  // burgers | don_contrast | elliptic1d |
                                       // elliptic2d_onefast |
                                       // elliptic2d_multiscale |
                                       // theory_battery | grad_check
  std::string scale = "desk";          // desk | paper
  std::string output_dir = ".";
  std::uint64_t seed = 2024;
  int workers = 1;
  bool strict = false;

  pde::PdeConfig pde_cfg;
  sampling::PatchSpec patch;
  train::TrainConfig train_cfg;
  // Second config for the vanilla side of the paired Burgers comparison;
  // the two architectures want different activations and widths at matched
  // parameter budgets. Overridable with vanilla_-prefixed keys.
  train::TrainConfig vanilla_cfg;

  int n_train = 200;       // Burgers training instances
  int n_test = 100;        // Burgers test instances
  int n_obs = 16;          // multiscale observation points
  int realizations = 24;   // jitter realizations per observation point
  int repeats = 20;        // multiscale repeats per patch size
  int paired_reruns = 10;  // Burgers whole-experiment re-runs
};

ExperimentConfig preset(const std::string& experiment, const std::string& scale);

// key=value text config (or .json) overlaying the preset named inside it.
ExperimentConfig load_config_file(const std::string& path);

// Applies one key=value override in place; throws on unknown keys.
void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);

nlohmann::json config_echo(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

// ---- Burgers ----

struct BurgersRunResult {
  train::EvalReport belnet;
  train::EvalReport vanilla;
};

// One paired run: ensembles of BelNet and vanilla BelNet trained on the
// same dataset with the same derived member seeds.
BurgersRunResult burgers_paired_run(const sampling::BurgersDataset& ds,
                                    const ExperimentConfig& cfg,
                                    std::uint64_t run_seed);

struct DonContrastResult {
  std::vector<double> belnet_errors, don_errors;
  int belnet_wins = 0;
};

// Paired single-model repeats of BelNet vs DeepONet on data with per-sample
// random sensors (fed to the DeepONet as location-blind value vectors).
DonContrastResult don_contrast(const sampling::BurgersDataset& ds,
                               const ExperimentConfig& cfg, int repeats);

// ---- Multiscale ----

struct MultiscaleProblem {
  bool is2d = false;
  pde::GridFunction1d fine1, coarse1;
  pde::GridFunction2d fine2, coarse2;
  double coarse_baseline_error = 0.0;  // at the observation points
  double coarse_spacing = 0.0;
};

MultiscaleProblem make_multiscale_problem(const ExperimentConfig& cfg);

struct PatchSweepRow {
  int patch_size = 1;
  double mean_error = 0.0;  // fresh-jitter evaluation, mean over repeats
  double std_error = 0.0;
  double in_training_error = 0.0;  // on the training jitter realizations
  double coarse_baseline = 0.0;
  std::vector<double> per_repeat;
};

PatchSweepRow multiscale_patch_run(const MultiscaleProblem& problem,
                                   const ExperimentConfig& cfg, int patch_size,
                                   int repeats, std::uint64_t sweep_seed);

// ---- Batteries and orchestration ----

// Finite-difference battery across all three architectures; inject_fault
// corrupts one analytic gradient entry as a checker self-test.
nlohmann::json grad_check(std::uint64_t seed, int n_cases,
                          bool inject_fault = false);

// Full pipeline for the named experiment; writes JSON/CSV artifacts into
// cfg.output_dir and returns the report.
nlohmann::json reproduce(const ExperimentConfig& cfg);

// Writes dataset container(s) + manifest; returns the manifest.
nlohmann::json cmd_gen_data(const ExperimentConfig& cfg,
                            const std::string& out_base);

}  // namespace belnet::exp
