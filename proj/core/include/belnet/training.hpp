#pragma once

// Loss, optimization loop, ensemble orchestration and relative-L2 error
// metrics.

#include "belnet/operators.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace belnet::train {

struct TrainConfig {
  int steps = 2000;       // optimizer steps ("epochs" at full batch)
  int batch_size = 64;    // 0 = full dataset every step
  double lr = 1e-3;
  // Learning rate is halved when step/steps crosses each fraction.
  std::vector<double> lr_decay_at = {0.6, 0.85};
  // Decoupled (AdamW-style) weight decay; 0 disables.
  double weight_decay = 0.0;
  // Warm-start steps for the sensor-side nets: fitted to spacing-aware
  // periodic quadrature weights (1D sensors only); 0 disables.
  int pretrain_steps = 0;
  // Step-size multiplier for the sensor-side nets during the main loop;
  // < 1 preserves a warm start, 0 freezes them.
  double projection_lr_scale = 1.0;
  // Train-time Gaussian noise on the input-function values, as a fraction
  // of their standard deviation; teaches the decoder to tolerate the
  // sampling noise of randomly placed sensors. Evaluation is unaffected.
  double value_noise = 0.0;
  int ensemble_size = 10;
  std::uint64_t seed = 0;

  ops::ArchKind arch = ops::ArchKind::BelNet;
  ops::BelNetDims dims;
  int deeponet_hidden = 64;
  nn::Activation activation = nn::Activation::Tanh;
  // Activation of the single-layer query-side (construction/trunk) net;
  // unset means "same as activation".
  std::optional<nn::Activation> construction_activation;
  bool normalize = true;

  // > 0: relative error is averaged over evaluations inside the trailing
  // window of training (10 evenly spaced evaluation points).
  int trailing_window = 0;
  int workers = 1;   // ensemble parallelism; audit forces 1
  bool audit = false;
};

// Builds and initializes the configured architecture, with the normalizer
// fitted on the given training samples.
ops::OperatorModel make_model(const TrainConfig& cfg,
                              const std::vector<ops::OperatorSample>& train_set,
                              std::uint64_t seed);

// Mean squared error over the batch and its parameter gradient.
double loss(const ops::OperatorModel& model,
            const std::vector<ops::OperatorSample>& batch,
            const std::vector<int>& indices, Eigen::VectorXd& grad);

struct LossTrace {
  std::vector<double> per_step;
};

// Adam training loop; deterministic given the seed. Throws on divergence
// (loss > 1e6) with the trace embedded in the message. on_step, when set,
// runs after each optimizer step.
LossTrace train(ops::OperatorModel& model,
                const std::vector<ops::OperatorSample>& dataset,
                const TrainConfig& cfg, std::uint64_t seed,
                const std::function<void(int)>& on_step = nullptr);

struct RelativeErrorReport {
  std::vector<double> per_instance;
  double mean = 0.0;
  int skipped = 0;  // instances with zero-norm truth
};

// Per input-function instance: ||pred - true||_2 / ||true||_2 over its
// query grid, then the mean over instances.
RelativeErrorReport relative_error(const ops::OperatorModel& model,
                                   const std::vector<ops::OperatorSample>& test);

struct EvalReport {
  std::vector<double> per_model_errors;
  double mean_error = 0.0;
  double std_error = 0.0;
  std::size_t param_count = 0;
  double wall_seconds = 0.0;
  std::optional<double> coarse_baseline_error;
  std::vector<int> failed_members;

  nlohmann::json to_json() const;
  std::string to_csv() const;  // one row per model
};

// Trains ensemble_size models with derived seeds and aggregates errors.
// Members that throw are recorded in failed_members and excluded.
EvalReport run_ensemble(const TrainConfig& cfg,
                        const std::vector<ops::OperatorSample>& train_set,
                        const std::vector<ops::OperatorSample>& test_set);

}  // namespace belnet::train
