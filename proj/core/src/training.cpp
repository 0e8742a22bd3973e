#include "belnet/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace belnet::train {

namespace {

// Warm-starts sensor-side nets as spacing-aware quadrature rules: for sorted
// 1D sensor coordinates the net is fitted to periodic trapezoid weights times
// a Fourier mode, so the learned projection starts out consistent across
// different sensor draws instead of memorizing the training draws. Works in
// the normalized coordinate space [-1,1] (one period).
void pretrain_quadrature(std::vector<nn::Mlp>& nets, int n_sensors, int steps,
                         double lr, std::uint64_t seed) {
  const int n = n_sensors;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  Eigen::VectorXd z(n), t(n);
  const int batch = 16;
  for (std::size_t c = 0; c < nets.size(); ++c) {
    nn::Mlp& net = nets[c];
    if (net.in_dim() != n) return;  // multi-d sensors: nothing to warm-start
    Eigen::VectorXd params(net.param_count());
    net.flatten_into(params);
    nn::AdamState state = nn::AdamState::fresh(params.size(), lr);
    Eigen::VectorXd grad(params.size());
    // Fourier mode per net: 1, sin(pi z), cos(pi z), sin(2 pi z), ...
    const int mode = (static_cast<int>(c) + 1) / 2;
    const bool use_cos = c != 0 && c % 2 == 0;
    auto phi = [&](double x) {
      if (c == 0) return 1.0;
      return use_cos ? std::cos(mode * M_PI * x) : std::sin(mode * M_PI * x);
    };
    for (int step = 0; step < steps; ++step) {
      state.lr = lr * (step > 0.6 * steps ? 0.25 : 1.0) *
                 (step > 0.85 * steps ? 0.25 : 1.0);
      grad.setZero();
      for (int b = 0; b < batch; ++b) {
        for (int i = 0; i < n; ++i) z[i] = coord(rng);
        std::sort(z.data(), z.data() + n);
        for (int i = 0; i < n; ++i) {
          const double prev = i == 0 ? z[n - 1] - 2.0 : z[i - 1];
          const double next = i == n - 1 ? z[0] + 2.0 : z[i + 1];
          t[i] = n * (next - prev) / 4.0 * phi(z[i]);
        }
        nn::Mlp::Cache cache;
        const Eigen::VectorXd out = net.forward(z, cache);
        const Eigen::VectorXd up = 2.0 * (out - t) / (n * batch);
        net.backward(cache, up, grad);
      }
      nn::adam_step(state, params, grad);
      net.unflatten_from(params);
    }
  }
}

}  // namespace

ops::OperatorModel make_model(const TrainConfig& cfg,
                              const std::vector<ops::OperatorSample>& train_set,
                              std::uint64_t seed) {
  if (train_set.empty()) throw std::invalid_argument("make_model: empty dataset");
  ops::BelNetDims dims = cfg.dims;
  dims.N = train_set.front().sensors.count();
  dims.d_in = train_set.front().sensors.dim();
  dims.d = static_cast<int>(train_set.front().query.size());

  const nn::Activation cact =
      cfg.construction_activation.value_or(cfg.activation);
  const ops::Normalizer norm = cfg.normalize
                                   ? ops::Normalizer::fit(train_set)
                                   : ops::Normalizer::identity(dims.d_in, dims.d);
  switch (cfg.arch) {
    case ops::ArchKind::BelNet: {
      auto p = ops::init_belnet(dims, cfg.activation, seed, cact);
      if (cfg.pretrain_steps > 0 && dims.d_in == 1)
        pretrain_quadrature(p.projection_nets, dims.N, cfg.pretrain_steps,
                            3e-3, nn::mix_seed(seed, 3000));
      return {std::move(p), norm};
    }
    case ops::ArchKind::VanillaBelNet: {
      auto p = ops::init_vanilla_belnet(dims, cfg.activation, seed, cact);
      if (cfg.pretrain_steps > 0 && dims.d_in == 1)
        pretrain_quadrature(p.projection_nets, dims.N, cfg.pretrain_steps,
                            3e-3, nn::mix_seed(seed, 3000));
      return {std::move(p), norm};
    }
    case ops::ArchKind::DeepOnet:
      return {ops::init_deeponet(dims.N, dims.K, cfg.deeponet_hidden, dims.d,
                                 cfg.activation, seed, cact),
              norm};
  }
  throw std::invalid_argument("make_model: unknown architecture");
}

double loss(const ops::OperatorModel& model,
            const std::vector<ops::OperatorSample>& batch,
            const std::vector<int>& indices, Eigen::VectorXd& grad) {
  if (indices.empty()) throw std::invalid_argument("loss: empty batch");
  grad.setZero();
  const double inv_b = 1.0 / static_cast<double>(indices.size());
  double total = 0.0;
  ops::OperatorModel::ForwardCache cache;
  for (int idx : indices) {
    const auto& s = batch[idx];
    const double out = model.forward_cached(s, cache);
    const double r = out - s.target;
    if (!std::isfinite(r))
      throw std::runtime_error("loss: non-finite residual at sample " +
                               std::to_string(idx));
    total += r * r;
    model.backward(cache, 2.0 * r * inv_b, grad);
  }
  return total * inv_b;
}

LossTrace train(ops::OperatorModel& model,
                const std::vector<ops::OperatorSample>& dataset,
                const TrainConfig& cfg, std::uint64_t seed,
                const std::function<void(int)>& on_step) {
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  const int n = static_cast<int>(dataset.size());
  const int batch =
      (cfg.batch_size <= 0 || cfg.batch_size >= n) ? n : cfg.batch_size;

  Eigen::VectorXd params = model.flatten();
  Eigen::VectorXd grad(params.size());
  const Eigen::Index proj_len =
      cfg.projection_lr_scale != 1.0
          ? static_cast<Eigen::Index>(model.projection_param_count())
          : 0;
  Eigen::VectorXd proj_prev(proj_len);
  nn::AdamState state = nn::AdamState::fresh(params.size(), cfg.lr);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, n - 1);

  std::vector<int> full(n);
  for (int i = 0; i < n; ++i) full[i] = i;
  std::vector<int> indices(batch);

  double noise_std = 0.0;
  if (cfg.value_noise > 0.0) {
    double sum = 0.0, sq = 0.0;
    long count = 0;
    for (const auto& s : dataset) {
      sum += s.input_values.sum();
      sq += s.input_values.squaredNorm();
      count += s.input_values.size();
    }
    const double mean = sum / count;
    noise_std = cfg.value_noise * std::sqrt(std::max(0.0, sq / count - mean * mean));
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<ops::OperatorSample> scratch;
  std::vector<int> scratch_idx(batch);
  for (int i = 0; i < batch; ++i) scratch_idx[i] = i;

  LossTrace trace;
  trace.per_step.reserve(cfg.steps);
  for (int step = 0; step < cfg.steps; ++step) {
    double lr = cfg.lr;
    for (double frac : cfg.lr_decay_at)
      if (step >= frac * cfg.steps) lr *= 0.5;
    state.lr = lr;

    if (batch == n) {
      indices = full;
    } else {
      for (int& i : indices) i = pick(rng);
    }
    double value;
    if (noise_std > 0.0) {
      scratch.assign(indices.size(), {});
      for (std::size_t b = 0; b < indices.size(); ++b) {
        scratch[b] = dataset[indices[b]];
        for (Eigen::Index i = 0; i < scratch[b].input_values.size(); ++i)
          scratch[b].input_values[i] += noise_std * gauss(rng);
      }
      value = loss(model, scratch, scratch_idx, grad);
    } else {
      value = loss(model, dataset, indices, grad);
    }
    trace.per_step.push_back(value);
    if (value > 1e6) {
      std::ostringstream os;
      os << "train: divergence at step " << step << " (loss " << value
         << "); trace tail:";
      const std::size_t from = trace.per_step.size() > 10 ? trace.per_step.size() - 10 : 0;
      for (std::size_t i = from; i < trace.per_step.size(); ++i)
        os << " " << trace.per_step[i];
      throw std::runtime_error(os.str());
    }
    if (proj_len > 0) proj_prev = params.head(proj_len);
    nn::adam_step(state, params, grad);
    if (proj_len > 0)
      params.head(proj_len) =
          proj_prev + cfg.projection_lr_scale * (params.head(proj_len) - proj_prev);
    if (cfg.weight_decay > 0.0) params *= 1.0 - lr * cfg.weight_decay;
    model.unflatten(params);
    if (on_step) on_step(step);
  }
  return trace;
}

RelativeErrorReport relative_error(const ops::OperatorModel& model,
                                   const std::vector<ops::OperatorSample>& test) {
  std::map<int, std::pair<double, double>> acc;  // instance -> (err^2, true^2)
  for (const auto& s : test) {
    const double pred = model.forward(s);
    auto& a = acc[s.instance];
    a.first += (pred - s.target) * (pred - s.target);
    a.second += s.target * s.target;
  }
  RelativeErrorReport rep;
  for (const auto& [instance, a] : acc) {
    if (a.second <= 0.0) {
      ++rep.skipped;
      std::cerr << "warning: instance " << instance
                << " has zero-norm truth, skipped\n";
      continue;
    }
    rep.per_instance.push_back(std::sqrt(a.first / a.second));
  }
  if (!rep.per_instance.empty()) {
    double sum = 0.0;
    for (double e : rep.per_instance) sum += e;
    rep.mean = sum / static_cast<double>(rep.per_instance.size());
  }
  return rep;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["per_model_errors"] = per_model_errors;
  j["mean_error"] = mean_error;
  j["std_error"] = std_error;
  j["param_count"] = param_count;
  j["wall_seconds"] = wall_seconds;
  if (coarse_baseline_error) j["coarse_baseline_error"] = *coarse_baseline_error;
  j["failed_members"] = failed_members;
  return j;
}

std::string EvalReport::to_csv() const {
  std::ostringstream os;
  os << "model,relative_error\n";
  for (std::size_t i = 0; i < per_model_errors.size(); ++i)
    os << i << "," << per_model_errors[i] << "\n";
  return os.str();
}

EvalReport run_ensemble(const TrainConfig& cfg,
                        const std::vector<ops::OperatorSample>& train_set,
                        const std::vector<ops::OperatorSample>& test_set) {
  const auto start = std::chrono::steady_clock::now();
  EvalReport report;
  report.per_model_errors.assign(cfg.ensemble_size, 0.0);
  std::vector<int> status(cfg.ensemble_size, 0);  // 1 ok, -1 failed

  auto run_member = [&](int member) {
    try {
      const std::uint64_t member_seed = nn::mix_seed(cfg.seed, 7000 + member);
      ops::OperatorModel model = make_model(cfg, train_set, member_seed);
      if (member == 0) report.param_count = model.param_count();

      double error;
      if (cfg.trailing_window > 0) {
        // Trailing-window average: evaluate at 10 evenly spaced points in
        // the final window and average.
        const int window = std::min(cfg.trailing_window, cfg.steps);
        const int stride = std::max(1, window / 10);
        double sum = 0.0;
        int count = 0;
        train(model, train_set, cfg, member_seed, [&](int step) {
          if (step >= cfg.steps - window &&
              (cfg.steps - 1 - step) % stride == 0) {
            sum += relative_error(model, test_set).mean;
            ++count;
          }
        });
        error = count > 0 ? sum / count : relative_error(model, test_set).mean;
      } else {
        train(model, train_set, cfg, member_seed);
        error = relative_error(model, test_set).mean;
      }
      report.per_model_errors[member] = error;
      status[member] = 1;
    } catch (const std::exception& e) {
      std::cerr << "ensemble member " << member << " failed: " << e.what()
                << "\n";
      status[member] = -1;
    }
  };

  const int workers = cfg.audit ? 1 : std::max(1, cfg.workers);
  if (workers == 1) {
    for (int m = 0; m < cfg.ensemble_size; ++m) run_member(m);
  } else {
    std::vector<std::thread> pool;
    std::mutex next_mutex;
    int next = 0;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&]() {
        while (true) {
          int m;
          {
            std::lock_guard<std::mutex> lock(next_mutex);
            if (next >= cfg.ensemble_size) return;
            m = next++;
          }
          run_member(m);
        }
      });
    for (auto& t : pool) t.join();
  }

  std::vector<double> ok_errors;
  for (int m = 0; m < cfg.ensemble_size; ++m) {
    if (status[m] == 1)
      ok_errors.push_back(report.per_model_errors[m]);
    else
      report.failed_members.push_back(m);
  }
  report.per_model_errors = ok_errors;
  if (!ok_errors.empty()) {
    double sum = 0.0;
    for (double e : ok_errors) sum += e;
    report.mean_error = sum / static_cast<double>(ok_errors.size());
    double var = 0.0;
    for (double e : ok_errors)
      var += (e - report.mean_error) * (e - report.mean_error);
    report.std_error = std::sqrt(var / static_cast<double>(ok_errors.size()));
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

}  // namespace belnet::train
