#include "belnet/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace belnet::sampling {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

}  // namespace

std::pair<SensorSet, Eigen::VectorXd> burgers_sample_sensors(
    const pde::GridFunction1d& ic, int n_sensors, std::uint64_t seed) {
  if (n_sensors < 1)
    throw std::invalid_argument("burgers_sample_sensors: n_sensors < 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> xs(n_sensors);
  for (auto& x : xs) x = unit(rng) * kTwoPi;
  std::sort(xs.begin(), xs.end());

  SensorSet sensors;
  sensors.locations.resize(n_sensors, 1);
  Eigen::VectorXd values(n_sensors);
  for (int i = 0; i < n_sensors; ++i) {
    sensors.locations(i, 0) = xs[i];
    values[i] = ic.interpolate(xs[i]);
  }
  return {std::move(sensors), std::move(values)};
}

std::pair<SensorSet, Eigen::VectorXd> make_patch_1d(
    double center, const PatchSpec& spec, const pde::GridFunction1d& coarse_u0,
    std::uint64_t seed) {
  if (spec.size % 2 == 0) throw std::invalid_argument("patch size must be odd");
  std::mt19937_64 rng(seed);
  const int half = spec.size / 2;
  const double s = spec.base_spacing;
  const int candidates = spec.jitter_candidates == 0 ? 3 : spec.jitter_candidates;

  SensorSet sensors;
  sensors.locations.resize(spec.size, 1);
  Eigen::VectorXd values(spec.size);
  std::uniform_int_distribution<int> pick(0, candidates - 1);
  for (int k = -half; k <= half; ++k) {
    double x = center + k * s;
    if (candidates > 1) {
      const int c = pick(rng);         // {node, node - s/2, node + s/2}
      if (c == 1) x -= 0.5 * s;
      if (c == 2) x += 0.5 * s;
    }
    x = std::clamp(x, 0.0, 1.0);
    sensors.locations(k + half, 0) = x;
    values[k + half] = coarse_u0.interpolate(x);
  }
  return {std::move(sensors), std::move(values)};
}

std::pair<SensorSet, Eigen::VectorXd> make_patch_2d(
    double cx, double cy, const PatchSpec& spec,
    const pde::GridFunction2d& coarse_u0, std::uint64_t seed) {
  if (spec.size % 2 == 0) throw std::invalid_argument("patch size must be odd");
  std::mt19937_64 rng(seed);
  const int half = spec.size / 2;
  const double s = spec.base_spacing;
  const int candidates = spec.jitter_candidates == 0 ? 9 : spec.jitter_candidates;

  const int n = spec.size * spec.size;
  SensorSet sensors;
  sensors.locations.resize(n, 2);
  Eigen::VectorXd values(n);
  std::uniform_int_distribution<int> pick(0, candidates - 1);
  int r = 0;
  for (int j = -half; j <= half; ++j)
    for (int i = -half; i <= half; ++i) {
      double x = cx + i * s, y = cy + j * s;
      if (candidates > 1) {
        const int c = pick(rng);  // 3x3 compass pattern of half-step offsets
        x += (c % 3 - 1) * 0.5 * s;
        y += (c / 3 - 1) * 0.5 * s;
      }
      x = std::clamp(x, 0.0, 1.0);
      y = std::clamp(y, 0.0, 1.0);
      sensors.locations(r, 0) = x;
      sensors.locations(r, 1) = y;
      values[r] = coarse_u0.interpolate(x, y);
      ++r;
    }
  return {std::move(sensors), std::move(values)};
}

std::vector<double> observation_lattice_1d(int n_obs) {
  std::vector<double> xs(n_obs);
  for (int i = 0; i < n_obs; ++i) xs[i] = (i + 0.5) / n_obs;
  return xs;
}

std::vector<std::pair<double, double>> observation_lattice_2d(int n_obs) {
  const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_obs))));
  if (k * k != n_obs)
    throw std::invalid_argument("observation_lattice_2d: n_obs must be square");
  std::vector<std::pair<double, double>> pts;
  pts.reserve(n_obs);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i)
      pts.emplace_back((i + 0.5) / k, (j + 0.5) / k);
  return pts;
}

std::vector<OperatorSample> assemble_multiscale_dataset_1d(
    const pde::GridFunction1d& fine_u, const pde::GridFunction1d& coarse_u0,
    int n_obs, const PatchSpec& spec, std::uint64_t seed, int realizations) {
  const auto xs = observation_lattice_1d(n_obs);
  std::vector<OperatorSample> out;
  out.reserve(static_cast<std::size_t>(n_obs) * realizations);
  for (int r = 0; r < realizations; ++r)
    for (int i = 0; i < n_obs; ++i) {
      OperatorSample sample;
      auto [sensors, values] = make_patch_1d(
          xs[i], spec, coarse_u0,
          nn::mix_seed(seed, static_cast<std::uint64_t>(r) * n_obs + i));
      sample.sensors = std::move(sensors);
      sample.input_values = std::move(values);
      sample.query = Eigen::VectorXd::Constant(1, xs[i]);
      sample.target = fine_u.interpolate(xs[i]);
      sample.instance = i;
      out.push_back(std::move(sample));
    }
  return out;
}

std::vector<OperatorSample> assemble_multiscale_dataset_2d(
    const pde::GridFunction2d& fine_u, const pde::GridFunction2d& coarse_u0,
    int n_obs, const PatchSpec& spec, std::uint64_t seed, int realizations) {
  const auto pts = observation_lattice_2d(n_obs);
  std::vector<OperatorSample> out;
  out.reserve(static_cast<std::size_t>(n_obs) * realizations);
  for (int r = 0; r < realizations; ++r)
    for (int i = 0; i < n_obs; ++i) {
      OperatorSample sample;
      auto [sensors, values] = make_patch_2d(
          pts[i].first, pts[i].second, spec, coarse_u0,
          nn::mix_seed(seed, static_cast<std::uint64_t>(r) * n_obs + i));
      sample.sensors = std::move(sensors);
      sample.input_values = std::move(values);
      sample.query = Eigen::VectorXd(2);
      sample.query << pts[i].first, pts[i].second;
      sample.target = fine_u.interpolate(pts[i].first, pts[i].second);
      sample.instance = i;
      out.push_back(std::move(sample));
    }
  return out;
}

BurgersDataset assemble_burgers_dataset(int n_train, int n_test,
                                        std::uint64_t seed, int n_sensors,
                                        int fine_cells) {
  BurgersDataset ds;
  const pde::Grid1d grid{0.0, kTwoPi, fine_cells, true};
  std::mt19937_64 srng(nn::mix_seed(seed, 0));
  std::uniform_real_distribution<double> s_dist(0.0, 4.0);

  auto build_instance = [&](int instance, double s, std::uint64_t sensor_seed,
                            bool training) {
    const auto ic = pde::burgers_ic(s, grid);
    const auto snaps = pde::burgers_solve(ic, 0.1, 0.3, 6);
    auto [sensors, values] = burgers_sample_sensors(ic, n_sensors, sensor_seed);
    std::vector<OperatorSample> samples;
    if (training) {
      // Query grid: the sensor x-locations crossed with the 5 retained
      // snapshot times; t = 0.3 held out.
      for (int ti = 0; ti < 5; ++ti) {
        const double t = 0.06 * ti;
        for (int si = 0; si < n_sensors; ++si) {
          OperatorSample smp;
          smp.sensors = sensors;
          smp.input_values = values;
          smp.query = Eigen::VectorXd(2);
          smp.query << sensors.locations(si, 0), t;
          smp.target = snaps[ti].interpolate(sensors.locations(si, 0));
          smp.instance = instance;
          samples.push_back(std::move(smp));
        }
      }
    } else {
      for (int qi = 0; qi < 151; ++qi) {
        const double x = kTwoPi * qi / 150.0;
        OperatorSample smp;
        smp.sensors = sensors;
        smp.input_values = values;
        smp.query = Eigen::VectorXd(2);
        smp.query << x, 0.3;
        smp.target = snaps[5].interpolate(x);
        smp.instance = instance;
        samples.push_back(std::move(smp));
      }
    }
    return samples;
  };

  for (int i = 0; i < n_train; ++i) {
    const double s = s_dist(srng);
    ds.train_s.push_back(s);
    auto samples = build_instance(i, s, nn::mix_seed(seed, 1000 + i), true);
    ds.train.insert(ds.train.end(), std::make_move_iterator(samples.begin()),
                    std::make_move_iterator(samples.end()));
  }
  for (int i = 0; i < n_test; ++i) {
    const double s = s_dist(srng);
    ds.test_s.push_back(s);
    auto samples =
        build_instance(i, s, nn::mix_seed(seed, 500000 + i), false);
    ds.test.insert(ds.test.end(), std::make_move_iterator(samples.begin()),
                   std::make_move_iterator(samples.end()));
  }
  return ds;
}

}  // namespace belnet::sampling
