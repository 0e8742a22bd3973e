#pragma once

// Sensor placement and dataset assembly: random Burgers sensors, jittered
// local patches of the coarse solution, and the (query, input values,
// target) triples used for training.

#include "belnet/operators.hpp"
#include "belnet/pde.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace belnet::sampling {

using ops::OperatorSample;
using ops::SensorSet;

struct PatchSpec {
  int size = 3;               // odd; p sensors in 1D, p*p in 2D
  double base_spacing = 0.0;  // coarse-mesh step
  // Candidate offsets per patch node: the node plus half-step compass
  // neighbors (3 in 1D, 9 in 2D). 1 disables jitter.
  int jitter_candidates = 0;  // 0 = dimension default
  std::uint64_t seed = 0;
};

// 25 (by default) uniform-random sensor locations on the periodic domain of
// the initial condition, values by linear interpolation, sorted by location.
std::pair<SensorSet, Eigen::VectorXd> burgers_sample_sensors(
    const pde::GridFunction1d& ic, int n_sensors, std::uint64_t seed);

// One jittered patch of the coarse solution around an observation point.
// Offsets are drawn uniformly from the candidate set, independently per
// node; sensors are clamped into [0,1]^dim.
std::pair<SensorSet, Eigen::VectorXd> make_patch_1d(
    double center, const PatchSpec& spec, const pde::GridFunction1d& coarse_u0,
    std::uint64_t seed);
std::pair<SensorSet, Eigen::VectorXd> make_patch_2d(
    double cx, double cy, const PatchSpec& spec,
    const pde::GridFunction2d& coarse_u0, std::uint64_t seed);

// Observation lattice: cell centers of a uniform sub-lattice, n_obs points
// (1D) or n_obs = k*k points (2D).
std::vector<double> observation_lattice_1d(int n_obs);
std::vector<std::pair<double, double>> observation_lattice_2d(int n_obs);

// One OperatorSample per observation point and jitter realization; targets
// come from the fine reference, inputs from freshly jittered patches of the
// coarse solution. `realizations` > 1 repeats the lattice with independent
// jitter draws (training-time augmentation).
std::vector<OperatorSample> assemble_multiscale_dataset_1d(
    const pde::GridFunction1d& fine_u, const pde::GridFunction1d& coarse_u0,
    int n_obs, const PatchSpec& spec, std::uint64_t seed, int realizations = 1);
std::vector<OperatorSample> assemble_multiscale_dataset_2d(
    const pde::GridFunction2d& fine_u, const pde::GridFunction2d& coarse_u0,
    int n_obs, const PatchSpec& spec, std::uint64_t seed, int realizations = 1);

struct BurgersDataset {
  std::vector<OperatorSample> train;  // 25 sensor locations x 5 times per IC
  std::vector<OperatorSample> test;   // 151 query points at t = 0.3 per IC
  std::vector<double> train_s, test_s;  // amplitude parameter per instance
};

// Draws s ~ U[0,4] per instance, generates the inviscid preroll initial
// condition, solves the viscous equation and assembles train/test triples.
// Training excludes the terminal time t = 0.3.
BurgersDataset assemble_burgers_dataset(int n_train, int n_test,
                                        std::uint64_t seed,
                                        int n_sensors = 25, int fine_cells = 512);

}  // namespace belnet::sampling
