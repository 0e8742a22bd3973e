#pragma once

// Model checkpoints: flat little-endian float64 parameter blob with a short
// header (magic, version, layout hash) plus a JSON sidecar carrying the
// architecture kind, dimensions, activation and normalization constants.

#include "belnet/operators.hpp"

#include <cstdint>
#include <string>

namespace belnet::ops {

std::uint64_t layout_hash(const OperatorModel& m);

// Writes <path_base>.bin and <path_base>.json. The activation passed is the
// one the model was initialized with (uniform across subnets).
void save_checkpoint(const OperatorModel& m, Activation act,
                     Activation construction_act, const std::string& path_base);
inline void save_checkpoint(const OperatorModel& m, Activation act,
                            const std::string& path_base) {
  save_checkpoint(m, act, act, path_base);
}

OperatorModel load_checkpoint(const std::string& path_base);

// Raw parameter blob io (shared with dataset containers for the header
// convention).
void write_param_blob(const std::string& path, std::uint64_t hash,
                      const Eigen::VectorXd& values);
Eigen::VectorXd read_param_blob(const std::string& path,
                                std::uint64_t expected_hash);

}  // namespace belnet::ops
