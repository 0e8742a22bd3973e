#pragma once

// Self-describing binary dataset container plus JSON manifest (config echo,
// seeds, counts, content hash).

#include "belnet/operators.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace belnet::io {

// Writes <base>.data and <base>.manifest.json.
void write_dataset(const std::string& base,
                   const std::vector<ops::OperatorSample>& samples,
                   const nlohmann::json& config_echo, std::uint64_t seed);

std::vector<ops::OperatorSample> read_dataset(const std::string& base);

nlohmann::json read_manifest(const std::string& base);

// FNV-1a over the file bytes.
std::uint64_t file_hash(const std::string& path);

}  // namespace belnet::io
