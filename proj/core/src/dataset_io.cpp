#include "belnet/dataset_io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace belnet::io {

namespace {

constexpr char kMagic[8] = {'B', 'E', 'L', 'D', 'A', 'T', 'A', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& f, const T& v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& f) {
  T v{};
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace

void write_dataset(const std::string& base,
                   const std::vector<ops::OperatorSample>& samples,
                   const nlohmann::json& config_echo, std::uint64_t seed) {
  const std::string data_path = base + ".data";
  {
    std::ofstream f(data_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + data_path);
    f.write(kMagic, 8);
    put(f, kVersion);
    put(f, static_cast<std::uint64_t>(samples.size()));
    for (const auto& s : samples) {
      put(f, static_cast<std::uint32_t>(s.sensors.count()));
      put(f, static_cast<std::uint32_t>(s.sensors.dim()));
      put(f, static_cast<std::uint32_t>(s.query.size()));
      put(f, static_cast<std::int32_t>(s.instance));
      put(f, s.target);
      f.write(reinterpret_cast<const char*>(s.sensors.locations.data()),
              static_cast<std::streamsize>(s.sensors.locations.size() *
                                           sizeof(double)));
      f.write(reinterpret_cast<const char*>(s.input_values.data()),
              static_cast<std::streamsize>(s.input_values.size() * sizeof(double)));
      f.write(reinterpret_cast<const char*>(s.query.data()),
              static_cast<std::streamsize>(s.query.size() * sizeof(double)));
    }
    if (!f) throw std::runtime_error("write failed: " + data_path);
  }

  int instances = 0;
  for (const auto& s : samples) instances = std::max(instances, s.instance + 1);
  nlohmann::json manifest;
  manifest["config"] = config_echo;
  manifest["seed"] = seed;
  manifest["seed_derivation"] =
      "per-draw seeds are mix_seed(seed, stream) with the streams documented "
      "in the generating module";
  manifest["sample_count"] = samples.size();
  manifest["instance_count"] = instances;
  manifest["data_file_hash"] = file_hash(data_path);
  std::ofstream mf(base + ".manifest.json");
  if (!mf) throw std::runtime_error("cannot write " + base + ".manifest.json");
  mf << manifest.dump(2) << "\n";
}

std::vector<ops::OperatorSample> read_dataset(const std::string& base) {
  const std::string data_path = base + ".data";
  std::ifstream f(data_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + data_path);
  char magic[8];
  f.read(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("bad magic in " + data_path);
  if (get<std::uint32_t>(f) != kVersion)
    throw std::runtime_error("bad version in " + data_path);
  const auto count = get<std::uint64_t>(f);
  std::vector<ops::OperatorSample> samples(count);
  for (auto& s : samples) {
    const auto n = get<std::uint32_t>(f);
    const auto d_in = get<std::uint32_t>(f);
    const auto d = get<std::uint32_t>(f);
    s.instance = get<std::int32_t>(f);
    s.target = get<double>(f);
    s.sensors.locations.resize(n, d_in);
    f.read(reinterpret_cast<char*>(s.sensors.locations.data()),
           static_cast<std::streamsize>(static_cast<std::size_t>(n) * d_in *
                                        sizeof(double)));
    s.input_values.resize(n);
    f.read(reinterpret_cast<char*>(s.input_values.data()),
           static_cast<std::streamsize>(n * sizeof(double)));
    s.query.resize(d);
    f.read(reinterpret_cast<char*>(s.query.data()),
           static_cast<std::streamsize>(d * sizeof(double)));
  }
  if (!f) throw std::runtime_error("truncated dataset: " + data_path);
  return samples;
}

nlohmann::json read_manifest(const std::string& base) {
  std::ifstream mf(base + ".manifest.json");
  if (!mf) throw std::runtime_error("cannot read " + base + ".manifest.json");
  nlohmann::json j;
  mf >> j;
  return j;
}

std::uint64_t file_hash(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot hash " + path);
  std::uint64_t h = 14695981039346656037ULL;
  char buf[4096];
  while (f.read(buf, sizeof(buf)) || f.gcount() > 0) {
    for (std::streamsize i = 0; i < f.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
    if (!f) break;
  }
  return h;
}

}  // namespace belnet::io
