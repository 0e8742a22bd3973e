#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "belnet/checkpoint.hpp"
#include "belnet/dataset_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

using namespace belnet::io;
using namespace belnet::ops;
using belnet::nn::Activation;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("belnet_io_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string base(const std::string& name) const {
    return (path / name).string();
  }
};

std::vector<OperatorSample> sample_batch(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-2.0, 2.0);
  std::vector<OperatorSample> out(count);
  for (int i = 0; i < count; ++i) {
    auto& s = out[i];
    const int n = 3 + static_cast<int>(rng() % 4);
    s.sensors.locations.resize(n, 2);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < 2; ++c) s.sensors.locations(r, c) = unit(rng);
    s.input_values.resize(n);
    for (int r = 0; r < n; ++r) s.input_values[r] = unit(rng);
    s.query.resize(2);
    s.query[0] = unit(rng);
    s.query[1] = unit(rng);
    s.target = unit(rng);
    s.instance = i % 3;
  }
  return out;
}

OperatorModel tiny_model(ArchKind kind, std::uint64_t seed) {
  BelNetDims dims;
  dims.N = 4;
  dims.d_in = 2;
  dims.d = 2;
  dims.C = 2;
  dims.K = 2;
  dims.I = 3;
  dims.proj_hidden = 4;
  const Normalizer norm = Normalizer::identity(2, 2);
  switch (kind) {
    case ArchKind::BelNet:
      return OperatorModel(init_belnet(dims, Activation::Tanh, seed), norm);
    case ArchKind::VanillaBelNet:
      return OperatorModel(init_vanilla_belnet(dims, Activation::Tanh, seed),
                           norm);
    case ArchKind::DeepOnet:
      return OperatorModel(init_deeponet(4, 2, 5, 2, Activation::Tanh, seed),
                           norm);
  }
  throw std::logic_error("unreachable");
}

}  // namespace

TEST_CASE("dataset round-trips bit-exactly with a manifest") {
  TempDir tmp;
  const auto samples = sample_batch(17, 3);
  nlohmann::json echo = {{"experiment", "unit"}, {"n", 17}};
  write_dataset(tmp.base("ds"), samples, echo, 99);

  const auto back = read_dataset(tmp.base("ds"));
  REQUIRE(back.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK((back[i].sensors.locations - samples[i].sensors.locations).norm() ==
          0.0);
    CHECK((back[i].input_values - samples[i].input_values).norm() == 0.0);
    CHECK((back[i].query - samples[i].query).norm() == 0.0);
    CHECK(back[i].target == samples[i].target);
    CHECK(back[i].instance == samples[i].instance);
  }

  const auto manifest = read_manifest(tmp.base("ds"));
  CHECK(manifest["seed"].get<std::uint64_t>() == 99);
  CHECK(manifest["sample_count"].get<std::size_t>() == samples.size());
  CHECK(manifest["config"]["experiment"] == "unit");
  CHECK(manifest["data_file_hash"].get<std::uint64_t>() ==
        file_hash(tmp.base("ds") + ".data"));
}

TEST_CASE("identical datasets hash identically, different ones differ") {
  TempDir tmp;
  const auto a = sample_batch(8, 5);
  auto b = a;
  b[0].target += 1e-12;
  write_dataset(tmp.base("a1"), a, {}, 1);
  write_dataset(tmp.base("a2"), a, {}, 1);
  write_dataset(tmp.base("b"), b, {}, 1);
  CHECK(file_hash(tmp.base("a1") + ".data") ==
        file_hash(tmp.base("a2") + ".data"));
  CHECK(file_hash(tmp.base("a1") + ".data") !=
        file_hash(tmp.base("b") + ".data"));
}

TEST_CASE("reading a missing dataset reports the path") {
  TempDir tmp;
  CHECK_THROWS_WITH_AS(read_dataset(tmp.base("absent")),
                       doctest::Contains("absent"), std::runtime_error);
}

TEST_CASE("truncated dataset files are rejected") {
  TempDir tmp;
  const auto samples = sample_batch(6, 7);
  write_dataset(tmp.base("ds"), samples, {}, 2);
  const std::string data = tmp.base("ds") + ".data";
  const auto size = fs::file_size(data);
  fs::resize_file(data, size / 2);
  CHECK_THROWS_AS(read_dataset(tmp.base("ds")), std::runtime_error);
}

TEST_CASE("checkpoints round-trip every architecture") {
  TempDir tmp;
  for (ArchKind kind :
       {ArchKind::BelNet, ArchKind::VanillaBelNet, ArchKind::DeepOnet}) {
    const OperatorModel m = tiny_model(kind, 11);
    const std::string base = tmp.base("ckpt_" + std::string(arch_name(kind)));
    save_checkpoint(m, Activation::Tanh, base);
    const OperatorModel r = load_checkpoint(base);
    CHECK(r.kind() == m.kind());
    CHECK(r.param_count() == m.param_count());
    CHECK((r.flatten() - m.flatten()).norm() == 0.0);

    OperatorSample s;
    s.sensors.locations = Eigen::MatrixXd::Random(4, 2);
    s.input_values = Eigen::VectorXd::Random(4);
    s.query = Eigen::VectorXd::Random(2);
    CHECK(r.forward(s) == m.forward(s));
  }
}

TEST_CASE("checkpoint with corrupted magic is rejected") {
  TempDir tmp;
  const OperatorModel m = tiny_model(ArchKind::BelNet, 21);
  save_checkpoint(m, Activation::Tanh, tmp.base("ck"));
  {
    std::fstream f(tmp.base("ck") + ".bin",
                   std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.put('X');
  }
  CHECK_THROWS_AS(load_checkpoint(tmp.base("ck")), std::runtime_error);
}

TEST_CASE("checkpoint layout hash mismatch is rejected") {
  TempDir tmp;
  const OperatorModel m = tiny_model(ArchKind::BelNet, 22);
  save_checkpoint(m, Activation::Tanh, tmp.base("ck"));
  // Swap in a sidecar describing different dimensions: the blob's layout
  // hash no longer matches the reconstructed model.
  auto sidecar_path = tmp.base("ck") + ".json";
  nlohmann::json sidecar;
  {
    std::ifstream in(sidecar_path);
    in >> sidecar;
  }
  sidecar["dims"]["C"] = sidecar["dims"]["C"].get<int>() + 1;
  {
    std::ofstream out(sidecar_path);
    out << sidecar;
  }
  CHECK_THROWS_AS(load_checkpoint(tmp.base("ck")), std::runtime_error);
}

TEST_CASE("parameter blobs verify their hash") {
  TempDir tmp;
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(9, -1.0, 1.0);
  const std::string path = tmp.base("blob.bin");
  write_param_blob(path, 1234, v);
  CHECK((read_param_blob(path, 1234) - v).norm() == 0.0);
  CHECK_THROWS_AS(read_param_blob(path, 4321), std::runtime_error);
}
