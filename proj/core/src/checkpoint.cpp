#include "belnet/checkpoint.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace belnet::ops {

namespace {

constexpr char kMagic[8] = {'B', 'E', 'L', 'P', 'A', 'R', 'M', '1'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

nlohmann::json normalizer_to_json(const Normalizer& n) {
  nlohmann::json j;
  j["coord_shift"] = std::vector<double>(n.coord_shift.begin(), n.coord_shift.end());
  j["coord_scale"] = std::vector<double>(n.coord_scale.begin(), n.coord_scale.end());
  j["value_shift"] = n.value_shift;
  j["value_scale"] = n.value_scale;
  j["query_shift"] = std::vector<double>(n.query_shift.begin(), n.query_shift.end());
  j["query_scale"] = std::vector<double>(n.query_scale.begin(), n.query_scale.end());
  return j;
}

Normalizer normalizer_from_json(const nlohmann::json& j) {
  auto vec = [](const nlohmann::json& a) {
    Eigen::VectorXd v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
    return v;
  };
  Normalizer n;
  n.coord_shift = vec(j.at("coord_shift"));
  n.coord_scale = vec(j.at("coord_scale"));
  n.value_shift = j.at("value_shift").get<double>();
  n.value_scale = j.at("value_scale").get<double>();
  n.query_shift = vec(j.at("query_shift"));
  n.query_scale = vec(j.at("query_scale"));
  return n;
}

}  // namespace

std::uint64_t layout_hash(const OperatorModel& m) {
  return fnv1a(m.layout_descriptor());
}

void write_param_blob(const std::string& path, std::uint64_t hash,
                      const Eigen::VectorXd& values) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f.write(kMagic, 8);
  f.write(reinterpret_cast<const char*>(&kVersion), sizeof(kVersion));
  f.write(reinterpret_cast<const char*>(&hash), sizeof(hash));
  const std::uint64_t count = values.size();
  f.write(reinterpret_cast<const char*>(&count), sizeof(count));
  f.write(reinterpret_cast<const char*>(values.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!f) throw std::runtime_error("write failed: " + path);
}

Eigen::VectorXd read_param_blob(const std::string& path,
                                std::uint64_t expected_hash) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for read: " + path);
  char magic[8];
  f.read(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("bad magic in " + path);
  std::uint32_t version = 0;
  f.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (version != kVersion) throw std::runtime_error("bad version in " + path);
  std::uint64_t hash = 0, count = 0;
  f.read(reinterpret_cast<char*>(&hash), sizeof(hash));
  if (expected_hash != 0 && hash != expected_hash)
    throw std::runtime_error("layout hash mismatch in " + path);
  f.read(reinterpret_cast<char*>(&count), sizeof(count));
  Eigen::VectorXd values(count);
  f.read(reinterpret_cast<char*>(values.data()),
         static_cast<std::streamsize>(count * sizeof(double)));
  if (!f) throw std::runtime_error("truncated blob: " + path);
  return values;
}

void save_checkpoint(const OperatorModel& m, Activation act,
                     Activation construction_act,
                     const std::string& path_base) {
  nlohmann::json j;
  j["kind"] = arch_name(m.kind());
  j["activation"] = nn::activation_name(act);
  j["construction_activation"] = nn::activation_name(construction_act);
  j["layout_hash"] = layout_hash(m);
  j["param_count"] = m.param_count();
  j["normalizer"] = normalizer_to_json(m.normalizer());
  if (m.kind() == ArchKind::BelNet || m.kind() == ArchKind::VanillaBelNet) {
    const BelNetDims& d =
        m.kind() == ArchKind::BelNet ? m.belnet().dims : m.vanilla().dims;
    j["dims"] = {{"N", d.N},         {"C", d.C}, {"K", d.K},
                 {"I", d.I},         {"d", d.d}, {"d_in", d.d_in},
                 {"proj_hidden", d.proj_hidden}};
  } else {
    const auto& p = m.deeponet();
    j["dims"] = {{"N", p.branch_net.in_dim()},
                 {"K", p.branch_net.out_dim()},
                 {"hidden", p.branch_net.layers().front().out_dim()},
                 {"d", p.trunk_net.in_dim()}};
  }
  std::ofstream sidecar(path_base + ".json");
  if (!sidecar) throw std::runtime_error("cannot write " + path_base + ".json");
  sidecar << j.dump(2) << "\n";
  write_param_blob(path_base + ".bin", layout_hash(m), m.flatten());
}

OperatorModel load_checkpoint(const std::string& path_base) {
  std::ifstream sidecar(path_base + ".json");
  if (!sidecar) throw std::runtime_error("cannot read " + path_base + ".json");
  nlohmann::json j;
  sidecar >> j;
  const ArchKind kind = arch_from_name(j.at("kind").get<std::string>());
  const Activation act =
      nn::activation_from_name(j.at("activation").get<std::string>());
  const Activation cact =
      j.contains("construction_activation")
          ? nn::activation_from_name(
                j.at("construction_activation").get<std::string>())
          : act;
  const Normalizer norm = normalizer_from_json(j.at("normalizer"));

  OperatorModel model;
  const auto& jd = j.at("dims");
  if (kind == ArchKind::BelNet || kind == ArchKind::VanillaBelNet) {
    BelNetDims dims;
    dims.N = jd.at("N").get<int>();
    dims.C = jd.at("C").get<int>();
    dims.K = jd.at("K").get<int>();
    dims.I = jd.at("I").get<int>();
    dims.d = jd.at("d").get<int>();
    dims.d_in = jd.at("d_in").get<int>();
    dims.proj_hidden = jd.at("proj_hidden").get<int>();
    if (kind == ArchKind::BelNet)
      model = OperatorModel(init_belnet(dims, act, 0, cact), norm);
    else
      model = OperatorModel(init_vanilla_belnet(dims, act, 0, cact), norm);
  } else {
    model = OperatorModel(
        init_deeponet(jd.at("N").get<int>(), jd.at("K").get<int>(),
                      jd.at("hidden").get<int>(), jd.at("d").get<int>(), act, 0,
                      cact),
        norm);
  }
  const std::uint64_t expected = j.at("layout_hash").get<std::uint64_t>();
  if (expected != layout_hash(model))
    throw std::runtime_error("sidecar layout hash does not match architecture");
  model.unflatten(read_param_blob(path_base + ".bin", expected));
  return model;
}

}  // namespace belnet::ops
