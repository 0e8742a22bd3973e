#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "belnet/sampling.hpp"

#include <cmath>
#include <numbers>
#include <set>

using namespace belnet::sampling;
using belnet::pde::Grid1d;
using belnet::pde::GridFunction1d;
using belnet::pde::GridFunction2d;

namespace {

constexpr double kPi = std::numbers::pi;

GridFunction1d periodic_sine(int n) {
  GridFunction1d f;
  f.grid = Grid1d{0.0, 2.0 * kPi, n, true};
  f.values.resize(n);
  for (int i = 0; i < n; ++i) f.values[i] = std::sin(f.grid.x(i));
  return f;
}

GridFunction1d unit_linear(int n) {
  GridFunction1d f;
  f.grid = Grid1d{0.0, 1.0, n, false};
  f.values.resize(n + 1);
  for (int i = 0; i <= n; ++i) f.values[i] = 2.0 * f.grid.x(i) + 0.5;
  return f;
}

GridFunction2d constant_2d(int n, double value) {
  GridFunction2d f;
  f.grid.n = n;
  f.values = Eigen::VectorXd::Constant(f.grid.node_count(), value);
  return f;
}

}  // namespace

TEST_CASE("sensor draws are deterministic, sorted and interpolation-exact") {
  const GridFunction1d ic = periodic_sine(512);
  const auto [sa, va] = burgers_sample_sensors(ic, 25, 77);
  const auto [sb, vb] = burgers_sample_sensors(ic, 25, 77);
  const auto [sc, vc] = burgers_sample_sensors(ic, 25, 78);
  CHECK((sa.locations - sb.locations).norm() == 0.0);
  CHECK((va - vb).norm() == 0.0);
  CHECK((sa.locations - sc.locations).norm() != 0.0);
  for (int i = 1; i < 25; ++i)
    CHECK(sa.locations(i, 0) >= sa.locations(i - 1, 0));
  for (int i = 0; i < 25; ++i) {
    CHECK(sa.locations(i, 0) >= 0.0);
    CHECK(sa.locations(i, 0) < 2.0 * kPi);
    CHECK(va[i] ==
          doctest::Approx(ic.interpolate(sa.locations(i, 0))).epsilon(1e-12));
  }
  CHECK_THROWS_AS(burgers_sample_sensors(ic, 0, 1), std::invalid_argument);
}

TEST_CASE("degenerate patch without jitter sits on the observation point") {
  PatchSpec spec;
  spec.size = 1;
  spec.base_spacing = 1.0 / 16.0;
  spec.jitter_candidates = 1;
  const GridFunction1d u0 = unit_linear(64);
  const auto [sensors, values] = make_patch_1d(0.4, spec, u0, 5);
  REQUIRE(sensors.count() == 1);
  CHECK(sensors.locations(0, 0) == doctest::Approx(0.4));
  CHECK(values[0] == doctest::Approx(2.0 * 0.4 + 0.5).epsilon(1e-12));
}

TEST_CASE("three-point patches stay within the candidate offsets") {
  PatchSpec spec;
  spec.size = 3;
  spec.base_spacing = 1.0 / 16.0;
  const GridFunction1d u0 = unit_linear(64);
  const double center = 0.5;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto [sensors, values] = make_patch_1d(center, spec, u0, seed);
    REQUIRE(sensors.count() == 3);
    for (int i = 0; i < 3; ++i) {
      const double nominal = center + (i - 1) * spec.base_spacing;
      const double off = std::abs(sensors.locations(i, 0) - nominal);
      // node itself or half-step neighbors
      CHECK((off < 1e-12 ||
             std::abs(off - 0.5 * spec.base_spacing) < 1e-12));
      // patch locality bound
      CHECK(std::abs(sensors.locations(i, 0) - center) <=
            (spec.size / 2 + 0.5) * spec.base_spacing + 1e-12);
    }
  }
  CHECK_THROWS_AS(make_patch_1d(0.5, PatchSpec{4, 0.1, 0, 0}, u0, 1),
                  std::invalid_argument);
}

TEST_CASE("constant fields yield constant patch values under any jitter") {
  PatchSpec spec;
  spec.size = 5;
  spec.base_spacing = 1.0 / 16.0;
  const GridFunction2d u0 = constant_2d(16, 4.5);
  const auto [sensors, values] = make_patch_2d(0.5, 0.5, spec, u0, 9);
  REQUIRE(sensors.count() == 25);
  for (int i = 0; i < 25; ++i) CHECK(values[i] == doctest::Approx(4.5));
}

TEST_CASE("2d patch sensors are clamped into the unit square") {
  PatchSpec spec;
  spec.size = 7;
  spec.base_spacing = 1.0 / 16.0;
  const GridFunction2d u0 = constant_2d(16, 1.0);
  const auto [sensors, values] = make_patch_2d(0.03, 0.97, spec, u0, 3);
  for (int i = 0; i < sensors.count(); ++i) {
    CHECK(sensors.locations(i, 0) >= 0.0);
    CHECK(sensors.locations(i, 0) <= 1.0);
    CHECK(sensors.locations(i, 1) >= 0.0);
    CHECK(sensors.locations(i, 1) <= 1.0);
  }
}

TEST_CASE("observation lattices are cell centers") {
  const auto obs1 = observation_lattice_1d(16);
  REQUIRE(obs1.size() == 16);
  for (int i = 0; i < 16; ++i)
    CHECK(obs1[i] == doctest::Approx((i + 0.5) / 16.0));

  const auto obs2 = observation_lattice_2d(16);
  REQUIRE(obs2.size() == 16);
  CHECK(obs2[0].first == doctest::Approx(0.125));
  CHECK(obs2[0].second == doctest::Approx(0.125));
  CHECK(obs2[15].first == doctest::Approx(0.875));
  CHECK(obs2[15].second == doctest::Approx(0.875));
  CHECK_THROWS_AS(observation_lattice_2d(15), std::invalid_argument);
}

TEST_CASE("multiscale assembly: targets fine, inputs coarse, jitter varies") {
  const GridFunction1d fine = unit_linear(256);
  GridFunction1d coarse = unit_linear(16);
  coarse.values.array() += 0.1;  // distinguishable from fine

  PatchSpec spec;
  spec.size = 1;
  spec.base_spacing = 1.0 / 16.0;
  spec.jitter_candidates = 1;
  const auto ds = assemble_multiscale_dataset_1d(fine, coarse, 16, spec, 3);
  REQUIRE(ds.size() == 16);
  for (int i = 0; i < 16; ++i) {
    const double xi = (i + 0.5) / 16.0;
    CHECK(ds[i].instance == i);
    CHECK(ds[i].query[0] == doctest::Approx(xi));
    CHECK(ds[i].target == doctest::Approx(fine.interpolate(xi)).epsilon(1e-12));
    CHECK(ds[i].input_values[0] ==
          doctest::Approx(coarse.interpolate(xi)).epsilon(1e-12));
  }

  spec.size = 3;
  spec.jitter_candidates = 0;
  const auto a = assemble_multiscale_dataset_1d(fine, coarse, 16, spec, 3);
  const auto b = assemble_multiscale_dataset_1d(fine, coarse, 16, spec, 4);
  bool sensors_differ = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].target == b[i].target);
    if ((a[i].sensors.locations - b[i].sensors.locations).norm() > 0)
      sensors_differ = true;
  }
  CHECK(sensors_differ);
}

TEST_CASE("realizations repeat the lattice with fresh jitter") {
  const GridFunction1d fine = unit_linear(256);
  const GridFunction1d coarse = unit_linear(16);
  PatchSpec spec;
  spec.size = 3;
  spec.base_spacing = 1.0 / 16.0;
  const auto ds = assemble_multiscale_dataset_1d(fine, coarse, 8, spec, 1, 4);
  REQUIRE(ds.size() == 32);
  for (int r = 1; r < 4; ++r)
    for (int i = 0; i < 8; ++i) {
      CHECK(ds[r * 8 + i].target == ds[i].target);
      CHECK(ds[r * 8 + i].instance == ds[i].instance);
    }
}

TEST_CASE("burgers dataset counts, held-out terminal time and determinism") {
  const auto ds = assemble_burgers_dataset(3, 2, 99, 25, 256);
  CHECK(ds.train.size() == 3 * 125);
  CHECK(ds.test.size() == 2 * 151);
  CHECK(ds.train_s.size() == 3);
  CHECK(ds.test_s.size() == 2);

  for (const auto& s : ds.train) {
    CHECK(s.query.size() == 2);
    CHECK(s.query[1] < 0.3 - 1e-12);  // terminal time excluded
    CHECK(s.sensors.count() == 25);
  }
  for (const auto& s : ds.test) CHECK(s.query[1] == doctest::Approx(0.3));

  // 151 uniform spatial points at the terminal time.
  CHECK(ds.test[0].query[0] == doctest::Approx(0.0));
  CHECK(ds.test[150].query[0] == doctest::Approx(2.0 * kPi));

  std::set<int> train_instances;
  for (const auto& s : ds.train) train_instances.insert(s.instance);
  CHECK(train_instances.size() == 3);

  const auto ds2 = assemble_burgers_dataset(3, 2, 99, 25, 256);
  CHECK(ds2.train_s == ds.train_s);
  for (std::size_t i = 0; i < ds.train.size(); ++i) {
    CHECK(ds2.train[i].target == ds.train[i].target);
    CHECK((ds2.train[i].sensors.locations - ds.train[i].sensors.locations)
              .norm() == 0.0);
  }

  // Sensor sets differ across instances.
  CHECK((ds.train[0].sensors.locations - ds.train[125].sensors.locations)
            .norm() > 0.0);
  for (double s : ds.train_s) {
    CHECK(s >= 0.0);
    CHECK(s <= 4.0);
  }
}
