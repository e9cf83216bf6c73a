#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "perikit/discretization/discretization.hpp"

using namespace perikit;

namespace {

// O(n^2) all-pairs oracle for neighborhood construction.
NeighborList brute_force_neighbors(const NodeCloud& cloud, double delta) {
  NeighborList list;
  const double radius = delta + 0.5 * cloud.spacing;
  list.offsets.push_back(0);
  for (std::size_t i = 0; i < cloud.n; ++i) {
    for (std::size_t j = 0; j < cloud.n; ++j) {
      if (j == i) continue;
      const double dist = distance(cloud.pos(i), cloud.pos(j), cloud.dim);
      if (dist <= radius) {
        list.neighbors.push_back(static_cast<index_t>(j));
        list.bond_lengths.push_back(dist);
        list.vol_corrections.push_back(volume_correction(dist, delta, cloud.spacing));
      }
    }
    list.offsets.push_back(static_cast<offset_t>(list.neighbors.size()));
  }
  return list;
}

}  // namespace

TEST_CASE("33-node bar") {
  const auto cloud = generate_uniform_grid({{0.0, 16.0}}, 0.5, 1);
  CHECK(cloud.n == 33);
  CHECK(cloud.positions.front() == 0.0);
  CHECK(cloud.positions.back() == 16.0);
  for (const double v : cloud.volumes) CHECK(v == 0.5);
  // Discretized body measure: n * h^d.
  double sum = 0.0;
  for (const double v : cloud.volumes) sum += v;
  CHECK(sum == doctest::Approx(33 * 0.5).epsilon(1e-13));
}

TEST_CASE("single-cell 2-d lattice has the four corner nodes") {
  const auto cloud = generate_uniform_grid({{0.0, 1.0}, {0.0, 1.0}}, 1.0, 2);
  CHECK(cloud.n == 4);
  for (const double v : cloud.volumes) CHECK(v == 1.0);
}

TEST_CASE("five-node unit bar") {
  const auto cloud = generate_uniform_grid({{0.0, 1.0}}, 0.25, 1);
  REQUIRE(cloud.n == 5);
  double sum = 0.0;
  for (std::size_t i = 0; i < cloud.n; ++i) sum += cloud.positions[i];
  CHECK(sum == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("cell-centered grid covers the domain measure exactly") {
  const auto cloud =
      generate_uniform_grid({{0.0, 0.375}, {0.0, 0.375}}, 0.025, 2, Placement::kCellCenter);
  CHECK(cloud.n == 225);
  double sum = 0.0;
  for (const double v : cloud.volumes) sum += v;
  CHECK(sum == doctest::Approx(0.375 * 0.375).epsilon(1e-12));
  // Center node exists.
  bool found = false;
  for (std::size_t i = 0; i < cloud.n; ++i) {
    if (cloud.pos(i)[0] == 0.1875 && cloud.pos(i)[1] == 0.1875) found = true;
  }
  CHECK(found);
}

TEST_CASE("grid rejects bad input") {
  CHECK_THROWS_AS(generate_uniform_grid({{0.0, 1.0}}, -0.1, 1), DeckError);
  CHECK_THROWS_AS(generate_uniform_grid({{1.0, 1.0}}, 0.1, 1), DeckError);
  CHECK_THROWS_AS(generate_uniform_grid({{0.0, 1.0}}, 0.3, 1), DeckError);  // 1/0.3
  CHECK_THROWS_AS(generate_uniform_grid({{0.0, 1.0}}, 0.1, 2), DeckError);  // dim mismatch
}

TEST_CASE("volume correction ramp") {
  const double delta = 1.0, h = 0.25;
  CHECK(volume_correction(delta - h, delta, h) == 1.0);
  CHECK(volume_correction(delta, delta, h) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(volume_correction(delta + h / 2, delta, h) == 0.0);
  CHECK(volume_correction(2 * delta, delta, h) == 0.0);
}

TEST_CASE("volume correction is nonincreasing in bond length") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(0.0, 2.0);
  const double delta = 1.0, h = 0.3;
  for (int trial = 0; trial < 200; ++trial) {
    double a = dist(rng), b = dist(rng);
    if (a > b) std::swap(a, b);
    CHECK(volume_correction(a, delta, h) >= volume_correction(b, delta, h));
  }
}

TEST_CASE("bar neighborhoods: interior node has four neighbors") {
  // h = 0.5, delta = 1.0: offsets +-1, +-2 admitted; +-3 sits at 1.5 > 1.25.
  const auto cloud = generate_uniform_grid({{0.0, 16.0}}, 0.5, 1);
  const auto nbrs = build_neighborhoods(cloud, 1.0);
  const std::size_t mid = 16;
  CHECK(nbrs.offsets[mid + 1] - nbrs.offsets[mid] == 4);
  // Ascending neighbor order.
  for (offset_t e = nbrs.offsets[mid] + 1; e < nbrs.offsets[mid + 1]; ++e) {
    CHECK(nbrs.neighbors[e] > nbrs.neighbors[e - 1]);
  }
}

TEST_CASE("two nodes at the horizon see each other") {
  NodeCloud cloud;
  cloud.dim = 1;
  cloud.n = 2;
  cloud.positions = {0.0, 1.0};
  cloud.volumes = {1.0, 1.0};
  cloud.densities = {1.0, 1.0};
  cloud.bc_tags = {0, 0};
  cloud.spacing = 1.0;
  const auto nbrs = build_neighborhoods(cloud, 1.0);
  CHECK(nbrs.offsets[1] - nbrs.offsets[0] == 1);
  CHECK(nbrs.offsets[2] - nbrs.offsets[1] == 1);
}

TEST_CASE("horizon below spacing is rejected") {
  const auto cloud = generate_uniform_grid({{0.0, 1.0}}, 0.25, 1);
  CHECK_THROWS_AS(build_neighborhoods(cloud, 0.2), DeckError);
}

TEST_CASE("2-d m_d=4 slab width matches 2 m_d + 1 nodes") {
  const auto cloud =
      generate_uniform_grid({{0.0, 0.375}, {0.0, 0.375}}, 0.025, 2, Placement::kCellCenter);
  const double delta = 4 * 0.025;
  const auto nbrs = build_neighborhoods(cloud, delta);
  // Center node: count distinct x-coordinates within [x - delta, x + delta].
  std::size_t center = 0;
  for (std::size_t i = 0; i < cloud.n; ++i) {
    if (cloud.pos(i)[0] == 0.1875 && cloud.pos(i)[1] == 0.1875) center = i;
  }
  std::set<double> xs;
  xs.insert(cloud.pos(center)[0]);
  for (offset_t e = nbrs.offsets[center]; e < nbrs.offsets[center + 1]; ++e) {
    const double x = cloud.pos(nbrs.neighbors[e])[0];
    if (std::abs(x - 0.1875) <= delta * (1.0 + 1e-12)) xs.insert(x);
  }
  CHECK(xs.size() == 2 * 4 + 1);
}

TEST_CASE("neighborhoods match the all-pairs oracle") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 4; ++trial) {
    const int dim = 1 + static_cast<int>(rng() % 2);
    Bounds bounds;
    for (int a = 0; a < dim; ++a) bounds.push_back({0.0, 1.0});
    const double h = dim == 1 ? 1.0 / (100 + rng() % 100) : 1.0 / (12 + rng() % 8);
    const auto cloud = generate_uniform_grid(bounds, h, dim);
    REQUIRE(cloud.n <= 500);
    const double delta = (2.0 + static_cast<double>(rng() % 3)) * h;
    const auto fast = build_neighborhoods(cloud, delta);
    const auto oracle = brute_force_neighbors(cloud, delta);
    REQUIRE(fast.offsets == oracle.offsets);
    CHECK(fast.neighbors == oracle.neighbors);
    CHECK(fast.bond_lengths == oracle.bond_lengths);
    CHECK(fast.vol_corrections == oracle.vol_corrections);
  }
}

TEST_CASE("uniform-grid adjacency is symmetric") {
  const auto cloud =
      generate_uniform_grid({{0.0, 1.0}, {0.0, 1.0}}, 0.1, 2, Placement::kCellCenter);
  const auto nbrs = build_neighborhoods(cloud, 0.25);
  std::set<std::pair<index_t, index_t>> edges;
  for (std::size_t i = 0; i < cloud.n; ++i) {
    for (offset_t e = nbrs.offsets[i]; e < nbrs.offsets[i + 1]; ++e) {
      edges.insert({static_cast<index_t>(i), nbrs.neighbors[e]});
    }
  }
  for (const auto& [i, j] : edges) {
    CHECK(edges.count({j, i}) == 1);
  }
}

TEST_CASE("neighborhood construction does not mutate volumes") {
  const auto cloud = generate_uniform_grid({{0.0, 1.0}}, 0.05, 1);
  const auto volumes_before = cloud.volumes;
  (void)build_neighborhoods(cloud, 0.15);
  CHECK(cloud.volumes == volumes_before);
}

TEST_CASE("every stored bond lies within the admission radius") {
  const auto cloud =
      generate_uniform_grid({{0.0, 1.0}, {0.0, 1.0}}, 0.1, 2, Placement::kCellCenter);
  const double delta = 0.3;
  const auto nbrs = build_neighborhoods(cloud, delta);
  for (std::size_t i = 0; i < cloud.n; ++i) {
    for (offset_t e = nbrs.offsets[i]; e < nbrs.offsets[i + 1]; ++e) {
      CHECK(nbrs.neighbors[e] != static_cast<index_t>(i));
      CHECK(nbrs.bond_lengths[e] > 0.0);
      CHECK(nbrs.bond_lengths[e] <= delta + 0.05 + 1e-15);
    }
  }
}
