#include <doctest.h>

#include <cmath>
#include <random>

#include "perikit/material/material.hpp"
#include "perikit/runtime/runtime.hpp"

using namespace perikit;

namespace {

NodeCloud bar(double lo, double hi, double h) {
  auto cloud = generate_uniform_grid({{lo, hi}}, h, 1);
  return cloud;
}

// Serial pairwise-scatter oracle for the state force: every (i,j) pair is
// visited once from each side, f_i += t M V_j V_ij and f_j -= t M V_i V_ij.
std::vector<double> scatter_state_forces(const NodeCloud& cloud, const NeighborList& nbrs,
                                         const StateBasedParams& p,
                                         const std::vector<double>& m,
                                         const std::vector<double>& theta,
                                         const std::vector<double>& u) {
  const int d = cloud.dim;
  std::vector<double> f(cloud.n * d, 0.0);
  for (std::size_t i = 0; i < cloud.n; ++i) {
    for (offset_t e = nbrs.offsets[i]; e < nbrs.offsets[i + 1]; ++e) {
      const auto j = static_cast<std::size_t>(nbrs.neighbors[e]);
      const double r = nbrs.bond_lengths[e];
      const double corr = nbrs.vol_corrections[e];
      double q[kMaxDim] = {};
      double q2 = 0.0;
      double cross = 0.0;
      for (int a = 0; a < d; ++a) {
        const double xi = cloud.pos(j)[a] - cloud.pos(i)[a];
        const double eta = u[j * d + a] - u[i * d + a];
        q[a] = xi + eta;
        q2 += q[a] * q[a];
        cross += (2.0 * xi + eta) * eta;
      }
      const double len = std::sqrt(q2);
      const double ext = cross / (len + r);
      const double t = 3.0 * p.K / m[i] * theta[i] * r +
                       15.0 * p.mu / m[i] * (ext - theta[i] * r / 3.0);
      for (int a = 0; a < d; ++a) {
        const double M = q[a] / len;
        f[i * d + a] += t * M * cloud.volumes[j] * corr;
        f[j * d + a] -= t * M * cloud.volumes[i] * corr;
      }
    }
  }
  return f;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (const double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("bond strain") {
  SUBCASE("rigid translation gives zero strain") {
    const double ui[2] = {0.3, -0.1}, uj[2] = {0.3, -0.1};
    const double xi[2] = {0.0, 0.0}, xj[2] = {1.0, 0.5};
    CHECK(bond_strain(ui, uj, xi, xj, 2) == 0.0);
  }
  SUBCASE("uniform 1-d strain is recovered on every bond") {
    const double eps = 3e-4;
    for (const double x : {0.25, 0.5, 2.0}) {
      const double ui[1] = {0.0}, uj[1] = {eps * x};
      const double xi[1] = {0.0}, xj[1] = {x};
      CHECK(bond_strain(ui, uj, xi, xj, 1) == doctest::Approx(eps).epsilon(1e-14));
    }
  }
  SUBCASE("2-d diagonal bond") {
    const double s = 1.0 / std::sqrt(2.0);
    const double xi[2] = {0.0, 0.0}, xj[2] = {s, s};
    const double ui[2] = {0.0, 0.0}, uj[2] = {s * 1e-3, 0.0};
    CHECK(bond_strain(ui, uj, xi, xj, 2) == doctest::Approx(0.5e-3).epsilon(1e-13));
  }
  SUBCASE("zero-length bond is an error") {
    const double a[2] = {0.0, 0.0};
    CHECK_THROWS_AS(bond_strain(a, a, a, a, 2), Error);
  }
}

TEST_CASE("pairwise potential") {
  CHECK(psi(0.0, 1.0, 1.0) == 0.0);
  CHECK(psi_prime(0.0, 1.0, 1.0) == 1.0);
  CHECK(psi(100.0, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(psi_prime(1.0, 1.0, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  // Monotone increasing, concave.
  double prev = psi(0.0, 2.0, 3.0);
  double prev_slope = psi_prime(0.0, 2.0, 3.0);
  for (double r = 0.1; r < 2.0; r += 0.1) {
    CHECK(psi(r, 2.0, 3.0) > prev);
    CHECK(psi_prime(r, 2.0, 3.0) < prev_slope);
    prev = psi(r, 2.0, 3.0);
    prev_slope = psi_prime(r, 2.0, 3.0);
  }
}

TEST_CASE("influence function") {
  BondBasedParams p;
  p.influence = Influence::kGaussian;
  p.c1 = 1.0;
  p.c2 = 0.4;
  CHECK(influence(0.0, p) == 0.0);
  CHECK(influence(1.0, p) == doctest::Approx(std::exp(-2.5)).epsilon(1e-15));
  p.influence = Influence::kConstant;
  CHECK(influence(0.99, p) == 1.0);
  CHECK(influence(1.0, p) == 0.0);
}

TEST_CASE("horizon ball measures") {
  CHECK(ball_volume(1, 2.0) == 4.0);
  CHECK(ball_volume(2, 2.0) == doctest::Approx(4.0 * std::numbers::pi));
  CHECK(ball_volume(3, 2.0) == doctest::Approx(32.0 / 3.0 * std::numbers::pi));
}

TEST_CASE("bond forces vanish for zero and rigid displacement") {
  const auto cloud = bar(0.0, 1.0, 0.05);
  const auto nbrs = build_neighborhoods(cloud, 0.15);
  BondBasedParams p;
  p.delta = 0.15;
  for (const bool lin : {false, true}) {
    p.linearized = lin;
    std::vector<double> f, U;
    std::vector<double> u(cloud.n, 0.0);
    compute_bond_forces(cloud, nbrs, p, u, f, U);
    CHECK(max_abs(f) == 0.0);
    CHECK(max_abs(U) == 0.0);
    u.assign(cloud.n, 0.123);
    compute_bond_forces(cloud, nbrs, p, u, f, U);
    CHECK(max_abs(f) == 0.0);
    CHECK(max_abs(U) == 0.0);
  }
}

TEST_CASE("three-node bar: middle force vanishes, end forces balance") {
  const double h = 0.1, a = 1e-4;
  const auto cloud = bar(0.0, 2 * h, h);
  REQUIRE(cloud.n == 3);
  const auto nbrs = build_neighborhoods(cloud, h);
  BondBasedParams p;
  p.delta = h;
  std::vector<double> u = {0.0, a, 2 * a}, f, U;
  compute_bond_forces(cloud, nbrs, p, u, f, U);
  CHECK(std::abs(f[1]) <= 1e-12 * std::abs(f[0]));
  CHECK(f[0] == doctest::Approx(-f[2]).epsilon(1e-12));
  CHECK(f[0] != 0.0);
}

TEST_CASE("weighted volumes") {
  SUBCASE("unit lattice, horizon 1.25: ramp weight 0.75 on the +-1 bonds") {
    const auto cloud = bar(0.0, 20.0, 1.0);
    const auto nbrs = build_neighborhoods(cloud, 1.25);
    const auto m = compute_weighted_volumes(cloud, nbrs);
    // Bonds at distance 1 fall on the ramp: (1.75 - 1)/1 = 0.75 each.
    CHECK(m[10] == doctest::Approx(2.0 * 0.75).epsilon(1e-14));
  }
  SUBCASE("unit lattice, horizon 1.5: +-1 bonds fully inside, +-2 at weight 0") {
    const auto cloud = bar(0.0, 20.0, 1.0);
    const auto nbrs = build_neighborhoods(cloud, 1.5);
    const auto m = compute_weighted_volumes(cloud, nbrs);
    CHECK(m[10] == doctest::Approx(2.0).epsilon(1e-14));
  }
  SUBCASE("two nodes at distance r give m = r^2 V") {
    NodeCloud cloud;
    cloud.dim = 1;
    cloud.n = 2;
    cloud.positions = {0.0, 0.75};
    cloud.volumes = {2.0, 2.0};
    cloud.densities = {1.0, 1.0};
    cloud.bc_tags = {0, 0};
    cloud.spacing = 0.75;
    const auto nbrs = build_neighborhoods(cloud, 3.0);  // far inside the plateau
    const auto m = compute_weighted_volumes(cloud, nbrs);
    CHECK(m[0] == doctest::Approx(0.75 * 0.75 * 2.0).epsilon(1e-14));
    CHECK(m[1] == m[0]);
  }
  SUBCASE("m scales linearly with volumes") {
    auto cloud = bar(0.0, 1.0, 0.1);
    const auto nbrs = build_neighborhoods(cloud, 0.25);
    const auto m1 = compute_weighted_volumes(cloud, nbrs);
    for (auto& v : cloud.volumes) v *= 3.0;
    const auto m3 = compute_weighted_volumes(cloud, nbrs);
    for (std::size_t i = 0; i < cloud.n; ++i) {
      CHECK(m3[i] == doctest::Approx(3.0 * m1[i]).epsilon(1e-14));
    }
  }
  SUBCASE("isolated node is an error") {
    NodeCloud cloud;
    cloud.dim = 1;
    cloud.n = 2;
    cloud.positions = {0.0, 10.0};
    cloud.volumes = {1.0, 1.0};
    cloud.densities = {1.0, 1.0};
    cloud.bc_tags = {0, 0};
    cloud.spacing = 1.0;
    const auto nbrs = build_neighborhoods(cloud, 2.0);
    CHECK_THROWS_AS(compute_weighted_volumes(cloud, nbrs), Error);
  }
}

TEST_CASE("dilatation") {
  SUBCASE("zero displacement gives zero dilatation") {
    const auto cloud = bar(0.0, 1.0, 0.05);
    const auto nbrs = build_neighborhoods(cloud, 0.15);
    const auto m = compute_weighted_volumes(cloud, nbrs);
    const std::vector<double> u(cloud.n, 0.0);
    const auto theta = compute_dilatation(cloud, nbrs, m, u);
    CHECK(max_abs(theta) == 0.0);
  }
  SUBCASE("small rigid rotation stays below 1e-6") {
    const auto cloud =
        generate_uniform_grid({{0.0, 1.0}, {0.0, 1.0}}, 0.1, 2, Placement::kCellCenter);
    const auto nbrs = build_neighborhoods(cloud, 0.3);
    const auto m = compute_weighted_volumes(cloud, nbrs);
    const double phi = 1e-4;
    std::vector<double> u(cloud.n * 2);
    for (std::size_t i = 0; i < cloud.n; ++i) {
      const double x = cloud.pos(i)[0], y = cloud.pos(i)[1];
      u[2 * i] = std::cos(phi) * x - std::sin(phi) * y - x;
      u[2 * i + 1] = std::sin(phi) * x + std::cos(phi) * y - y;
    }
    const auto theta = compute_dilatation(cloud, nbrs, m, u);
    CHECK(max_abs(theta) < 1e-6);
  }
  SUBCASE("uniform 1-d strain gives interior dilatation 3 eps") {
    const double eps = 1e-6;
    const auto cloud = bar(0.0, 2.0, 0.05);
    const auto nbrs = build_neighborhoods(cloud, 0.15);
    const auto m = compute_weighted_volumes(cloud, nbrs);
    std::vector<double> u(cloud.n);
    for (std::size_t i = 0; i < cloud.n; ++i) u[i] = eps * cloud.positions[i];
    const auto theta = compute_dilatation(cloud, nbrs, m, u);
    CHECK(theta[cloud.n / 2] == doctest::Approx(3.0 * eps).epsilon(1e-6));
  }
}

TEST_CASE("state force gather form") {
  SUBCASE("zero and rigid displacements give zero force") {
    const auto cloud = bar(0.0, 1.0, 0.05);
    const auto nbrs = build_neighborhoods(cloud, 0.15);
    StateBasedParams p;
    p.K = 2.0e9;
    p.mu = 1.0e9;
    p.delta = 0.15;
    StateForceModel model(cloud, nbrs, p);
    std::vector<double> u(cloud.n, 0.0), f;
    model.forces(u, f);
    CHECK(max_abs(f) == 0.0);
    u.assign(cloud.n, 0.05);
    model.forces(u, f);
    CHECK(max_abs(f) == 0.0);
  }

  SUBCASE("gather equals the serial scatter oracle") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (const int dim : {1, 2}) {
      CAPTURE(dim);
      Bounds bounds;
      for (int a = 0; a < dim; ++a) bounds.push_back({0.0, 1.0});
      const double h = dim == 1 ? 0.01 : 0.1;
      const auto cloud = generate_uniform_grid(bounds, h, dim);
      REQUIRE(cloud.n <= 200);
      const double delta = 2.5 * h;
      const auto nbrs = build_neighborhoods(cloud, delta);
      StateBasedParams p;
      p.K = 1.6e9;
      p.mu = 0.9e9;
      p.delta = delta;
      StateForceModel model(cloud, nbrs, p);
      std::vector<double> u(cloud.n * dim);
      for (auto& v : u) v = 1e-4 * h * dist(rng);
      std::vector<double> theta, f_gather;
      model.dilatation(u, theta);
      model.force_from_dilatation(u, theta, f_gather);
      const auto f_scatter = scatter_state_forces(cloud, nbrs, p, model.weighted_volumes(),
                                                  theta, u);
      const double scale = max_abs(f_gather);
      for (std::size_t k = 0; k < f_gather.size(); ++k) {
        CHECK(std::abs(f_gather[k] - f_scatter[k]) <= 1e-14 * scale);
      }
    }
  }

  SUBCASE("node collision names the bond") {
    NodeCloud cloud;
    cloud.dim = 1;
    cloud.n = 2;
    cloud.positions = {0.0, 1.0};
    cloud.volumes = {1.0, 1.0};
    cloud.densities = {1.0, 1.0};
    cloud.bc_tags = {0, 0};
    cloud.spacing = 1.0;
    const auto nbrs = build_neighborhoods(cloud, 1.0);
    StateBasedParams p;
    p.K = 1.0;
    p.mu = 1.0;
    p.delta = 1.0;
    StateForceModel model(cloud, nbrs, p);
    std::vector<double> u = {0.0, -1.0}, f;  // node 1 collides with node 0
    try {
      model.forces(u, f);
      FAIL("expected node-collision error");
    } catch (const NumericalError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("(0, 1)") != std::string::npos);
    }
  }
}

TEST_CASE("momentum balance: internal forces sum to zero") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const auto cloud =
      generate_uniform_grid({{0.0, 1.0}, {0.0, 1.0}}, 0.1, 2, Placement::kCellCenter);
  const double delta = 0.25;
  const auto nbrs = build_neighborhoods(cloud, delta);
  std::vector<double> u(cloud.n * 2);
  for (auto& v : u) v = 1e-3 * dist(rng);

  auto check_balance = [&](const std::vector<double>& f) {
    double sum[2] = {0.0, 0.0};
    double peak = 0.0;
    for (std::size_t i = 0; i < cloud.n; ++i) {
      for (int a = 0; a < 2; ++a) {
        const double fv = f[i * 2 + a] * cloud.volumes[i];
        sum[a] += fv;
        peak = std::max(peak, std::abs(fv));
      }
    }
    CHECK(std::abs(sum[0]) <= 1e-10 * peak);
    CHECK(std::abs(sum[1]) <= 1e-10 * peak);
  };

  BondBasedParams bp;
  bp.delta = delta;
  std::vector<double> f, U;
  compute_bond_forces(cloud, nbrs, bp, u, f, U);
  check_balance(f);

  StateBasedParams sp;
  sp.K = 2.0e9;
  sp.mu = 1.0e9;
  sp.delta = delta;
  StateForceModel model(cloud, nbrs, sp);
  model.forces(u, f);
  check_balance(f);
}

TEST_CASE("nonlinear force approaches the linearized force at small amplitude") {
  const auto cloud = bar(0.0, 1.0, 0.02);
  const double delta = 0.06;
  const auto nbrs = build_neighborhoods(cloud, delta);
  BondBasedParams np;
  np.delta = delta;
  BondBasedParams lp = np;
  lp.linearized = true;

  std::vector<double> pattern(cloud.n);
  for (std::size_t i = 0; i < cloud.n; ++i) {
    pattern[i] = std::sin(6.28318 * cloud.positions[i]);
  }
  double prev_gap = 1.0;
  for (const double amp : {1e-3, 1e-5, 1e-7}) {
    std::vector<double> u(cloud.n), f_np, f_lp, U;
    for (std::size_t i = 0; i < cloud.n; ++i) u[i] = amp * pattern[i];
    compute_bond_forces(cloud, nbrs, np, u, f_np, U);
    compute_bond_forces(cloud, nbrs, lp, u, f_lp, U);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < cloud.n; ++i) {
      num += f_np[i] * f_np[i];
      den += f_lp[i] * f_lp[i];
    }
    const double gap = std::abs(std::sqrt(num / den) - 1.0);
    CHECK(gap < prev_gap * 1e-2);  // quadratic in amplitude: 1e4 per decade pair
    prev_gap = gap;
  }
  CHECK(prev_gap <= 1e-10);
}

TEST_CASE("softening: per-bond force decays for large strain") {
  // |f_bond| ~ psi'(|xi| S^2) S with the softening potential. The bond length
  // keeps the exponent representable out to S = 1000.
  const double xi = 5e-4, C = 1.0, beta = 1.0;
  auto bond_force = [&](double S) {
    return std::abs(psi_prime(xi * S * S, C, beta) * S);
  };
  CHECK(bond_force(10.0) > bond_force(100.0));
  CHECK(bond_force(100.0) > bond_force(1000.0));
  CHECK(bond_force(1000.0) < 1e-8);
}

TEST_CASE("state force is linear in u in the small-strain regime") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const auto cloud =
      generate_uniform_grid({{0.0, 1.0}, {0.0, 1.0}}, 0.125, 2, Placement::kCellCenter);
  const double delta = 0.3;
  const auto nbrs = build_neighborhoods(cloud, delta);
  StateBasedParams p;
  p.K = 2.0e9;
  p.mu = 1.0e9;
  p.delta = delta;
  StateForceModel model(cloud, nbrs, p);

  // |eta| <= 1e-8 |xi| keeps the deformed-direction normalization linear.
  const double amp = 1e-9 * 0.125;
  std::vector<double> u1(cloud.n * 2), u2(cloud.n * 2), combo(cloud.n * 2);
  for (auto& v : u1) v = amp * dist(rng);
  for (auto& v : u2) v = amp * dist(rng);
  const double alpha = 0.7, beta = -1.3;
  for (std::size_t k = 0; k < combo.size(); ++k) combo[k] = alpha * u1[k] + beta * u2[k];

  std::vector<double> f1, f2, fc;
  model.forces(u1, f1);
  model.forces(u2, f2);
  model.forces(combo, fc);
  double scale = max_abs(fc);
  for (std::size_t k = 0; k < fc.size(); ++k) {
    CHECK(std::abs(fc[k] - (alpha * f1[k] + beta * f2[k])) <= 1e-6 * scale);
  }
}

TEST_CASE("results are bitwise identical across thread counts") {
  const auto cloud =
      generate_uniform_grid({{0.0, 1.0}, {0.0, 1.0}}, 0.05, 2, Placement::kCellCenter);
  const double delta = 0.15;
  const auto nbrs = build_neighborhoods(cloud, delta);
  BondBasedParams p;
  p.delta = delta;
  p.linearized = true;
  BondForceModel model(cloud, nbrs, p);
  std::vector<double> u(cloud.n * 2);
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& v : u) v = 1e-4 * dist(rng);

  std::vector<std::vector<double>> results;
  for (const unsigned threads : {1u, 2u, 4u}) {
    rt::set_thread_count(threads);
    std::vector<double> f, U;
    model.forces_and_energy(u, f, U);
    f.insert(f.end(), U.begin(), U.end());
    results.push_back(std::move(f));
  }
  CHECK(results[0] == results[1]);
  CHECK(results[0] == results[2]);
}
