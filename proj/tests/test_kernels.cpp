#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "perikit/discretization/discretization.hpp"
#include "perikit/simd/kernels.hpp"

using namespace perikit;

namespace {

struct RandomMesh {
  NodeCloud cloud;
  NeighborList nbrs;
  std::vector<double> u;
  std::vector<double> weight;
  std::vector<double> m;
  std::vector<double> theta;

  kernels::BondRows rows() const {
    kernels::BondRows r;
    r.offsets = nbrs.offsets.data();
    r.nbr = nbrs.neighbors.data();
    r.bond_len = nbrs.bond_lengths.data();
    r.weight = weight.data();
    r.pos = cloud.positions.data();
    r.u = u.data();
    return r;
  }
};

RandomMesh make_mesh(int dim, std::uint64_t seed) {
  RandomMesh mesh;
  Bounds bounds;
  for (int a = 0; a < dim; ++a) bounds.push_back({0.0, 1.0});
  const double h = dim == 1 ? 0.02 : 0.05;
  mesh.cloud = generate_uniform_grid(bounds, h, dim);
  mesh.nbrs = build_neighborhoods(mesh.cloud, 3.0 * h);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  mesh.u.resize(mesh.cloud.n * dim);
  for (auto& v : mesh.u) v = 1e-3 * dist(rng);
  mesh.weight.resize(mesh.nbrs.bonds());
  for (auto& w : mesh.weight) w = 0.5 + 0.5 * std::abs(dist(rng));
  mesh.m.resize(mesh.cloud.n);
  for (auto& v : mesh.m) v = 1.0 + std::abs(dist(rng));
  mesh.theta.resize(mesh.cloud.n);
  for (auto& v : mesh.theta) v = 1e-3 * dist(rng);
  return mesh;
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double scale = 0.0;
  for (const double v : a) scale = std::max(scale, std::abs(v));
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return scale > 0 ? worst / scale : worst;
}

}  // namespace

TEST_CASE("active kernel table resolves") {
  const auto& k = kernels::active();
  CHECK(k.dot != nullptr);
  MESSAGE("active kernels: ", std::string(k.name));
}

TEST_CASE("avx2 dot/axpy agree with the scalar reference") {
  const auto* simd = kernels::avx2();
  if (!simd) return;  // build or CPU without AVX2: scalar-only configuration
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (const std::size_t n : {0ul, 1ul, 3ul, 4ul, 17ul, 1024ul, 1031ul}) {
    std::vector<double> a(n), b(n);
    for (auto& v : a) v = dist(rng);
    for (auto& v : b) v = dist(rng);
    const double ds = kernels::scalar().dot(a.data(), b.data(), n);
    const double dv = simd->dot(a.data(), b.data(), n);
    CHECK(std::abs(ds - dv) <= 1e-13 * std::max(1.0, std::abs(ds)));

    auto ys = a;
    auto yv = a;
    kernels::scalar().axpy(0.37, b.data(), ys.data(), n);
    simd->axpy(0.37, b.data(), yv.data(), n);
    CHECK(ys == yv);  // elementwise op, no reduction: bitwise
  }
}

TEST_CASE("avx2 spmv agrees with the scalar reference") {
  const auto* simd = kernels::avx2();
  if (!simd) return;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const std::size_t n = 97;
  std::vector<offset_t> rowptr(n + 1, 0);
  std::vector<index_t> col;
  std::vector<double> val;
  for (std::size_t r = 0; r < n; ++r) {
    const int nnz = static_cast<int>(rng() % 13);
    for (int e = 0; e < nnz; ++e) {
      col.push_back(static_cast<index_t>(rng() % n));
      val.push_back(dist(rng));
    }
    rowptr[r + 1] = static_cast<offset_t>(col.size());
  }
  std::vector<double> x(n);
  for (auto& v : x) v = dist(rng);
  std::vector<double> ys(n), yv(n);
  kernels::scalar().spmv_rows(rowptr.data(), col.data(), val.data(), x.data(), ys.data(),
                              0, n);
  simd->spmv_rows(rowptr.data(), col.data(), val.data(), x.data(), yv.data(), 0, n);
  CHECK(max_rel_diff(ys, yv) <= 1e-14);
}

TEST_CASE("avx2 bond and state kernels agree with the scalar reference") {
  const auto* simd = kernels::avx2();
  if (!simd) return;
  for (const int dim : {1, 2}) {
    CAPTURE(dim);
    const auto mesh = make_mesh(dim, 101 + dim);
    const auto rows = mesh.rows();
    const std::size_t n = mesh.cloud.n;

    std::vector<double> fs(n * dim), fv(n * dim), Us(n), Uv(n);
    kernels::scalar().bond_lp[dim](rows, 2.5, 0.75, 1.0, fs.data(), Us.data(), 0, n);
    simd->bond_lp[dim](rows, 2.5, 0.75, 1.0, fv.data(), Uv.data(), 0, n);
    CHECK(max_rel_diff(fs, fv) <= 1e-13);
    CHECK(max_rel_diff(Us, Uv) <= 1e-13);

    std::vector<double> ts(n), tv(n);
    kernels::scalar().state_theta[dim](rows, mesh.m.data(), ts.data(), 0, n);
    simd->state_theta[dim](rows, mesh.m.data(), tv.data(), 0, n);
    CHECK(max_rel_diff(ts, tv) <= 1e-13);

    std::vector<double> gs(n * dim), gv(n * dim);
    kernels::scalar().state_force[dim](rows, mesh.m.data(), mesh.theta.data(), 2.0, 1.0,
                                       gs.data(), 0, n);
    simd->state_force[dim](rows, mesh.m.data(), mesh.theta.data(), 2.0, 1.0, gv.data(),
                           0, n);
    CHECK(max_rel_diff(gs, gv) <= 1e-13);
  }
}

TEST_CASE("nonlinear bond kernel is shared between tables") {
  // The exp-bound path stays scalar; both tables must hold the same code.
  const auto* simd = kernels::avx2();
  if (!simd) return;
  for (int dim = 1; dim <= 3; ++dim) {
    CHECK(simd->bond_np[dim] == kernels::scalar().bond_np[dim]);
  }
}
