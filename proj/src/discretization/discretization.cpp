#include "perikit/discretization/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "perikit/runtime/runtime.hpp"

namespace perikit {

void NodeCloud::validate() const {
  if (dim < 1 || dim > kMaxDim) throw DeckError("NodeCloud: dim must be 1, 2, or 3");
  if (n < 1) throw DeckError("NodeCloud: empty cloud");
  if (!(spacing > 0)) throw DeckError("NodeCloud: spacing must be positive");
  if (positions.size() != n * static_cast<std::size_t>(dim) ||
      volumes.size() != n || densities.size() != n || bc_tags.size() != n) {
    throw DeckError("NodeCloud: array sizes inconsistent with n");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(volumes[i] > 0)) throw DeckError("NodeCloud: non-positive nodal volume");
    if (!(densities[i] > 0)) throw DeckError("NodeCloud: non-positive density");
  }
}

NodeCloud generate_uniform_grid(const Bounds& bounds, double h, int dim,
                                Placement placement) {
  if (dim < 1 || dim > kMaxDim) throw DeckError("grid: dim must be 1, 2, or 3");
  if (static_cast<int>(bounds.size()) != dim)
    throw DeckError("grid: bounds must list one [lo,hi] pair per axis");
  if (!(h > 0)) throw DeckError("grid: spacing must be positive");

  std::array<std::size_t, kMaxDim> counts{};
  for (int a = 0; a < dim; ++a) {
    const double lo = bounds[a][0];
    const double hi = bounds[a][1];
    if (!(hi > lo)) {
      std::ostringstream os;
      os << "grid: degenerate domain on axis " << a << " ([" << lo << ", " << hi << "])";
      throw DeckError(os.str());
    }
    const double cells = (hi - lo) / h;
    const double rounded = std::round(cells);
    if (rounded < 1.0 || std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells)) {
      std::ostringstream os;
      os << "grid: spacing " << h << " does not divide extent " << (hi - lo)
         << " on axis " << a;
      throw DeckError(os.str());
    }
    const auto ncells = static_cast<std::size_t>(rounded);
    counts[a] = placement == Placement::kLattice ? ncells + 1 : ncells;
  }

  NodeCloud cloud;
  cloud.dim = dim;
  cloud.spacing = h;
  std::size_t n = 1;
  for (int a = 0; a < dim; ++a) n *= counts[a];
  cloud.n = n;
  cloud.positions.resize(n * dim);
  double vol = 1.0;
  for (int a = 0; a < dim; ++a) vol *= h;
  cloud.volumes.assign(n, vol);
  cloud.densities.assign(n, 1.0);
  cloud.bc_tags.assign(n, 0);

  const double shift = placement == Placement::kLattice ? 0.0 : 0.5;
  // x fastest, then y, then z.
  std::array<std::size_t, kMaxDim> idx{};
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < dim; ++a) {
      cloud.positions[i * dim + a] =
          bounds[a][0] + (static_cast<double>(idx[a]) + shift) * h;
    }
    for (int a = 0; a < dim; ++a) {
      if (++idx[a] < counts[a]) break;
      idx[a] = 0;
    }
  }
  return cloud;
}

double volume_correction(double bond_length, double delta, double h) {
  if (bond_length <= delta - 0.5 * h) return 1.0;
  if (bond_length > delta + 0.5 * h) return 0.0;
  return std::clamp((delta + 0.5 * h - bond_length) / h, 0.0, 1.0);
}

namespace {

// Uniform bins of width >= admission radius; candidate pairs come only from
// the 3^dim surrounding bins.
struct BinGrid {
  int dim;
  double cell;
  std::array<double, kMaxDim> origin{};
  std::array<std::size_t, kMaxDim> counts{};
  std::vector<std::vector<index_t>> bins;

  BinGrid(const NodeCloud& cloud, double radius) : dim(cloud.dim), cell(radius) {
    std::array<double, kMaxDim> lo{}, hi{};
    for (int a = 0; a < dim; ++a) {
      lo[a] = hi[a] = cloud.positions[a];
    }
    for (std::size_t i = 1; i < cloud.n; ++i) {
      for (int a = 0; a < dim; ++a) {
        lo[a] = std::min(lo[a], cloud.positions[i * dim + a]);
        hi[a] = std::max(hi[a], cloud.positions[i * dim + a]);
      }
    }
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) {
      origin[a] = lo[a];
      counts[a] = static_cast<std::size_t>((hi[a] - lo[a]) / cell) + 1;
      total *= counts[a];
    }
    bins.resize(total);
    for (std::size_t i = 0; i < cloud.n; ++i) {
      bins[flat_index(cloud.pos(i))].push_back(static_cast<index_t>(i));
    }
  }

  std::size_t coord(const double* p, int a) const {
    const auto c = static_cast<std::ptrdiff_t>((p[a] - origin[a]) / cell);
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(
        c, 0, static_cast<std::ptrdiff_t>(counts[a]) - 1));
  }

  std::size_t flat_index(const double* p) const {
    std::size_t f = 0;
    for (int a = dim - 1; a >= 0; --a) f = f * counts[a] + coord(p, a);
    return f;
  }

  template <class Fn>
  void for_candidates(const double* p, Fn&& fn) const {
    std::array<std::ptrdiff_t, kMaxDim> c{};
    for (int a = 0; a < dim; ++a) c[a] = static_cast<std::ptrdiff_t>(coord(p, a));
    std::array<std::ptrdiff_t, kMaxDim> d{};
    for (int a = 0; a < dim; ++a) d[a] = -1;
    for (;;) {
      bool ok = true;
      std::size_t f = 0;
      for (int a = dim - 1; a >= 0; --a) {
        const std::ptrdiff_t v = c[a] + d[a];
        if (v < 0 || v >= static_cast<std::ptrdiff_t>(counts[a])) {
          ok = false;
          break;
        }
        f = f * counts[a] + static_cast<std::size_t>(v);
      }
      if (ok) {
        for (const index_t j : bins[f]) fn(j);
      }
      int a = 0;
      for (; a < dim; ++a) {
        if (++d[a] <= 1) break;
        d[a] = -1;
      }
      if (a == dim) break;
    }
  }
};

}  // namespace

NeighborList build_neighborhoods(const NodeCloud& cloud, double delta) {
  cloud.validate();
  if (!(delta >= cloud.spacing)) {
    throw DeckError("neighborhoods: horizon must be at least the nodal spacing");
  }
  const double radius = delta + 0.5 * cloud.spacing;
  const int dim = cloud.dim;
  const BinGrid grid(cloud, radius);

  // Pass 1: gather each row (candidates filtered by distance, sorted ascending).
  std::vector<std::vector<index_t>> rows(cloud.n);
  std::vector<offset_t> counts(cloud.n + 1, 0);
  rt::parallel_for(0, cloud.n, [&](std::size_t i) {
    auto& row = rows[i];
    const double* pi = cloud.pos(i);
    grid.for_candidates(pi, [&](index_t j) {
      if (static_cast<std::size_t>(j) == i) return;
      const double dist = distance(pi, cloud.pos(j), dim);
      if (dist <= radius) row.push_back(j);
    });
    std::sort(row.begin(), row.end());
    counts[i + 1] = static_cast<offset_t>(row.size());
  });

  NeighborList list;
  list.offsets.resize(cloud.n + 1);
  list.offsets[0] = 0;
  for (std::size_t i = 0; i < cloud.n; ++i) {
    list.offsets[i + 1] = list.offsets[i] + counts[i + 1];
  }
  const auto total = static_cast<std::size_t>(list.offsets[cloud.n]);
  list.neighbors.resize(total);
  list.bond_lengths.resize(total);
  list.vol_corrections.resize(total);

  // Pass 2: each row writes its own slice.
  rt::parallel_for(0, cloud.n, [&](std::size_t i) {
    offset_t e = list.offsets[i];
    const double* pi = cloud.pos(i);
    for (const index_t j : rows[i]) {
      const double dist = distance(pi, cloud.pos(j), dim);
      list.neighbors[e] = j;
      list.bond_lengths[e] = dist;
      list.vol_corrections[e] = volume_correction(dist, delta, cloud.spacing);
      ++e;
    }
  });
  return list;
}

}  // namespace perikit
