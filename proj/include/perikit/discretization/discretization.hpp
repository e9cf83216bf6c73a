#pragma once

// Uniform node clouds, horizon neighborhoods, and partial-volume corrections.

#include <array>
#include <cstdint>
#include <vector>

#include "perikit/core/common.hpp"

namespace perikit {

// bc_tags bit layout: bits 0..2 = axis clamped, bit 7 = externally loaded.
inline constexpr std::uint8_t kBcClampX = 1u << 0;
inline constexpr std::uint8_t kBcClampY = 1u << 1;
inline constexpr std::uint8_t kBcClampZ = 1u << 2;
inline constexpr std::uint8_t kBcLoaded = 1u << 7;

struct NodeCloud {
  int dim = 0;
  std::size_t n = 0;
  std::vector<double> positions;  // n*dim, node-major
  std::vector<double> volumes;    // n, each h^dim
  std::vector<double> densities;  // n
  double spacing = 0.0;           // h
  std::vector<std::uint8_t> bc_tags;

  const double* pos(std::size_t i) const { return positions.data() + i * dim; }
  bool axis_clamped(std::size_t i, int axis) const {
    return bc_tags[i] & (1u << axis);
  }

  // Throws DeckError when any basic invariant is violated.
  void validate() const;
};

struct NeighborList {
  std::vector<offset_t> offsets;        // n+1
  std::vector<index_t> neighbors;       // flattened, ascending per row
  std::vector<double> bond_lengths;     // |X_j - X_i| per entry
  std::vector<double> vol_corrections;  // V_ij in [0,1] per entry

  std::size_t rows() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::size_t bonds() const { return neighbors.size(); }
};

enum class Placement { kLattice, kCellCenter };

// Per-axis [lo, hi] bounds.
using Bounds = std::vector<std::array<double, 2>>;

// Uniform grid over `bounds` with spacing h. Lattice placement puts nodes on
// the h-lattice including both ends (a bar [0,L] gets L/h+1 nodes); cell-center
// placement puts them at cell midpoints (L/h nodes per axis). Every node
// carries full volume h^dim; densities start at 1.
NodeCloud generate_uniform_grid(const Bounds& bounds, double h, int dim,
                                Placement placement = Placement::kLattice);

// Fractional volume weight of a neighbor cell at distance bond_length:
// 1 below delta-h/2, linear ramp down to 0 at delta+h/2.
double volume_correction(double bond_length, double delta, double h);

// All j != i with |X_j - X_i| <= delta + h/2, ascending j per row, with bond
// lengths and partial-volume corrections. Parallel over rows; requires
// delta >= h.
NeighborList build_neighborhoods(const NodeCloud& cloud, double delta);

}  // namespace perikit
