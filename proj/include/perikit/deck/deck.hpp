#pragma once

// Simulation decks: YAML loading with unit conversion to SI, realization of
// cloud / state / models, and field snapshot output (CSV or legacy VTK).

#include <filesystem>
#include <memory>
#include <string>

#include "perikit/analysis/analysis.hpp"
#include "perikit/integrator/integrator.hpp"

namespace perikit::deck {

enum class Units { kSi, kMmMpa };
enum class MaterialKind { kBond, kState };
enum class IntegratorKind { kExplicit, kImplicit };
enum class SnapshotFormat { kCsv, kVtk };

struct Geometry {
  int dim = 1;
  Bounds bounds;
  double spacing = 0.0;
  Placement placement = Placement::kLattice;
  double density = 1.0;
  double thickness = 1.0;  // 2-d decks: effective plate thickness [m]
};

struct Material {
  MaterialKind kind = MaterialKind::kState;
  BondBasedParams bond;
  StateBasedParams state;
  // Raw elastic constants when the deck gave E/nu (kept for postprocessing).
  bool from_elastic = false;
  double E = 0.0;
  double nu = 0.0;
};

struct Clamp {
  Bounds box;
  std::uint8_t axes_mask = 0;
};

struct Load {
  Bounds box;
  std::vector<double> force;  // nodal force F per selected node [N]
};

struct Output {
  std::string directory = "out";
  long stride = 1;
  SnapshotFormat format = SnapshotFormat::kCsv;
  bool with_energy = true;
};

struct Deck {
  Geometry geometry;
  double delta = 0.0;
  Material material;
  IntegratorKind integrator = IntegratorKind::kExplicit;
  ExplicitConfig explicit_cfg;
  ImplicitConfig implicit_cfg;
  std::vector<Clamp> clamps;
  std::vector<Load> loads;
  std::vector<analysis::GaussianPulse> pulses;  // empty = zero initial condition
  Output output;

  // Realizations (all in SI).
  NodeCloud build_cloud() const;
  FieldState build_state(const NodeCloud& cloud) const;
  std::unique_ptr<ForceModel> build_model(const NodeCloud& cloud,
                                          const NeighborList& nbrs) const;
};

// Parses and validates a deck file; all quantities converted to SI.
Deck load_deck(const std::string& path);

// Parses deck text (same schema as the file form).
Deck parse_deck_text(const std::string& text, const std::string& source_name,
                     const std::vector<std::pair<std::string, std::string>>& overrides = {});

// Deck -> canonical SI YAML; load(serialize(d)) == d.
std::string serialize_deck(const Deck& deck);

// Dimension-aware conversion of (E, nu) to the state-model (K, mu): in 1-d the
// dilatational term alone carries uniform stretch, so K = E/9 recovers the bar
// modulus exactly; in 2-d/3-d the standard 3-d relations are used.
StateBasedParams state_params_from_elastic(double E, double nu, int dim, double delta);

// Writes one snapshot; returns the file path.
std::filesystem::path write_snapshot(const FieldState& state, const NodeCloud& cloud,
                                     long step, SnapshotFormat format,
                                     const std::string& directory);

// Parses a CSV snapshot back (round-trip checks); returns rows of 14 columns.
std::vector<std::vector<double>> read_snapshot_csv(const std::filesystem::path& path);

}  // namespace perikit::deck
