#pragma once

// Built-in validation cases: the 1-d and 2-d tensile reference decks, the 1-d
// wave-pulse deck for convergence studies, and the 2-d benchmark deck.

#include <string>
#include <vector>

#include "perikit/deck/deck.hpp"

namespace perikit::cases {

// Clamped/loaded bar: 33 nodes, h = 0.5 m, horizon 1 m, F = 40 N, E = 4 GPa,
// BiCGSTAB. Authored in mm/MPa units.
deck::Deck tensile_1d_deck();

// Tensile plate: 0.375 x 0.375 m, h = 25 mm (15x15 cell-centered nodes),
// m_d = 4, per-node line load -50 kN, E = 4000 MPa, nu = 0.3.
deck::Deck tensile_2d_deck();

// Linearized bond-based wave pulse on [0,1] with zero-displacement collar
// [-delta,0] u [1,1+delta], delta = 0.02, Gaussian initial displacement.
deck::Deck pulse_1d_deck(double spacing);

// Explicit 2-d scaling deck: 150x150 nodes, linearized bond material.
deck::Deck bench_2d_deck();

struct QuantityRow {
  long node = 0;
  std::string quantity;  // strain | stress | energy | position_x | position_y
  double pd = 0.0;
  double ccm = 0.0;
  double rel_error = 0.0;
  bool interior = false;  // at least 2*delta from the boundary
};

struct Tensile1dResult {
  std::vector<QuantityRow> rows;
  bool strain_ok = false;   // interior strain within 5 %
  bool stress_ok = false;   // interior stress within 5 %
  bool energy_ok = false;   // interior energy density within 10 %
  int interior_nodes = 0;
  double max_interior_strain_error = 0.0;
  double max_interior_stress_error = 0.0;
  double max_interior_energy_error = 0.0;
  bool passed() const { return strain_ok && stress_ok && energy_ok; }
};

Tensile1dResult run_tensile_1d();

struct Tensile2dResult {
  std::vector<QuantityRow> rows;
  double center_x_pd = 0.0;
  double center_x_ccm = 0.0;
  double center_y_pd = 0.0;
  double center_y_ccm = 0.0;
  double x_rel_error = 0.0;
  double y_abs_error = 0.0;
  std::size_t tangent_nnz = 0;   // tangent assembled at u = 0
  offset_t tangent_dim = 0;
  int solver_iterations = 0;
  bool x_ok = false;  // relative position error <= 5e-4
  bool y_ok = false;  // |y - W/2| <= 1e-12
  bool passed() const { return x_ok && y_ok; }
};

// When matrix_path is non-empty the u=0 tangent is exported in MatrixMarket
// coordinate form.
Tensile2dResult run_tensile_2d(const std::string& matrix_path = {});

struct RateStudy {
  std::vector<double> times;                          // shared snapshot times
  std::vector<std::vector<analysis::RatePoint>> sets; // one per mesh triple
  std::vector<double> h_values;
};

// Runs `base` (an explicit deck) once per mesh spacing, collects displacement
// snapshots at the shared output times, and evaluates the convergence rate for
// every consecutive triple of meshes. h_values must be sorted coarse to fine
// with constant refinement ratio.
RateStudy run_convergence_study(const deck::Deck& base,
                                const std::vector<double>& h_values, double ratio);

// Mean of the valid rate points whose time lies outside all [t0,t1] masks;
// skips t = 0.
double averaged_rate(const std::vector<analysis::RatePoint>& points,
                     const std::vector<std::pair<double, double>>& masks);

}  // namespace perikit::cases
