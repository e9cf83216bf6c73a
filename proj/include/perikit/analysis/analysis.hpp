#pragma once

// Validation oracles: analytic tensile solutions, discrete L2 norms,
// convergence-rate estimation, and Gaussian initial conditions.

#include <optional>
#include <vector>

#include "perikit/discretization/discretization.hpp"

namespace perikit::analysis {

// Volume-weighted discrete L2 norm sqrt(sum_i |f_i|^2 V_i) of an n x d field.
double l2_field_norm(const std::vector<double>& field, const NodeCloud& cloud);

struct MeshSolution {
  const NodeCloud* cloud = nullptr;
  // One displacement field (n*dim) per evaluation time, shared across meshes.
  std::vector<std::vector<double>> fields;
};

struct ConvergenceInput {
  std::vector<MeshSolution> meshes;  // fine-to-coarse ordering u_1 (coarsest) first
  double ratio = 2.0;                // h_1/h_2 = h_2/h_3
  std::vector<double> times;
};

struct RatePoint {
  double time = 0.0;
  double alpha = 0.0;
  bool valid = false;  // false where an inter-mesh difference vanished
};

// alpha(t) = [log|u1-u2| - log|u2-u3|] / log(r), differences taken at
// coincident coarse-mesh nodes with coarse volumes. Throws on non-nested
// meshes.
std::vector<RatePoint> convergence_rate(const ConvergenceInput& input);

struct Tensile1dReference {
  double strain = 0.0;
  double stress = 0.0;
  double energy_density = 0.0;
};

// Uniaxial bar: strain F/(A E), stress F/A, energy density sigma^2/(2E).
Tensile1dReference ccm_1d_tensile(double F, double A, double E);

struct PlateDisplacement {
  double ux = 0.0;
  double uy = 0.0;
};

// Plane tensile plate clamped at x = W with total edge load F (negative pulls
// toward -x): u_x = F/(EWT) (W - X_x), u_y = nu F/(E T) (X_y/W - 1/2).
PlateDisplacement ccm_2d_tensile(double F, double E, double nu, double W, double H,
                                 double T, const double* X);

struct GaussianPulse {
  std::vector<double> center;     // d components
  std::vector<double> amplitude;  // d components
  double width = 0.0;             // beta, length^2 scale
};

// u0(X) = sum_c exp(-|X - x_c|^2 / beta) * a_c, v0 = 0.
void gaussian_ic(const std::vector<GaussianPulse>& pulses, const NodeCloud& cloud,
                 std::vector<double>& u0, std::vector<double>& v0);

}  // namespace perikit::analysis
