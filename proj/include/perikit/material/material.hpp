#pragma once

// Constitutive kernels: bond strain, linearized / softening bond force and
// energy, and the state-based weighted volume / dilatation / force pipeline.

#include <memory>
#include <vector>

#include "perikit/discretization/discretization.hpp"

namespace perikit {

enum class Influence { kGaussian, kConstant };

struct BondBasedParams {
  double C = 1.0;     // potential scale
  double beta = 1.0;  // potential shape
  double delta = 0.0;
  Influence influence = Influence::kGaussian;
  double c1 = 1.0;
  double c2 = 0.4;
  bool linearized = false;  // LP substitutes psi'(0) for psi'(|xi| S^2)
};

struct StateBasedParams {
  double K = 0.0;   // bulk modulus [Pa]
  double mu = 0.0;  // shear modulus [Pa]
  double delta = 0.0;
};

// Per-time-step snapshot of all nodal fields.
struct FieldState {
  std::vector<double> u;       // displacement, n*dim
  std::vector<double> v;       // velocity, n*dim
  std::vector<double> f;       // internal force density, n*dim
  std::vector<double> b;       // external force density, n*dim
  std::vector<double> energy;  // strain-energy density, n
  double time = 0.0;

  static FieldState zeros(std::size_t n, int dim);
};

// Projected relative bond stretch S = ((u_j - u_i) . xi) / |xi|^2.
double bond_strain(const double* u_i, const double* u_j, const double* x_i,
                   const double* x_j, int dim);

// psi(r) = C (1 - exp(-beta r)); smooth, increasing, concave, -> C.
double psi(double r, double C, double beta);
double psi_prime(double r, double C, double beta);

// Influence weight at scaled radius r/delta in [0,1].
double influence(double r_scaled, const BondBasedParams& p);

// Measure of the horizon ball: 2*delta, pi*delta^2, (4/3)*pi*delta^3.
double ball_volume(int dim, double delta);

// Force evaluation interface used by the time integrators.
class ForceModel {
 public:
  virtual ~ForceModel() = default;
  virtual void forces(const std::vector<double>& u, std::vector<double>& f) const = 0;
  // May evaluate force and energy as independent tasks joined before return.
  virtual void forces_and_energy(const std::vector<double>& u, std::vector<double>& f,
                                 std::vector<double>& energy) const = 0;
  virtual std::size_t nodes() const = 0;
  virtual int dim() const = 0;
};

// Bond-based elastic material. Per-bond influence weights are precomputed at
// construction; force and strain energy are accumulated in one fused row pass.
class BondForceModel final : public ForceModel {
 public:
  BondForceModel(const NodeCloud& cloud, const NeighborList& nbrs,
                 const BondBasedParams& params);

  void forces(const std::vector<double>& u, std::vector<double>& f) const override;
  void forces_and_energy(const std::vector<double>& u, std::vector<double>& f,
                         std::vector<double>& energy) const override;
  std::size_t nodes() const override { return cloud_->n; }
  int dim() const override { return cloud_->dim; }
  const BondBasedParams& params() const { return params_; }

 private:
  void run(const std::vector<double>& u, std::vector<double>& f,
           std::vector<double>* energy) const;

  const NodeCloud* cloud_;
  const NeighborList* nbrs_;
  BondBasedParams params_;
  std::vector<double> weights_;  // J(|xi|/delta) * V_j * V_ij per bond
  double fpref_ = 0.0;           // 4 / (delta * |B_delta(0)|)
  double epref_ = 0.0;           // 1 / (|B_delta(0)| * delta)
};

// Linearly elastic state-based material (weighted volume m, dilatation theta,
// force state t, deformed direction M). Forces are assembled in gather form:
// each node sums t_i<xi> + t_j<-xi> over its own row, so rows are
// race-free under data-parallel execution and match the pairwise scatter sum
// exactly.
class StateForceModel final : public ForceModel {
 public:
  StateForceModel(const NodeCloud& cloud, const NeighborList& nbrs,
                  const StateBasedParams& params);

  void forces(const std::vector<double>& u, std::vector<double>& f) const override;
  // theta pass, then force and energy as independent async tasks.
  void forces_and_energy(const std::vector<double>& u, std::vector<double>& f,
                         std::vector<double>& energy) const override;
  std::size_t nodes() const override { return cloud_->n; }
  int dim() const override { return cloud_->dim; }
  const StateBasedParams& params() const { return params_; }

  const std::vector<double>& weighted_volumes() const { return m_; }
  void dilatation(const std::vector<double>& u, std::vector<double>& theta) const;
  void force_from_dilatation(const std::vector<double>& u,
                             const std::vector<double>& theta,
                             std::vector<double>& f) const;
  // Strain-energy density K theta^2/2 + (15 mu / 2m) sum (e^d)^2 V_j V_ij.
  void energy_from_dilatation(const std::vector<double>& u,
                              const std::vector<double>& theta,
                              std::vector<double>& energy) const;

 private:
  const NodeCloud* cloud_;
  const NeighborList* nbrs_;
  StateBasedParams params_;
  std::vector<double> weights_;  // V_j * V_ij per bond
  std::vector<double> m_;        // weighted volumes
};

// Free-function forms of the individual operations.
std::vector<double> compute_weighted_volumes(const NodeCloud& cloud,
                                             const NeighborList& nbrs);
std::vector<double> compute_dilatation(const NodeCloud& cloud, const NeighborList& nbrs,
                                       const std::vector<double>& m,
                                       const std::vector<double>& u);
void compute_bond_forces(const NodeCloud& cloud, const NeighborList& nbrs,
                         const BondBasedParams& params, const std::vector<double>& u,
                         std::vector<double>& f, std::vector<double>& energy);
void compute_state_forces(const NodeCloud& cloud, const NeighborList& nbrs,
                          const std::vector<double>& m, const std::vector<double>& theta,
                          const StateBasedParams& params, const std::vector<double>& u,
                          std::vector<double>& f);

}  // namespace perikit
