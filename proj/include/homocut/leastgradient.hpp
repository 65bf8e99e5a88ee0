#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "homocut/homology.hpp"
#include "homocut/integrand.hpp"
#include "homocut/mesh.hpp"

namespace homocut {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Real (d-2)-chain on the boundary, sparse over (d-2)-simplex ids.
using BoundaryCycle = std::vector<std::pair<int, double>>;

/// The cut problem: minimize the mass of omega = eta + du over potentials u
/// with u = f on boundary vertices. The mesh must outlive the problem.
struct LeastGradientProblem {
  const SimplicialMesh* mesh = nullptr;
  std::vector<double> eta;              // closed 1-cochain
  std::vector<double> boundary_values;  // per vertex; used on boundary vertices
  BoundaryCycle boundary_cycle;
  std::shared_ptr<const EllipticIntegrand> norm;
  std::optional<HomologyClass> alpha;
  /// When set, f is only fixed up to a constant on every boundary component
  /// but the first, and these constants are optimized too. This is the case
  /// for relative classes, whose dual cocycle is absolute.
  bool free_boundary_constants = false;

  /// Vertices whose potential is free (all interior vertices; on a closed
  /// manifold every vertex but the first).
  std::vector<int> free_vertices() const;

  /// Unknown index per vertex (-1 when fixed); the boundary vertices of a
  /// component with a free constant share one unknown. Returns the count.
  int dof_map(std::vector<int>& dof) const;
};

/// Potential on boundary vertices whose jumps reproduce S:
/// along a boundary edge a -> b in the induced orientation,
///   f(b) - f(a) = -(s_a + s_b) / 2 - eta(a -> b)        (d = 2)
///   f(b) - f(a) = -eta(a -> b)                          (d >= 3, S must vanish)
/// The first vertex of every boundary component gets f = 0.
/// Throws SolverError when the jumps are inconsistent around a boundary
/// component (the classes of S and of the boundary of alpha differ).
std::vector<double> boundary_data_from_cycle(const SimplicialMesh& mesh, const BoundaryCycle& s,
                                             const std::vector<double>& eta);

/// Problem for a class alpha (relative or absolute, degree d-1) and boundary
/// cycle S. Relative classes get free boundary constants.
LeastGradientProblem make_problem(const SimplicialMesh& mesh, const HomologyClass& alpha, const BoundaryCycle& s,
                                  std::shared_ptr<const EllipticIntegrand> norm = riemannian_integrand());

/// Problem from an explicit closed cochain and boundary cycle.
LeastGradientProblem make_problem(const SimplicialMesh& mesh, std::vector<double> eta, const BoundaryCycle& s,
                                  std::shared_ptr<const EllipticIntegrand> norm = riemannian_integrand(),
                                  bool free_boundary_constants = false);

/// omega = eta + du.
std::vector<double> total_form(const LeastGradientProblem& prob, const std::vector<double>& u);

/// Potential with the boundary values of the problem and zeros elsewhere.
std::vector<double> initial_potential(const LeastGradientProblem& prob);

/// Values of a 1-cochain on the edges (v0, vk) of a top cell.
void cell_values(const SimplicialMesh& mesh, int cell, const std::vector<double>& omega, std::span<double> w);

/// Regularized energy J = sum_T vol_T * phi_eps(omega_T)^p, and optionally
/// its gradient with respect to every vertex potential.
/// Throws SolverError unless 1 <= p <= 2 and eps >= 0 (eps > 0 for p < 2).
double p_energy(const LeastGradientProblem& prob, const std::vector<double>& u, double p, double eps,
                std::vector<double>* gradient = nullptr);

/// Mass sum_T vol_T phi(omega_T) with the unregularized integrand.
double form_mass(const LeastGradientProblem& prob, const std::vector<double>& omega);

struct NewtonOptions {
  int max_iterations = 400;
  double tolerance = 1e-10;  // on the Newton decrement squared over |J|
};

struct StageResult {
  std::vector<double> u;
  double energy = 0.0;
  double residual = 0.0;  // max |dJ/du_v| over free vertices, divided by p
  int iterations = 0;
  bool converged = false;
};

/// Newton's method with backtracking for the regularized p-energy, starting
/// from warm_start (whose boundary values are reset to the problem's).
StageResult solve_p_laplacian(const LeastGradientProblem& prob, double p, double eps,
                              const std::vector<double>& warm_start, const NewtonOptions& opts = {});

/// Conjugate form of a potential: per cell, y_T = phi_eps^(p-1) * grad phi_eps(omega_T),
/// so that the pairing of y with omega is sum_T vol_T <y_T, omega_T>.
struct ConjugateForm {
  std::vector<double> cell_flux;   // d values per top cell
  std::vector<double> edge_flux;   // flux through the dual cell of each edge
  std::vector<double> cell_norm;   // dual norm of y_T per cell
  double max_norm = 0.0;
  double divergence_residual = 0.0;  // max over free vertices of |div|, relative to max edge flux
};
ConjugateForm conjugate_form(const LeastGradientProblem& prob, const std::vector<double>& u, double p, double eps);

struct Stage {
  double p = 2.0;
  double eps = 0.1;
};

/// Joint geometric schedule p: 2 -> 1.01 then p = 1, eps: 1e-1 -> 1e-6.
std::vector<Stage> default_schedule();

struct StageRecord {
  double p = 0.0;
  double eps = 0.0;
  double energy = 0.0;
  double mass = 0.0;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
};

struct LeastGradientSolution {
  std::vector<double> u;
  std::vector<double> omega;
  double mass = 0.0;
  ConjugateForm gamma;               // from the last stage
  std::vector<double> calibration;   // cell_flux scaled so the largest dual norm is 1
  std::vector<StageRecord> trace;
  bool converged = true;
  bool sharpened = false;            // integral class rounded to a concentrated cut
  std::vector<std::string> warnings;
};

struct ContinuationOptions {
  NewtonOptions newton;
  bool sharpen_integral_classes = true;
  double monotonicity_slack = 1e-6;
  double adhesion_threshold = 0.01;
};

/// Warm-started Newton solves along the schedule (p non-increasing, eps
/// non-increasing). Throws SolverError on an invalid schedule.
LeastGradientSolution continuation(const LeastGradientProblem& prob, const std::vector<Stage>& schedule,
                                   const ContinuationOptions& opts = {});

/// Rounds a solution with integral periods and integral boundary data to the
/// thresholded potential of least mass. Returns nullopt when the data are not
/// integral or the problem has free boundary constants.
std::optional<std::vector<double>> sharpen_integral(const LeastGradientProblem& prob, const std::vector<double>& u);

/// Fraction of the mass that runs parallel to the boundary inside cells with a
/// boundary facet, leaving out cells that touch the support of S.
double boundary_adhesion(const LeastGradientProblem& prob, const std::vector<double>& omega);

struct CutCurrent {
  std::vector<double> crossing;  // omega per edge: signed crossing of the dual cell
  std::vector<double> weight;    // signed mass density per dual cell of each edge
  double mass = 0.0;             // sum |weight| * dual volume
  double support_fraction = 0.0; // interior dual cells with |weight| > 1e-3 max |weight|
  double boundary_defect = 0.0;  // largest mismatch between the boundary trace and S
  std::vector<double> periods;   // omega on the generators of H_1(M)
};
CutCurrent extract_cut(const LeastGradientProblem& prob, const LeastGradientSolution& sol);

struct DualityReport {
  double mass = 0.0;
  double pairing = 0.0;       // sum_T vol_T <gamma_T, omega_T> for the normalized calibration
  double gap = 0.0;
  double relative_gap = 0.0;
  double gamma_sup = 0.0;     // largest dual norm of the normalized calibration
  double divergence = 0.0;
};
DualityReport duality_gap(const LeastGradientProblem& prob, const LeastGradientSolution& sol);

/// Pairing of a calibration (d values per cell) with a 1-cochain.
double calibration_pairing(const LeastGradientProblem& prob, const std::vector<double>& calibration,
                           const std::vector<double>& omega);

struct OracleOptions {
  int max_iterations = 400000;
  int restarts = 3;
  double tolerance = 1e-8;
  std::uint64_t seed = 7;
};

struct OracleResult {
  double value = 0.0;  // best primal mass found
  double lower = 0.0;  // certified lower bound
  int iterations = 0;
  bool certified = false;  // value - lower <= tolerance * max(1, value)
};

/// Minimum mass by a primal-dual first-order method with a certified gap.
/// Throws SolverError for meshes with more than 60 edges.
OracleResult exact_small_oracle(const LeastGradientProblem& prob, const OracleOptions& opts = {});

}  // namespace homocut
