#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "homocut/mesh.hpp"

namespace homocut {

/// Per-cell norm on the values w_k = omega(v0 -> vk), k = 1..d, of a
/// 1-cochain on a top simplex. Each integrand is phi(w) = |M w| for a
/// per-cell linear map M and either the Euclidean or the l1 norm.
class EllipticIntegrand {
 public:
  enum class Shape { Euclidean, Octahedral };

  virtual ~EllipticIntegrand() = default;
  virtual std::string name() const = 0;
  virtual Shape shape() const = 0;
  /// Row-major d x d matrix M of the cell.
  virtual void transform(const SimplicialMesh& mesh, int cell, std::span<double> m) const = 0;

  double value(const SimplicialMesh& mesh, int cell, std::span<const double> w) const;
  /// Dual norm of y for the pairing sum_k y_k w_k.
  double dual_value(const SimplicialMesh& mesh, int cell, std::span<const double> y) const;
  /// Smoothed value: sqrt(|z|^2 + eps^2) (Euclidean) or sum_k sqrt(z_k^2 + eps^2)
  /// (l1), z = M w, with gradient and row-major Hessian in w.
  double smoothed(const SimplicialMesh& mesh, int cell, std::span<const double> w, double eps, std::span<double> grad,
                  std::span<double> hess) const;
};

/// |grad| of the piecewise-linear interpolant in the Regge metric.
std::shared_ptr<const EllipticIntegrand> riemannian_integrand();

/// Crystalline integrand sum_k |w_k| / length(v0 vk).
std::shared_ptr<const EllipticIntegrand> l1_integrand();

/// "riemannian" or "l1"; throws std::invalid_argument otherwise.
std::shared_ptr<const EllipticIntegrand> integrand_by_name(const std::string& name);

struct IntegrandFailure {
  std::string axiom;    // positivity | definiteness | homogeneity | subadditivity
  std::string witness;  // human-readable counterexample
};

struct IntegrandReport {
  bool passed = true;
  int samples = 0;
  std::vector<IntegrandFailure> failures;
};

/// Randomized check of the norm axioms on R^dim: phi(0) = 0 and phi > 0
/// elsewhere, phi(t a) = |t| phi(a) (t = 2, -1, 1/2 and random t), and
/// phi(a + b) <= phi(a) + phi(b). Deterministic in the seed; n >= 1.
IntegrandReport validate_integrand(const std::function<double(std::span<const double>)>& phi, int dim, int n,
                                   std::uint64_t seed = 1);

/// Same checks for an integrand on every top cell of a mesh (cycled).
IntegrandReport validate_integrand(const EllipticIntegrand& phi, const SimplicialMesh& mesh, int n,
                                   std::uint64_t seed = 1);

}  // namespace homocut
