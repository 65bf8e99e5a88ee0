#pragma once

#include <memory>
#include <string>
#include <vector>

#include "homocut/mesh.hpp"
#include "homocut/rational.hpp"

namespace homocut {

class HomologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Field { Rational, Real };

/// Which simplices a complex keeps: all of them, the interior ones (the
/// quotient by the boundary subcomplex), or only the boundary ones.
enum class ComplexKind { Absolute, Relative, Boundary };

std::string to_string(Field f);
std::string to_string(ComplexKind k);

/// Sparse chain or cochain over global simplex ids of a fixed degree.
using ChainQ = SparseVec<Rational>;

/// Integer boundary matrices of one of the three complexes of a mesh.
class ChainComplex {
 public:
  ChainComplex(const SimplicialMesh& mesh, ComplexKind kind);

  ComplexKind kind() const { return kind_; }
  int top_degree() const { return top_; }
  const SimplicialMesh& mesh() const { return *mesh_; }
  /// Global simplex ids kept in degree k (empty outside 0..top).
  const std::vector<int>& cells(int k) const;
  bool contains(int k, int global) const;
  /// Boundary of a kept k-cell, in global ids of degree k-1 kept by the complex.
  ChainQ boundary_of(int k, int global) const;
  /// Coboundary of the indicator of a kept k-cell, in global ids of degree k+1.
  ChainQ coboundary_of(int k, int global) const;
  /// Exact check of boundary o boundary = 0 in every degree.
  bool boundary_squared_zero() const;

 private:
  const SimplicialMesh* mesh_;
  ComplexKind kind_;
  int top_;
  std::vector<std::vector<int>> cells_;
  std::vector<std::vector<std::uint8_t>> kept_;
};

/// Basis of (co)homology in one degree of one complex, with an exact
/// reducer that expresses any (co)cycle in that basis.
struct HomologyBasis {
  ComplexKind kind = ComplexKind::Absolute;
  int degree = 0;
  bool cohomology = false;
  std::vector<ChainQ> generators;  // cycles (or cocycles) in global ids
  std::shared_ptr<const EchelonBasis<Rational>> reducer;
  std::string id() const;
  int dimension() const { return static_cast<int>(generators.size()); }
};

HomologyBasis homology_basis(const SimplicialMesh& mesh, ComplexKind kind, int k);
HomologyBasis cohomology_basis(const SimplicialMesh& mesh, ComplexKind kind, int k);

/// Basis of H_k(M, dM); the field tag only affects how classes built on it
/// store their coefficients, the basis itself is always exact.
HomologyBasis relative_homology_basis(const SimplicialMesh& mesh, int k, Field field);

/// Coefficients of a (co)cycle in the basis; nullopt if it is not a (co)cycle.
std::optional<std::vector<Rational>> classify(const HomologyBasis& basis, const ChainQ& cycle);

/// True iff the (co)chain is a (co)boundary in the complex of the basis.
bool is_trivial(const HomologyBasis& basis, const ChainQ& cycle);

struct HomologyClass {
  int degree = 0;
  ComplexKind kind = ComplexKind::Relative;
  Field field = Field::Rational;
  std::vector<Rational> exact;  // coefficients when field == Rational
  std::vector<double> real;     // coefficients when field == Real
  std::shared_ptr<const HomologyBasis> basis;

  static HomologyClass rational(std::shared_ptr<const HomologyBasis> basis, std::vector<Rational> coeffs);
  static HomologyClass real_valued(std::shared_ptr<const HomologyBasis> basis, std::vector<double> coeffs);
  std::vector<double> coefficients() const;
  bool is_zero() const;
  /// Representative chain; requires a rational class.
  ChainQ representative() const;
};

/// Boundary of a representative of a relative class, as a class in the boundary complex.
struct ConnectingResult {
  HomologyClass boundary_class;
  ChainQ boundary_chain;  // boundary of the representative
};
ConnectingResult connecting_homomorphism(const SimplicialMesh& mesh, const HomologyClass& alpha);

/// Cup product of a p-cochain and a q-cochain evaluated on the fundamental
/// class of M (boundary == false) or of dM with its induced orientation.
Rational integrate_cup(const SimplicialMesh& mesh, int p, const std::vector<Rational>& a, int q,
                       const std::vector<Rational>& b, bool boundary);

/// Dense cochain of degree k from a sparse one.
std::vector<Rational> densify(const SimplicialMesh& mesh, int k, const ChainQ& c);

struct LefschetzDual {
  std::vector<Rational> eta_exact;  // filled for rational classes
  std::vector<double> eta;          // closed 1-cochain on all edges
  std::vector<double> target;       // <phi_j, alpha> for the dual cohomology basis
  std::vector<double> achieved;     // integral of eta cup phi_j
};

/// Closed 1-cochain eta with integral(eta cup phi) = <phi, alpha> for every
/// (d-1)-cocycle phi of the complementary complex. A class of H_{d-1}(M, dM)
/// maps to an absolute cocycle; a class of H_{d-1}(M) maps to a cocycle
/// vanishing on boundary edges.
///
/// Throws HomologyError if the pairing matrix is singular.
LefschetzDual lefschetz_dual(const SimplicialMesh& mesh, const HomologyClass& alpha);

/// Poincare dual of a (d-2)-class of the closed manifold dM, as a 1-cocycle on boundary edges.
std::vector<Rational> boundary_poincare_dual(const SimplicialMesh& mesh, const ChainQ& cycle);

struct SignDiagramReport {
  bool commutes = false;
  std::string report;
};

/// Exact check that the restriction of the Lefschetz dual of alpha to dM is
/// cohomologous to the dual of (-1)^k times its boundary, k = 1.
SignDiagramReport verify_sign_diagram(const SimplicialMesh& mesh, const HomologyClass& alpha);

/// Oriented 1-chain along a vertex path (closed == true adds the closing edge).
/// Throws HomologyError if consecutive vertices do not span an edge.
ChainQ path_chain(const SimplicialMesh& mesh, const std::vector<int>& vertices, bool closed);

/// Class of a cycle in a freshly computed basis of the given complex.
HomologyClass class_of_cycle(const SimplicialMesh& mesh, ComplexKind kind, int degree, const ChainQ& cycle);

/// Sum over cells of |weight| * cell volume (0-cells have unit volume).
double cycle_mass(const SimplicialMesh& mesh, int degree, const ChainQ& chain);
double cycle_mass(const SimplicialMesh& mesh, int degree, const std::vector<std::pair<int, double>>& chain);

/// Evaluates a real cochain on a rational chain.
double pair(const std::vector<double>& cochain, const ChainQ& chain);

}  // namespace homocut
