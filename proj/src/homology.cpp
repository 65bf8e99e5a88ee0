#include "homocut/homology.hpp"

#include <algorithm>
#include <sstream>

namespace homocut {

std::string to_string(Field f) { return f == Field::Rational ? "Q" : "R"; }

std::string to_string(ComplexKind k) {
  switch (k) {
    case ComplexKind::Absolute:
      return "absolute";
    case ComplexKind::Relative:
      return "relative";
    case ComplexKind::Boundary:
      return "boundary";
  }
  return "?";
}

ChainComplex::ChainComplex(const SimplicialMesh& mesh, ComplexKind kind)
    : mesh_(&mesh), kind_(kind), top_(kind == ComplexKind::Boundary ? mesh.dimension() - 1 : mesh.dimension()) {
  cells_.assign(mesh.dimension() + 1, {});
  kept_.assign(mesh.dimension() + 1, {});
  for (int k = 0; k <= mesh.dimension(); ++k) {
    kept_[k].assign(mesh.count(k), 0);
    for (int i = 0; i < mesh.count(k); ++i) {
      bool keep = true;
      if (kind == ComplexKind::Relative) keep = !mesh.on_boundary(k, i);
      if (kind == ComplexKind::Boundary) keep = k <= top_ && mesh.on_boundary(k, i);
      if (keep) {
        kept_[k][i] = 1;
        cells_[k].push_back(i);
      }
    }
  }
}

const std::vector<int>& ChainComplex::cells(int k) const {
  static const std::vector<int> empty;
  if (k < 0 || k > top_) return empty;
  return cells_[k];
}

bool ChainComplex::contains(int k, int global) const {
  return k >= 0 && k <= top_ && kept_[k][global] != 0;
}

ChainQ ChainComplex::boundary_of(int k, int global) const {
  ChainQ out;
  if (k <= 0) return out;
  for (const auto& inc : mesh_->faces(k, global)) {
    if (contains(k - 1, inc.face)) out.emplace_back(inc.face, Rational(inc.sign));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

ChainQ ChainComplex::coboundary_of(int k, int global) const {
  ChainQ out;
  if (k >= top_) return out;
  for (const auto& inc : mesh_->cofaces(k, global)) {
    if (contains(k + 1, inc.face)) out.emplace_back(inc.face, Rational(inc.sign));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

bool ChainComplex::boundary_squared_zero() const {
  for (int k = 2; k <= top_; ++k) {
    for (int c : cells(k)) {
      ChainQ acc;
      for (const auto& [f, w] : boundary_of(k, c)) acc = axpy(acc, w, boundary_of(k - 1, f));
      if (!acc.empty()) return false;
    }
  }
  return true;
}

std::string HomologyBasis::id() const {
  std::ostringstream os;
  os << (cohomology ? "H^" : "H_") << degree << ":" << to_string(kind);
  return os.str();
}

namespace {

template <class OutFn, class InFn>
HomologyBasis reduce_quotient(const std::vector<int>& cells, const std::vector<int>& in_cells, OutFn out_map,
                              InFn in_map) {
  auto hred = std::make_shared<EchelonBasis<Rational>>();
  for (int c : in_cells) hred->add(in_map(c));

  HomologyBasis basis;
  EchelonBasis<Rational> kernel;
  for (int c : cells) {
    auto r = kernel.reduce(out_map(c));
    ChainQ combo = axpy(unit<Rational>(c), Rational(-1), r.tags);
    if (!r.residual.empty()) {
      kernel.insert(std::move(r.residual), std::move(combo));
      continue;
    }
    auto q = hred->reduce(combo);
    if (q.residual.empty()) continue;
    const int g = static_cast<int>(basis.generators.size());
    hred->insert(std::move(q.residual), axpy(unit<Rational>(g), Rational(-1), q.tags));
    basis.generators.push_back(std::move(combo));
  }
  basis.reducer = std::move(hred);
  return basis;
}

}  // namespace

HomologyBasis homology_basis(const SimplicialMesh& mesh, ComplexKind kind, int k) {
  ChainComplex cx(mesh, kind);
  auto basis = reduce_quotient(
      cx.cells(k), cx.cells(k + 1), [&](int c) { return cx.boundary_of(k, c); },
      [&](int c) { return cx.boundary_of(k + 1, c); });
  basis.kind = kind;
  basis.degree = k;
  basis.cohomology = false;
  return basis;
}

HomologyBasis cohomology_basis(const SimplicialMesh& mesh, ComplexKind kind, int k) {
  ChainComplex cx(mesh, kind);
  auto basis = reduce_quotient(
      cx.cells(k), cx.cells(k - 1), [&](int c) { return cx.coboundary_of(k, c); },
      [&](int c) { return cx.coboundary_of(k - 1, c); });
  basis.kind = kind;
  basis.degree = k;
  basis.cohomology = true;
  return basis;
}

HomologyBasis relative_homology_basis(const SimplicialMesh& mesh, int k, Field) {
  return homology_basis(mesh, ComplexKind::Relative, k);
}

std::optional<std::vector<Rational>> classify(const HomologyBasis& basis, const ChainQ& cycle) {
  auto r = basis.reducer->reduce(cycle);
  if (!r.residual.empty()) return std::nullopt;
  std::vector<Rational> coeffs(basis.dimension());
  for (const auto& [g, v] : r.tags) coeffs[g] = v;
  return coeffs;
}

bool is_trivial(const HomologyBasis& basis, const ChainQ& cycle) {
  auto coeffs = classify(basis, cycle);
  if (!coeffs) return false;
  return std::all_of(coeffs->begin(), coeffs->end(), [](const Rational& x) { return sgn(x) == 0; });
}

HomologyClass HomologyClass::rational(std::shared_ptr<const HomologyBasis> basis, std::vector<Rational> coeffs) {
  if (static_cast<int>(coeffs.size()) != basis->dimension()) throw HomologyError("class coefficient count mismatch");
  HomologyClass c;
  c.degree = basis->degree;
  c.kind = basis->kind;
  c.field = Field::Rational;
  c.exact = std::move(coeffs);
  c.basis = std::move(basis);
  return c;
}

HomologyClass HomologyClass::real_valued(std::shared_ptr<const HomologyBasis> basis, std::vector<double> coeffs) {
  if (static_cast<int>(coeffs.size()) != basis->dimension()) throw HomologyError("class coefficient count mismatch");
  HomologyClass c;
  c.degree = basis->degree;
  c.kind = basis->kind;
  c.field = Field::Real;
  c.real = std::move(coeffs);
  c.basis = std::move(basis);
  return c;
}

std::vector<double> HomologyClass::coefficients() const {
  if (field == Field::Real) return real;
  std::vector<double> out;
  for (const auto& q : exact) out.push_back(q.get_d());
  return out;
}

bool HomologyClass::is_zero() const {
  for (double x : coefficients()) {
    if (x != 0.0) return false;
  }
  return true;
}

ChainQ HomologyClass::representative() const {
  if (field != Field::Rational) throw HomologyError("representative chain requires a rational class");
  ChainQ c;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    if (sgn(exact[i]) != 0) c = axpy(c, exact[i], basis->generators[i]);
  }
  return c;
}

ConnectingResult connecting_homomorphism(const SimplicialMesh& mesh, const HomologyClass& alpha) {
  const int d = mesh.dimension();
  if (alpha.basis->cohomology || alpha.degree != d - 1) {
    throw HomologyError("connecting homomorphism: expected a homology class of degree " + std::to_string(d - 1));
  }
  auto target = std::make_shared<HomologyBasis>(homology_basis(mesh, ComplexKind::Boundary, d - 2));
  ConnectingResult res;
  if (alpha.kind == ComplexKind::Absolute) {
    res.boundary_class = HomologyClass::rational(target, std::vector<Rational>(target->dimension()));
    if (alpha.field == Field::Real) {
      res.boundary_class = HomologyClass::real_valued(target, std::vector<double>(target->dimension(), 0.0));
    }
    return res;
  }
  if (alpha.kind != ComplexKind::Relative) throw HomologyError("connecting homomorphism: class must be relative");

  auto full_boundary = [&](const ChainQ& c) {
    ChainQ out;
    for (const auto& [s, w] : c) {
      ChainQ b;
      for (const auto& inc : mesh.faces(d - 1, s)) b.emplace_back(inc.face, Rational(inc.sign));
      std::sort(b.begin(), b.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
      out = axpy(out, w, b);
    }
    return out;
  };

  if (alpha.field == Field::Rational) {
    res.boundary_chain = full_boundary(alpha.representative());
    auto coeffs = classify(*target, res.boundary_chain);
    if (!coeffs) throw HomologyError("connecting homomorphism: boundary is not a cycle in dM");
    res.boundary_class = HomologyClass::rational(target, *coeffs);
    return res;
  }
  std::vector<double> coeffs(target->dimension(), 0.0);
  for (std::size_t i = 0; i < alpha.real.size(); ++i) {
    auto c = classify(*target, full_boundary(alpha.basis->generators[i]));
    if (!c) throw HomologyError("connecting homomorphism: boundary is not a cycle in dM");
    for (int j = 0; j < target->dimension(); ++j) coeffs[j] += alpha.real[i] * (*c)[j].get_d();
  }
  res.boundary_class = HomologyClass::real_valued(target, coeffs);
  return res;
}

std::vector<Rational> densify(const SimplicialMesh& mesh, int k, const ChainQ& c) {
  std::vector<Rational> out(mesh.count(k));
  for (const auto& [i, v] : c) out[i] = v;
  return out;
}

Rational integrate_cup(const SimplicialMesh& mesh, int p, const std::vector<Rational>& a, int q,
                       const std::vector<Rational>& b, bool boundary) {
  const int n = p + q;
  const int d = mesh.dimension();
  if (n != (boundary ? d - 1 : d)) throw HomologyError("integrate_cup: degrees do not add up to the dimension");
  Rational acc = 0;
  for (int s = 0; s < mesh.count(n); ++s) {
    const int w = boundary ? mesh.induced_orientation(s) : mesh.orientation(s);
    if (w == 0) continue;
    const auto& v = mesh.simplex(n, s);
    const int front = mesh.find(std::vector<int>(v.begin(), v.begin() + p + 1));
    const int back = mesh.find(std::vector<int>(v.begin() + p, v.end()));
    if (sgn(a[front]) == 0 || sgn(b[back]) == 0) continue;
    acc += w * a[front] * b[back];
  }
  return acc;
}

namespace {

std::vector<std::vector<Rational>> invert(const std::vector<std::vector<Rational>>& m) {
  const std::size_t n = m.size();
  std::vector<std::vector<Rational>> mt(n, std::vector<Rational>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) mt[i][j] = m[j][i];
  }
  std::vector<std::vector<Rational>> inv(n, std::vector<Rational>(n));
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<Rational> e(n);
    e[j] = 1;
    auto col = solve_left(mt, e);
    if (!col) throw HomologyError("singular pairing matrix");
    for (std::size_t i = 0; i < n; ++i) inv[i][j] = (*col)[i];
  }
  return inv;
}

// Solves integral(eta cup phi_j) = target_j over eta in span(gens).
std::vector<Rational> solve_dual(const SimplicialMesh& mesh, const std::vector<std::vector<Rational>>& gens, int p,
                                 const std::vector<std::vector<Rational>>& phis, int q,
                                 const std::vector<Rational>& target, bool boundary, int out_count) {
  const std::size_t m = gens.size();
  if (m != phis.size()) throw HomologyError("singular pairing matrix: mesh too coarse to represent the class");
  std::vector<Rational> eta(out_count);
  if (m == 0) return eta;
  std::vector<std::vector<Rational>> pm(m, std::vector<Rational>(m));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) pm[i][j] = integrate_cup(mesh, p, gens[i], q, phis[j], boundary);
  }
  auto c = solve_left(pm, target);
  if (!c) throw HomologyError("singular pairing matrix: mesh too coarse to represent the class");
  for (std::size_t i = 0; i < m; ++i) {
    if (sgn((*c)[i]) == 0) continue;
    for (int e = 0; e < out_count; ++e) eta[e] += (*c)[i] * gens[i][e];
  }
  return eta;
}

std::vector<std::vector<Rational>> dense_generators(const SimplicialMesh& mesh, const HomologyBasis& b) {
  std::vector<std::vector<Rational>> out;
  for (const auto& g : b.generators) out.push_back(densify(mesh, b.degree, g));
  return out;
}

}  // namespace

LefschetzDual lefschetz_dual(const SimplicialMesh& mesh, const HomologyClass& alpha) {
  const int d = mesh.dimension();
  if (alpha.basis->cohomology || alpha.degree != d - 1 || alpha.kind == ComplexKind::Boundary) {
    throw HomologyError("lefschetz_dual: expected a class in H_{d-1}(M) or H_{d-1}(M, dM)");
  }
  const bool relative = alpha.kind == ComplexKind::Relative;
  const auto zs = cohomology_basis(mesh, relative ? ComplexKind::Absolute : ComplexKind::Relative, 1);
  const auto phis = cohomology_basis(mesh, relative ? ComplexKind::Relative : ComplexKind::Absolute, d - 1);
  const auto zdense = dense_generators(mesh, zs);
  const auto pdense = dense_generators(mesh, phis);
  const auto& hom = *alpha.basis;
  const std::size_t m = hom.generators.size();
  if (phis.dimension() != static_cast<int>(m)) throw HomologyError("singular pairing matrix: dimension mismatch");

  // <phi_k, h_i> and its inverse give the cohomology basis dual to the homology basis.
  std::vector<std::vector<Rational>> pairing(m, std::vector<Rational>(m));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      for (const auto& [s, w] : hom.generators[i]) pairing[i][k] += w * pdense[k][s];
    }
  }
  const auto inv = m ? invert(pairing) : std::vector<std::vector<Rational>>{};

  // eta for each homology generator, then combine.
  std::vector<std::vector<Rational>> eta_gen;
  for (std::size_t i = 0; i < m; ++i) {
    eta_gen.push_back(solve_dual(mesh, zdense, 1, pdense, d - 1, pairing[i], false, mesh.count(1)));
  }

  LefschetzDual out;
  const auto coeffs = alpha.coefficients();
  out.eta.assign(mesh.count(1), 0.0);
  if (alpha.field == Field::Rational) {
    out.eta_exact.assign(mesh.count(1), Rational(0));
    for (std::size_t i = 0; i < m; ++i) {
      if (sgn(alpha.exact[i]) == 0) continue;
      for (int e = 0; e < mesh.count(1); ++e) out.eta_exact[e] += alpha.exact[i] * eta_gen[i][e];
    }
    for (int e = 0; e < mesh.count(1); ++e) out.eta[e] = out.eta_exact[e].get_d();
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      for (int e = 0; e < mesh.count(1); ++e) out.eta[e] += coeffs[i] * eta_gen[i][e].get_d();
    }
  }

  // Certificate against the dual basis phi'_j = sum_k phi_k inv[k][j].
  out.target = coeffs;
  out.achieved.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      const Rational pk = integrate_cup(mesh, 1, eta_gen[i], d - 1, pdense[k], false);
      for (std::size_t j = 0; j < m; ++j) out.achieved[j] += coeffs[i] * Rational(pk * inv[k][j]).get_d();
    }
  }
  return out;
}

std::vector<Rational> boundary_poincare_dual(const SimplicialMesh& mesh, const ChainQ& cycle) {
  const int d = mesh.dimension();
  const auto bs = cohomology_basis(mesh, ComplexKind::Boundary, 1);
  const auto psis = cohomology_basis(mesh, ComplexKind::Boundary, d - 2);
  const auto bdense = dense_generators(mesh, bs);
  const auto pdense = dense_generators(mesh, psis);
  std::vector<Rational> target(pdense.size());
  for (std::size_t j = 0; j < pdense.size(); ++j) {
    for (const auto& [s, w] : cycle) target[j] += w * pdense[j][s];
  }
  return solve_dual(mesh, bdense, 1, pdense, d - 2, target, true, mesh.count(1));
}

SignDiagramReport verify_sign_diagram(const SimplicialMesh& mesh, const HomologyClass& alpha) {
  SignDiagramReport rep;
  std::ostringstream os;
  if (alpha.field != Field::Rational) throw HomologyError("verify_sign_diagram requires a rational class");
  if (!mesh.has_boundary()) {
    rep.commutes = true;
    rep.report = "boundary is empty; diagram commutes vacuously";
    return rep;
  }
  const auto dual = lefschetz_dual(mesh, alpha);
  const auto conn = connecting_homomorphism(mesh, alpha);
  const auto beta = boundary_poincare_dual(mesh, conn.boundary_chain);

  // k = 1: restriction of eta should equal the dual of (-1) * boundary(alpha).
  ChainQ diff;
  for (int e = 0; e < mesh.count(1); ++e) {
    if (!mesh.on_boundary(1, e)) continue;
    Rational v = dual.eta_exact[e] + beta[e];
    if (sgn(v) != 0) diff.emplace_back(e, v);
  }
  const auto h1 = cohomology_basis(mesh, ComplexKind::Boundary, 1);
  const auto coeffs = classify(h1, diff);
  rep.commutes = coeffs && std::all_of(coeffs->begin(), coeffs->end(), [](const Rational& x) { return sgn(x) == 0; });
  os << "dim H^1(dM) = " << h1.dimension() << "; boundary chain support = " << conn.boundary_chain.size()
     << "; restriction + dual(boundary) ";
  if (!coeffs) {
    os << "is not a cocycle";
  } else {
    os << "has class [";
    for (std::size_t i = 0; i < coeffs->size(); ++i) os << (i ? ", " : "") << (*coeffs)[i].get_str();
    os << "]";
  }
  rep.report = os.str();
  return rep;
}

ChainQ path_chain(const SimplicialMesh& mesh, const std::vector<int>& vertices, bool closed) {
  ChainQ c;
  const std::size_t n = vertices.size();
  const std::size_t steps = closed ? n : n - 1;
  for (std::size_t i = 0; i < steps && n > 1; ++i) {
    const int a = vertices[i], b = vertices[(i + 1) % n];
    const int e = mesh.edge_index(a, b);
    if (e < 0) throw HomologyError("path_chain: vertices " + std::to_string(a) + " and " + std::to_string(b) +
                                   " are not joined by an edge");
    c = axpy(c, Rational(a < b ? 1 : -1), unit<Rational>(e));
  }
  return c;
}

HomologyClass class_of_cycle(const SimplicialMesh& mesh, ComplexKind kind, int degree, const ChainQ& cycle) {
  auto basis = std::make_shared<HomologyBasis>(homology_basis(mesh, kind, degree));
  ChainQ kept;
  for (const auto& [c, w] : cycle) {
    if (kind != ComplexKind::Relative || !mesh.on_boundary(degree, c)) kept.emplace_back(c, w);
  }
  auto coeffs = classify(*basis, kept);
  if (!coeffs) throw HomologyError("class_of_cycle: chain is not a cycle of the " + to_string(kind) + " complex");
  return HomologyClass::rational(basis, *coeffs);
}

double cycle_mass(const SimplicialMesh& mesh, int degree, const ChainQ& chain) {
  double m = 0.0;
  for (const auto& [s, w] : chain) m += std::abs(w.get_d()) * mesh.volume(degree, s);
  return m;
}

double cycle_mass(const SimplicialMesh& mesh, int degree, const std::vector<std::pair<int, double>>& chain) {
  double m = 0.0;
  for (const auto& [s, w] : chain) m += std::abs(w) * mesh.volume(degree, s);
  return m;
}

double pair(const std::vector<double>& cochain, const ChainQ& chain) {
  double acc = 0.0;
  for (const auto& [s, w] : chain) acc += cochain[s] * w.get_d();
  return acc;
}

}  // namespace homocut
