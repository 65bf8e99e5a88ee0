#include "homocut/leastgradient.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <queue>
#include <random>
#include <sstream>

namespace homocut {

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

// Per-cell data shared by the energy, its derivatives and the conjugate form.
struct Kernel {
  const SimplicialMesh& mesh;
  int d;
  EllipticIntegrand::Shape shape;
  std::vector<Mat> m;

  Kernel(const LeastGradientProblem& prob) : mesh(*prob.mesh), d(mesh.dimension()), shape(prob.norm->shape()) {
    const int cells = mesh.count(d);
    m.reserve(cells);
    for (int t = 0; t < cells; ++t) {
      Mat mt(d, d);
      prob.norm->transform(mesh, t, std::span<double>(mt.data(), static_cast<std::size_t>(d * d)));
      m.push_back(std::move(mt));
    }
  }

  int vertex(int t, int k) const { return mesh.simplex(d, t)[k]; }

  // phi_eps(w)^p with gradient and Hessian in w (either may be null).
  double energy(int t, const Vec& w, double p, double eps, Vec* grad, Mat* hess) const {
    const Mat& mt = m[t];
    const Vec z = mt * w;
    double val;
    Vec gz(d);
    Mat hz = Mat::Zero(d, d);
    if (shape == EllipticIntegrand::Shape::Euclidean) {
      const double s = z.squaredNorm() + eps * eps;
      if (s == 0.0) {
        val = 0.0;
        gz.setZero();
        if (p == 2.0) hz = 2.0 * Mat::Identity(d, d);
      } else {
        const double sp = std::pow(s, p / 2.0 - 1.0);
        val = sp * s;
        gz = p * sp * z;
        if (hess) {
          hz = p * sp * Mat::Identity(d, d);
          if (p != 2.0) hz += p * (p - 2.0) * sp / s * z * z.transpose();
        }
      }
    } else {
      Vec r(d), unit(d);
      double phi = 0.0;
      for (int k = 0; k < d; ++k) {
        r[k] = std::sqrt(z[k] * z[k] + eps * eps);
        phi += r[k];
        unit[k] = r[k] > 0 ? z[k] / r[k] : 0.0;
      }
      if (phi == 0.0) {
        val = 0.0;
        gz.setZero();
      } else {
        const double pp1 = std::pow(phi, p - 1.0);
        val = pp1 * phi;
        gz = p * pp1 * unit;
        if (hess) {
          for (int k = 0; k < d; ++k) hz(k, k) = p * pp1 * (r[k] > 0 ? eps * eps / (r[k] * r[k] * r[k]) : 0.0);
          hz += p * (p - 1.0) * pp1 / phi * unit * unit.transpose();
        }
      }
    }
    if (grad) *grad = mt.transpose() * gz;
    if (hess) *hess = mt.transpose() * hz * mt;
    return val;
  }
};

void check_stage(double p, double eps) {
  if (!(p >= 1.0 && p <= 2.0)) throw SolverError("p must lie in [1, 2], got " + std::to_string(p));
  if (!(eps >= 0.0) || (p < 2.0 && !(eps > 0.0))) throw SolverError("eps must be positive for p < 2");
}

Vec local_values(const SimplicialMesh& mesh, int t, const std::vector<double>& omega) {
  const int d = mesh.dimension();
  Vec w(d);
  auto edges = mesh.cell_edges(t);
  for (int k = 0; k < d; ++k) w[k] = omega[edges[k]];
  return w;
}

}  // namespace

std::vector<int> LeastGradientProblem::free_vertices() const {
  std::vector<int> out;
  const bool closed = !mesh->has_boundary();
  for (int v = 0; v < mesh->num_vertices(); ++v) {
    if (closed ? v != 0 : !mesh->on_boundary(0, v)) out.push_back(v);
  }
  return out;
}

int LeastGradientProblem::dof_map(std::vector<int>& dof) const {
  dof.assign(mesh->num_vertices(), -1);
  int n = 0;
  for (int v : free_vertices()) dof[v] = n++;
  if (free_boundary_constants) {
    const auto& comps = mesh->boundary_components();
    for (std::size_t k = 1; k < comps.size(); ++k) {
      for (int v : comps[k]) dof[v] = n;
      ++n;
    }
  }
  return n;
}

std::vector<double> boundary_data_from_cycle(const SimplicialMesh& mesh, const BoundaryCycle& s,
                                             const std::vector<double>& eta) {
  const int d = mesh.dimension();
  std::vector<double> weight(mesh.num_vertices(), 0.0);
  for (const auto& [cell, w] : s) {
    if (w == 0.0) continue;
    if (d != 2) throw SolverError("nonzero boundary cycles are supported only for surfaces (d = 2)");
    if (cell < 0 || cell >= mesh.num_vertices() || !mesh.on_boundary(0, cell)) {
      throw SolverError("boundary cycle has weight off the boundary at vertex " + std::to_string(cell));
    }
    weight[cell] += w;
  }
  // Desired f(b) - f(a) for every boundary edge a < b.
  std::vector<std::vector<std::pair<int, int>>> adj(mesh.num_vertices());
  std::vector<double> target(mesh.count(1), 0.0);
  for (int e = 0; e < mesh.count(1); ++e) {
    if (!mesh.on_boundary(1, e)) continue;
    const auto& ab = mesh.simplex(1, e);
    double t = -eta[e];
    if (d == 2) t -= mesh.induced_orientation(e) * 0.5 * (weight[ab[0]] + weight[ab[1]]);
    target[e] = t;
    adj[ab[0]].push_back({ab[1], e});
    adj[ab[1]].push_back({ab[0], e});
  }
  std::vector<double> f(mesh.num_vertices(), 0.0);
  std::vector<char> seen(mesh.num_vertices(), 0);
  double scale = 1.0;
  for (const auto& comp : mesh.boundary_components()) {
    const int root = *std::min_element(comp.begin(), comp.end());
    std::queue<int> q;
    q.push(root);
    seen[root] = 1;
    while (!q.empty()) {
      const int a = q.front();
      q.pop();
      for (const auto& [b, e] : adj[a]) {
        if (seen[b]) continue;
        seen[b] = 1;
        f[b] = f[a] + (a < b ? target[e] : -target[e]);
        scale = std::max(scale, std::abs(f[b]));
        q.push(b);
      }
    }
  }
  for (int e = 0; e < mesh.count(1); ++e) {
    if (!mesh.on_boundary(1, e)) continue;
    const auto& ab = mesh.simplex(1, e);
    const double mismatch = f[ab[1]] - f[ab[0]] - target[e];
    if (std::abs(mismatch) > 1e-9 * scale) {
      std::ostringstream os;
      os << "boundary cycle is not homologous to the boundary of the class: holonomy defect " << mismatch
         << " on boundary component " << mesh.boundary_component_of(ab[0]);
      throw SolverError(os.str());
    }
  }
  return f;
}

LeastGradientProblem make_problem(const SimplicialMesh& mesh, std::vector<double> eta, const BoundaryCycle& s,
                                  std::shared_ptr<const EllipticIntegrand> norm, bool free_boundary_constants) {
  if (static_cast<int>(eta.size()) != mesh.count(1)) throw SolverError("eta must have one value per edge");
  LeastGradientProblem prob;
  prob.mesh = &mesh;
  prob.boundary_values = boundary_data_from_cycle(mesh, s, eta);
  prob.eta = std::move(eta);
  prob.boundary_cycle = s;
  prob.norm = std::move(norm);
  prob.free_boundary_constants = free_boundary_constants;
  return prob;
}

LeastGradientProblem make_problem(const SimplicialMesh& mesh, const HomologyClass& alpha, const BoundaryCycle& s,
                                  std::shared_ptr<const EllipticIntegrand> norm) {
  auto dual = lefschetz_dual(mesh, alpha);
  auto prob = make_problem(mesh, std::move(dual.eta), s, std::move(norm), alpha.kind == ComplexKind::Relative);
  prob.alpha = alpha;
  return prob;
}

std::vector<double> total_form(const LeastGradientProblem& prob, const std::vector<double>& u) {
  const auto& mesh = *prob.mesh;
  std::vector<double> omega(prob.eta);
  for (int e = 0; e < mesh.count(1); ++e) {
    const auto& ab = mesh.simplex(1, e);
    omega[e] += u[ab[1]] - u[ab[0]];
  }
  return omega;
}

std::vector<double> initial_potential(const LeastGradientProblem& prob) {
  std::vector<double> u(prob.mesh->num_vertices(), 0.0);
  for (int v = 0; v < prob.mesh->num_vertices(); ++v) {
    if (prob.mesh->on_boundary(0, v)) u[v] = prob.boundary_values[v];
  }
  return u;
}

void cell_values(const SimplicialMesh& mesh, int cell, const std::vector<double>& omega, std::span<double> w) {
  auto edges = mesh.cell_edges(cell);
  for (std::size_t k = 0; k < edges.size(); ++k) w[k] = omega[edges[k]];
}

double p_energy(const LeastGradientProblem& prob, const std::vector<double>& u, double p, double eps,
                std::vector<double>* gradient) {
  check_stage(p, eps);
  if (prob.norm->shape() == EllipticIntegrand::Shape::Octahedral && !(eps > 0)) {
    throw SolverError("the l1 integrand needs eps > 0");
  }
  const Kernel ker(prob);
  const auto& mesh = *prob.mesh;
  const int d = ker.d;
  const auto omega = total_form(prob, u);
  if (gradient) gradient->assign(mesh.num_vertices(), 0.0);
  double total = 0.0;
  Vec g(d);
  for (int t = 0; t < mesh.count(d); ++t) {
    const double vol = mesh.volume(d, t);
    total += vol * ker.energy(t, local_values(mesh, t, omega), p, eps, gradient ? &g : nullptr, nullptr);
    if (gradient) {
      for (int k = 0; k < d; ++k) {
        (*gradient)[ker.vertex(t, k + 1)] += vol * g[k];
        (*gradient)[ker.vertex(t, 0)] -= vol * g[k];
      }
    }
  }
  return total;
}

double form_mass(const LeastGradientProblem& prob, const std::vector<double>& omega) {
  const auto& mesh = *prob.mesh;
  const int d = mesh.dimension();
  double total = 0.0;
  std::vector<double> w(d);
  for (int t = 0; t < mesh.count(d); ++t) {
    cell_values(mesh, t, omega, w);
    total += mesh.volume(d, t) * prob.norm->value(mesh, t, w);
  }
  return total;
}

StageResult solve_p_laplacian(const LeastGradientProblem& prob, double p, double eps,
                              const std::vector<double>& warm_start, const NewtonOptions& opts) {
  check_stage(p, eps);
  const auto& mesh = *prob.mesh;
  if (static_cast<int>(warm_start.size()) != mesh.num_vertices()) throw SolverError("warm start has wrong size");
  const Kernel ker(prob);
  const int d = ker.d;
  std::vector<int> dof;
  const int n = prob.dof_map(dof);

  StageResult res;
  res.u = warm_start;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (dof[v] < 0) res.u[v] = mesh.has_boundary() ? prob.boundary_values[v] : 0.0;
  }
  if (prob.free_boundary_constants) {
    // Keep the warm start's constant on each component, but restore the shape of f.
    for (const auto& comp : mesh.boundary_components()) {
      const double c = warm_start[comp[0]] - prob.boundary_values[comp[0]];
      for (int v : comp) res.u[v] = prob.boundary_values[v] + (dof[v] >= 0 ? c : 0.0);
    }
  }

  auto energy_of = [&](const std::vector<double>& u) { return p_energy(prob, u, p, eps, nullptr); };

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool analyzed = false;
  std::vector<Eigen::Triplet<double>> trip;
  double energy = energy_of(res.u);
  for (int it = 0; it < opts.max_iterations; ++it) {
    const auto omega = total_form(prob, res.u);
    Vec grad = Vec::Zero(n);
    trip.clear();
    Vec g(d);
    Mat h(d, d);
    for (int t = 0; t < mesh.count(d); ++t) {
      const double vol = mesh.volume(d, t);
      ker.energy(t, local_values(mesh, t, omega), p, eps, &g, &h);
      // Local dof order: vertex 0 gets -sum, vertex k gets component k-1.
      std::vector<int> ids(d + 1);
      for (int k = 0; k <= d; ++k) ids[k] = dof[ker.vertex(t, k)];
      Vec gl(d + 1);
      gl[0] = -g.sum();
      gl.tail(d) = g;
      Mat hl(d + 1, d + 1);
      hl.bottomRightCorner(d, d) = h;
      const Vec rows = h.rowwise().sum();
      hl.block(1, 0, d, 1) = -rows;
      hl.block(0, 1, 1, d) = -rows.transpose();
      hl(0, 0) = rows.sum();
      for (int a = 0; a <= d; ++a) {
        if (ids[a] < 0) continue;
        grad[ids[a]] += vol * gl[a];
        for (int b = 0; b <= d; ++b) {
          if (ids[b] >= 0) trip.emplace_back(ids[a], ids[b], vol * hl(a, b));
        }
      }
    }
    res.residual = n ? grad.lpNorm<Eigen::Infinity>() / p : 0.0;
    res.iterations = it;
    if (n == 0) {
      res.converged = true;
      break;
    }
    Eigen::SparseMatrix<double> hess(n, n);
    hess.setFromTriplets(trip.begin(), trip.end());
    Vec step;
    double shift = 0.0;
    const double diag_scale = std::max(1e-300, hess.diagonal().cwiseAbs().maxCoeff());
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::SparseMatrix<double> a = hess;
      if (shift > 0) {
        for (int i = 0; i < n; ++i) a.coeffRef(i, i) += shift;
      }
      if (!analyzed) {
        ldlt.analyzePattern(a);
        analyzed = true;
      }
      ldlt.factorize(a);
      if (ldlt.info() == Eigen::Success) {
        step = ldlt.solve(-grad);
        if (step.allFinite() && grad.dot(step) < 0) break;
      }
      step.resize(0);
      shift = shift == 0 ? 1e-12 * diag_scale : shift * 100;
    }
    if (step.size() == 0) break;
    const double decrement = -grad.dot(step);
    if (decrement / 2 <= opts.tolerance * std::max(std::abs(energy), 1e-300)) {
      res.converged = true;
      break;
    }
    double tstep = 1.0;
    std::vector<double> trial(res.u);
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (int v = 0; v < mesh.num_vertices(); ++v) {
        if (dof[v] >= 0) trial[v] = res.u[v] + tstep * step[dof[v]];
      }
      const double e = energy_of(trial);
      if (e <= energy - 1e-4 * tstep * decrement) {
        res.u = trial;
        energy = e;
        accepted = true;
        break;
      }
      tstep *= 0.5;
    }
    if (!accepted) {
      // No representable decrease left: the iterate is stationary to rounding.
      res.converged = decrement / 2 <= 1e-8 * std::max(std::abs(energy), 1e-300);
      break;
    }
  }
  res.energy = energy;
  return res;
}

ConjugateForm conjugate_form(const LeastGradientProblem& prob, const std::vector<double>& u, double p, double eps) {
  check_stage(p, eps);
  const auto& mesh = *prob.mesh;
  const Kernel ker(prob);
  const int d = ker.d;
  const auto omega = total_form(prob, u);
  ConjugateForm cf;
  cf.cell_flux.assign(static_cast<std::size_t>(mesh.count(d)) * d, 0.0);
  cf.cell_norm.assign(mesh.count(d), 0.0);
  cf.edge_flux.assign(mesh.count(1), 0.0);
  Vec g(d);
  for (int t = 0; t < mesh.count(d); ++t) {
    const double vol = mesh.volume(d, t);
    ker.energy(t, local_values(mesh, t, omega), p, eps, &g, nullptr);
    g /= p;
    std::copy(g.data(), g.data() + d, cf.cell_flux.begin() + static_cast<std::ptrdiff_t>(t) * d);
    cf.cell_norm[t] = prob.norm->dual_value(mesh, t, std::span<const double>(g.data(), d));
    cf.max_norm = std::max(cf.max_norm, cf.cell_norm[t]);
    // Symmetric split over all edges of the cell: Y_0 = -sum y, Y_k = y_k.
    std::vector<double> y(d + 1);
    y[0] = -g.sum();
    for (int k = 0; k < d; ++k) y[k + 1] = g[k];
    const auto& verts = mesh.simplex(d, t);
    for (int i = 0; i <= d; ++i) {
      for (int j = i + 1; j <= d; ++j) {
        cf.edge_flux[mesh.edge_index(verts[i], verts[j])] += vol * (y[j] - y[i]) / (d + 1);
      }
    }
  }
  std::vector<double> div(mesh.num_vertices(), 0.0);
  double scale = 0.0;
  for (int e = 0; e < mesh.count(1); ++e) {
    const auto& ab = mesh.simplex(1, e);
    div[ab[1]] += cf.edge_flux[e];
    div[ab[0]] -= cf.edge_flux[e];
    scale = std::max(scale, std::abs(cf.edge_flux[e]));
  }
  std::vector<int> dof;
  std::vector<double> net(prob.dof_map(dof), 0.0);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (dof[v] >= 0) net[dof[v]] += div[v];
  }
  for (double x : net) cf.divergence_residual = std::max(cf.divergence_residual, std::abs(x));
  if (scale > 0) cf.divergence_residual /= scale;
  return cf;
}

std::vector<Stage> default_schedule() {
  return {{2.0, 1e-1}, {1.5, 3e-2}, {1.25, 1e-2}, {1.1, 3e-3}, {1.05, 1e-3},
          {1.01, 3e-4}, {1.0, 1e-4}, {1.0, 1e-5}, {1.0, 1e-6}};
}

std::optional<std::vector<double>> sharpen_integral(const LeastGradientProblem& prob, const std::vector<double>& u) {
  const auto& mesh = *prob.mesh;
  const int nv = mesh.num_vertices();
  constexpr double kTol = 1e-7;
  if (prob.free_boundary_constants && mesh.boundary_components().size() > 1) return std::nullopt;
  // g with eta + dg integral: zero on a spanning forest.
  std::vector<std::vector<std::pair<int, int>>> adj(nv);
  for (int e = 0; e < mesh.count(1); ++e) {
    const auto& ab = mesh.simplex(1, e);
    adj[ab[0]].push_back({ab[1], e});
    adj[ab[1]].push_back({ab[0], e});
  }
  std::vector<double> g(nv, 0.0);
  std::vector<char> seen(nv, 0);
  for (int root = 0; root < nv; ++root) {
    if (seen[root]) continue;
    std::queue<int> q;
    q.push(root);
    seen[root] = 1;
    while (!q.empty()) {
      const int a = q.front();
      q.pop();
      for (const auto& [b, e] : adj[a]) {
        if (seen[b]) continue;
        seen[b] = 1;
        g[b] = g[a] - (a < b ? prob.eta[e] : -prob.eta[e]);
        q.push(b);
      }
    }
  }
  for (int e = 0; e < mesh.count(1); ++e) {
    const auto& ab = mesh.simplex(1, e);
    const double v = prob.eta[e] + g[ab[1]] - g[ab[0]];
    if (std::abs(v - std::round(v)) > kTol) return std::nullopt;
  }
  std::vector<double> shifted(nv);
  for (int v = 0; v < nv; ++v) shifted[v] = u[v] - g[v];
  double c = 0.0;
  bool have_c = false;
  for (int v = 0; v < nv; ++v) {
    if (!mesh.on_boundary(0, v)) continue;
    const double b = prob.boundary_values[v] - g[v];
    if (!have_c) {
      c = b - std::floor(b);
      have_c = true;
    }
    const double k = b - c;
    if (std::abs(k - std::round(k)) > kTol) return std::nullopt;
    shifted[v] = std::round(k) + c;
  }
  std::vector<double> frac;
  for (int v = 0; v < nv; ++v) {
    const double x = shifted[v] - c;
    frac.push_back(x - std::floor(x));
  }
  frac.push_back(0.0);
  frac.push_back(1.0);
  std::sort(frac.begin(), frac.end());
  frac.erase(std::unique(frac.begin(), frac.end(), [](double a, double b) { return b - a < 1e-12; }), frac.end());

  std::optional<std::vector<double>> best;
  double best_mass = std::numeric_limits<double>::infinity();
  std::vector<double> cand(nv);
  for (std::size_t i = 0; i + 1 < frac.size(); ++i) {
    const double t = 0.5 * (frac[i] + frac[i + 1]);
    for (int v = 0; v < nv; ++v) {
      cand[v] = mesh.on_boundary(0, v) ? prob.boundary_values[v] : std::ceil(shifted[v] - c - t) + c + g[v];
    }
    const double m = form_mass(prob, total_form(prob, cand));
    if (m < best_mass - 1e-12) {
      best_mass = m;
      best = cand;
    }
  }
  return best;
}

double boundary_adhesion(const LeastGradientProblem& prob, const std::vector<double>& omega) {
  const auto& mesh = *prob.mesh;
  const int d = mesh.dimension();
  // Cells at the support of S are where the cut is meant to end on the boundary.
  std::vector<char> endpoint(mesh.num_vertices(), 0);
  if (d == 2) {
    for (const auto& [v, x] : prob.boundary_cycle) endpoint[v] = endpoint[v] || x != 0.0;
  }
  double total = 0.0, parallel = 0.0;
  std::vector<double> w(d);
  for (int t = 0; t < mesh.count(d); ++t) {
    cell_values(mesh, t, omega, w);
    const double m = mesh.volume(d, t) * prob.norm->value(mesh, t, w);
    total += m;
    if (m == 0.0) continue;
    const auto& cell = mesh.simplex(d, t);
    if (std::any_of(cell.begin(), cell.end(), [&](int v) { return endpoint[v] != 0; })) continue;
    auto ginv = mesh.inverse_gram(t);
    Mat a = Eigen::Map<const Mat>(ginv.data(), d, d);
    const Vec wv = Eigen::Map<const Vec>(w.data(), d);
    const Vec aw = a * wv;
    const double gnorm = std::sqrt(std::max(0.0, wv.dot(aw)));
    if (gnorm == 0.0) continue;
    double frac = 0.0;
    for (const auto& inc : mesh.faces(d, t)) {
      if (!mesh.on_boundary(d - 1, inc.face)) continue;
      // Opposite vertex o: <g, grad lambda_o> / |grad lambda_o|.
      const auto& facet = mesh.simplex(d - 1, inc.face);
      const auto& verts = mesh.simplex(d, t);
      int o = 0;
      while (std::find(facet.begin(), facet.end(), verts[o]) != facet.end()) ++o;
      double num, den;
      if (o == 0) {
        num = -aw.sum();
        den = a.sum();
      } else {
        num = aw[o - 1];
        den = a(o - 1, o - 1);
      }
      frac = std::max(frac, std::abs(num) / std::sqrt(den) / gnorm);
    }
    parallel += m * std::min(1.0, frac);
  }
  return total > 0 ? parallel / total : 0.0;
}

LeastGradientSolution continuation(const LeastGradientProblem& prob, const std::vector<Stage>& schedule,
                                   const ContinuationOptions& opts) {
  if (schedule.empty()) throw SolverError("empty continuation schedule");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    check_stage(schedule[i].p, schedule[i].eps);
    if (i > 0 && (schedule[i].p > schedule[i - 1].p || schedule[i].eps > schedule[i - 1].eps)) {
      throw SolverError("schedule must be non-increasing in p and eps (stage " + std::to_string(i) + ")");
    }
  }
  LeastGradientSolution sol;
  std::vector<double> u = initial_potential(prob);
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const auto& st = schedule[i];
    StageResult r = solve_p_laplacian(prob, st.p, st.eps, u, opts.newton);
    u = std::move(r.u);
    StageRecord rec;
    rec.p = st.p;
    rec.eps = st.eps;
    rec.energy = r.energy;
    rec.mass = form_mass(prob, total_form(prob, u));
    rec.iterations = r.iterations;
    rec.converged = r.converged;
    rec.residual = r.residual;
    if (!r.converged) {
      sol.converged = false;
      sol.warnings.push_back("stage " + std::to_string(i) + " (p=" + std::to_string(st.p) +
                             ") stopped before convergence");
    }
    if (!sol.trace.empty() && rec.mass > sol.trace.back().mass + opts.monotonicity_slack * std::max(1.0, rec.mass)) {
      std::ostringstream os;
      os << "mass increased at stage " << i << ": " << sol.trace.back().mass << " -> " << rec.mass;
      sol.warnings.push_back(os.str());
    }
    sol.trace.push_back(rec);
  }
  const auto& last = schedule.back();
  sol.gamma = conjugate_form(prob, u, last.p, last.eps);
  sol.calibration = sol.gamma.cell_flux;
  if (sol.gamma.max_norm > 0) {
    for (auto& y : sol.calibration) y /= sol.gamma.max_norm;
  }
  sol.u = u;
  sol.omega = total_form(prob, u);
  sol.mass = form_mass(prob, sol.omega);
  if (opts.sharpen_integral_classes) {
    if (auto sharp = sharpen_integral(prob, u)) {
      auto omega = total_form(prob, *sharp);
      const double m = form_mass(prob, omega);
      if (m <= sol.mass * (1.0 + 1e-9)) {
        sol.u = std::move(*sharp);
        sol.omega = std::move(omega);
        sol.mass = m;
        sol.sharpened = true;
      }
    }
  }
  const double adhesion = boundary_adhesion(prob, sol.omega);
  if (adhesion > opts.adhesion_threshold) {
    std::ostringstream os;
    os.precision(3);
    os << "boundary adhesion: " << 100.0 * adhesion << "% of the cut mass runs along the boundary";
    sol.warnings.push_back(os.str());
  }
  return sol;
}

CutCurrent extract_cut(const LeastGradientProblem& prob, const LeastGradientSolution& sol) {
  const auto& mesh = *prob.mesh;
  const int d = mesh.dimension();
  CutCurrent cut;
  cut.crossing = sol.omega;
  std::vector<double> edge_mass(mesh.count(1), 0.0);
  std::vector<double> w(d);
  for (int t = 0; t < mesh.count(d); ++t) {
    cell_values(mesh, t, sol.omega, w);
    const double m = mesh.volume(d, t) * prob.norm->value(mesh, t, w);
    if (m == 0.0) continue;
    const auto& verts = mesh.simplex(d, t);
    std::vector<int> edges;
    double denom = 0.0;
    for (int i = 0; i <= d; ++i) {
      for (int j = i + 1; j <= d; ++j) {
        edges.push_back(mesh.edge_index(verts[i], verts[j]));
        denom += std::abs(sol.omega[edges.back()]);
      }
    }
    if (denom == 0.0) continue;
    for (int e : edges) edge_mass[e] += m * std::abs(sol.omega[e]) / denom;
  }
  cut.weight.assign(mesh.count(1), 0.0);
  double max_w = 0.0;
  for (int e = 0; e < mesh.count(1); ++e) {
    if (edge_mass[e] == 0.0) continue;
    const double dv = mesh.dual_volume(1, e);
    cut.weight[e] = std::copysign(edge_mass[e] / dv, sol.omega[e]);
    cut.mass += edge_mass[e];
    if (!mesh.on_boundary(1, e)) max_w = std::max(max_w, std::abs(cut.weight[e]));
  }
  int interior = 0, support = 0;
  for (int e = 0; e < mesh.count(1); ++e) {
    if (mesh.on_boundary(1, e)) continue;
    ++interior;
    if (max_w > 0 && std::abs(cut.weight[e]) > 1e-3 * max_w) ++support;
  }
  cut.support_fraction = interior ? static_cast<double>(support) / interior : 0.0;

  std::vector<double> s(mesh.num_vertices(), 0.0);
  if (d == 2) {
    for (const auto& [v, x] : prob.boundary_cycle) s[v] += x;
  }
  for (int e = 0; e < mesh.count(1); ++e) {
    if (!mesh.on_boundary(1, e)) continue;
    const auto& ab = mesh.simplex(1, e);
    double expect = 0.0;
    if (d == 2) expect = -mesh.induced_orientation(e) * 0.5 * (s[ab[0]] + s[ab[1]]);
    cut.boundary_defect = std::max(cut.boundary_defect, std::abs(sol.omega[e] - expect));
  }
  if (mesh.count(1) <= 4000) {
    const auto h1 = homology_basis(mesh, ComplexKind::Absolute, 1);
    for (const auto& z : h1.generators) cut.periods.push_back(pair(sol.omega, z));
  }
  return cut;
}

double calibration_pairing(const LeastGradientProblem& prob, const std::vector<double>& calibration,
                           const std::vector<double>& omega) {
  const auto& mesh = *prob.mesh;
  const int d = mesh.dimension();
  double total = 0.0;
  std::vector<double> w(d);
  for (int t = 0; t < mesh.count(d); ++t) {
    cell_values(mesh, t, omega, w);
    double dotp = 0.0;
    for (int k = 0; k < d; ++k) dotp += calibration[static_cast<std::size_t>(t) * d + k] * w[k];
    total += mesh.volume(d, t) * dotp;
  }
  return total;
}

DualityReport duality_gap(const LeastGradientProblem& prob, const LeastGradientSolution& sol) {
  const auto& mesh = *prob.mesh;
  const int d = mesh.dimension();
  DualityReport rep;
  rep.mass = sol.mass;
  rep.pairing = calibration_pairing(prob, sol.calibration, sol.omega);
  rep.gap = rep.mass - rep.pairing;
  rep.relative_gap = rep.mass > 0 ? rep.gap / rep.mass : 0.0;
  for (int t = 0; t < mesh.count(d); ++t) {
    rep.gamma_sup = std::max(rep.gamma_sup, prob.norm->dual_value(mesh, t,
                                                                  std::span<const double>(sol.calibration.data() +
                                                                                              static_cast<std::size_t>(t) * d,
                                                                                          d)));
  }
  rep.divergence = sol.gamma.divergence_residual;
  return rep;
}

OracleResult exact_small_oracle(const LeastGradientProblem& prob, const OracleOptions& opts) {
  const auto& mesh = *prob.mesh;
  if (mesh.count(1) > 60) throw SolverError("exact_small_oracle: mesh has more than 60 edges");
  const Kernel ker(prob);
  const int d = ker.d;
  const int cells = mesh.count(d);
  std::vector<int> dof;
  const int n = prob.dof_map(dof);
  const bool euclid = ker.shape == EllipticIntegrand::Shape::Euclidean;

  // P(u) = sum_T vol_T |a_T + K_T u| in the transformed coordinates.
  const auto base = total_form(prob, initial_potential(prob));
  std::vector<Vec> a(cells);
  std::vector<Mat> k(cells);
  std::vector<double> vol(cells);
  for (int t = 0; t < cells; ++t) {
    vol[t] = mesh.volume(d, t);
    a[t] = ker.m[t] * local_values(mesh, t, base);
    Mat b = Mat::Zero(d, n);
    for (int j = 0; j < d; ++j) {
      const int v0 = dof[ker.vertex(t, 0)], vj = dof[ker.vertex(t, j + 1)];
      if (vj >= 0) b(j, vj) += 1.0;
      if (v0 >= 0) b(j, v0) -= 1.0;
    }
    k[t] = vol[t] * ker.m[t] * b;
  }
  auto norm = [&](const Vec& z) { return euclid ? z.norm() : z.lpNorm<1>(); };
  auto dual_norm = [&](const Vec& z) { return euclid ? z.norm() : z.lpNorm<Eigen::Infinity>(); };
  auto primal = [&](const Vec& u) {
    double s = 0.0;
    for (int t = 0; t < cells; ++t) s += vol[t] * norm(a[t] + k[t] * u / vol[t]);
    return s;
  };
  auto project_ball = [&](Vec& q) {
    if (euclid) {
      const double r = q.norm();
      if (r > 1.0) q /= r;
    } else {
      q = q.cwiseMax(-1.0).cwiseMin(1.0);
    }
  };

  // Dense K and the projector onto divergence-free duals.
  Mat kk(cells * d, n);
  for (int t = 0; t < cells; ++t) kk.block(t * d, 0, d, n) = k[t];
  Eigen::LDLT<Mat> normal;
  if (n > 0) normal.compute(kk.transpose() * kk);
  const double knorm = n > 0 ? std::sqrt((kk.transpose() * kk).eigenvalues().cwiseAbs().maxCoeff()) : 1.0;
  const double tau = 0.99 / knorm, sigma = 0.99 / knorm;

  auto certify = [&](const Vec& q) {
    Vec qq = q;
    if (n > 0) qq -= kk * normal.solve(kk.transpose() * q);
    double s = 0.0;
    for (int t = 0; t < cells; ++t) s = std::max(s, dual_norm(qq.segment(t * d, d)));
    if (s > 1.0) qq /= s;
    double dv = 0.0;
    for (int t = 0; t < cells; ++t) dv += vol[t] * qq.segment(t * d, d).dot(a[t]);
    return dv;
  };

  OracleResult res;
  res.value = primal(Vec::Zero(n));
  res.lower = -std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(opts.seed);
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    Vec u = Vec::Zero(n);
    if (r > 0) {
      for (int i = 0; i < n; ++i) u[i] = (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5);
    }
    Vec ubar = u, q = Vec::Zero(cells * d);
    Vec usum = Vec::Zero(n), qsum = Vec::Zero(cells * d);
    int count = 0;
    for (int it = 1; it <= opts.max_iterations; ++it) {
      const Vec ku = kk * ubar;
      for (int t = 0; t < cells; ++t) {
        Vec qt = q.segment(t * d, d) + sigma * (vol[t] * a[t] + ku.segment(t * d, d));
        project_ball(qt);
        q.segment(t * d, d) = qt;
      }
      const Vec unew = u - tau * (kk.transpose() * q);
      ubar = 2 * unew - u;
      u = unew;
      usum += u;
      qsum += q;
      ++count;
      ++res.iterations;
      if (it % 500 == 0 || it == opts.max_iterations) {
        for (const Vec* cand : {&u}) res.value = std::min(res.value, primal(*cand));
        res.value = std::min(res.value, primal(usum / count));
        res.lower = std::max({res.lower, certify(q), certify(qsum / count)});
        if (res.value - res.lower <= opts.tolerance * std::max(1.0, res.value)) break;
        if (it % 20000 == 0) {
          // Restart the ergodic averages from the current point.
          usum.setZero();
          qsum.setZero();
          count = 0;
        }
      }
    }
    if (res.value - res.lower <= opts.tolerance * std::max(1.0, res.value) && r > 0) break;
  }
  res.certified = res.value - res.lower <= opts.tolerance * std::max(1.0, res.value);
  return res;
}

}  // namespace homocut
