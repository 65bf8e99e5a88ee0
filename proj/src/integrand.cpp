#include "homocut/integrand.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace homocut {

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

Mat cell_transform(const EllipticIntegrand& phi, const SimplicialMesh& mesh, int cell) {
  const int d = mesh.dimension();
  Mat m(d, d);
  phi.transform(mesh, cell, std::span<double>(m.data(), static_cast<std::size_t>(d * d)));
  return m;
}

class Riemannian final : public EllipticIntegrand {
 public:
  std::string name() const override { return "riemannian"; }
  Shape shape() const override { return Shape::Euclidean; }
  void transform(const SimplicialMesh& mesh, int cell, std::span<double> out) const override {
    const int d = mesh.dimension();
    auto g = mesh.inverse_gram(cell);
    Mat a = Eigen::Map<const Mat>(g.data(), d, d);
    Eigen::LLT<Mat> llt(a);
    Mat m = llt.matrixL().transpose();
    std::copy(m.data(), m.data() + d * d, out.begin());
  }
};

class L1 final : public EllipticIntegrand {
 public:
  std::string name() const override { return "l1"; }
  Shape shape() const override { return Shape::Octahedral; }
  void transform(const SimplicialMesh& mesh, int cell, std::span<double> out) const override {
    const int d = mesh.dimension();
    std::fill(out.begin(), out.end(), 0.0);
    auto edges = mesh.cell_edges(cell);
    for (int k = 0; k < d; ++k) out[k * d + k] = 1.0 / mesh.edge_length(edges[k]);
  }
};

double unit_random(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::string show(std::span<const double> v) {
  std::ostringstream os;
  os.precision(6);
  os << "[";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << "]";
  return os.str();
}

}  // namespace

double EllipticIntegrand::value(const SimplicialMesh& mesh, int cell, std::span<const double> w) const {
  const int d = mesh.dimension();
  const Vec z = cell_transform(*this, mesh, cell) * Eigen::Map<const Vec>(w.data(), d);
  return shape() == Shape::Euclidean ? z.norm() : z.lpNorm<1>();
}

double EllipticIntegrand::dual_value(const SimplicialMesh& mesh, int cell, std::span<const double> y) const {
  const int d = mesh.dimension();
  const Mat m = cell_transform(*this, mesh, cell);
  const Vec x = m.transpose().partialPivLu().solve(Eigen::Map<const Vec>(y.data(), d));
  return shape() == Shape::Euclidean ? x.norm() : x.lpNorm<Eigen::Infinity>();
}

double EllipticIntegrand::smoothed(const SimplicialMesh& mesh, int cell, std::span<const double> w, double eps,
                                   std::span<double> grad, std::span<double> hess) const {
  const int d = mesh.dimension();
  const Mat m = cell_transform(*this, mesh, cell);
  const Vec z = m * Eigen::Map<const Vec>(w.data(), d);
  double phi = 0.0;
  Vec gz(d);
  Mat hz = Mat::Zero(d, d);
  if (shape() == Shape::Euclidean) {
    phi = std::sqrt(z.squaredNorm() + eps * eps);
    gz = z / phi;
    hz = (Mat::Identity(d, d) - gz * gz.transpose()) / phi;
  } else {
    for (int k = 0; k < d; ++k) {
      const double s = std::sqrt(z[k] * z[k] + eps * eps);
      phi += s;
      gz[k] = z[k] / s;
      hz(k, k) = eps * eps / (s * s * s);
    }
  }
  Eigen::Map<Vec>(grad.data(), d) = m.transpose() * gz;
  Eigen::Map<Mat>(hess.data(), d, d) = m.transpose() * hz * m;
  return phi;
}

std::shared_ptr<const EllipticIntegrand> riemannian_integrand() {
  static const auto instance = std::make_shared<const Riemannian>();
  return instance;
}

std::shared_ptr<const EllipticIntegrand> l1_integrand() {
  static const auto instance = std::make_shared<const L1>();
  return instance;
}

std::shared_ptr<const EllipticIntegrand> integrand_by_name(const std::string& name) {
  if (name == "riemannian") return riemannian_integrand();
  if (name == "l1") return l1_integrand();
  throw std::invalid_argument("unknown norm '" + name + "' (expected riemannian or l1)");
}

IntegrandReport validate_integrand(const std::function<double(std::span<const double>)>& phi, int dim, int n,
                                   std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("validate_integrand: need at least one sample");
  std::mt19937_64 rng(seed);
  IntegrandReport rep;
  rep.samples = n;
  auto fail = [&](const std::string& axiom, const std::string& witness) {
    rep.passed = false;
    for (const auto& f : rep.failures) {
      if (f.axiom == axiom) return;
    }
    rep.failures.push_back({axiom, witness});
  };
  auto sample = [&] {
    std::vector<double> v(dim);
    const double scale = std::pow(10.0, 6.0 * unit_random(rng) - 3.0);
    for (auto& x : v) x = scale * (2.0 * unit_random(rng) - 1.0);
    return v;
  };
  const std::vector<double> zero(dim, 0.0);
  if (std::abs(phi(zero)) > 0.0) fail("definiteness", "phi(0) = " + std::to_string(phi(zero)));

  for (int i = 0; i < n; ++i) {
    const auto a = sample();
    const auto b = sample();
    const double pa = phi(a), pb = phi(b);
    if (pa < 0) fail("positivity", "phi(" + show(a) + ") = " + std::to_string(pa));
    if (!(pa > 0)) fail("definiteness", "phi(" + show(a) + ") = 0 for a nonzero a");

    for (double t : {2.0, -1.0, 0.5, 20.0 * unit_random(rng) - 10.0}) {
      std::vector<double> ta(a);
      for (auto& x : ta) x *= t;
      const double lhs = phi(ta), rhs = std::abs(t) * pa;
      if (std::abs(lhs - rhs) > 1e-9 * std::max(1.0, std::abs(rhs))) {
        std::ostringstream os;
        os << "t=" << t << ", a=" << show(a) << ": phi(t a)=" << lhs << " but |t| phi(a)=" << rhs;
        fail("homogeneity", os.str());
      }
    }

    std::vector<double> ab(a);
    for (int k = 0; k < dim; ++k) ab[k] += b[k];
    const double pab = phi(ab);
    if (pab > (pa + pb) * (1.0 + 1e-12) + 1e-300) {
      std::ostringstream os;
      os << "a=" << show(a) << ", b=" << show(b) << ": phi(a+b)=" << pab << " > " << pa + pb;
      fail("subadditivity", os.str());
    }
  }
  return rep;
}

IntegrandReport validate_integrand(const EllipticIntegrand& phi, const SimplicialMesh& mesh, int n,
                                   std::uint64_t seed) {
  int cell = 0;
  auto fn = [&](std::span<const double> w) {
    const double v = phi.value(mesh, cell, w);
    return v;
  };
  IntegrandReport total;
  total.samples = 0;
  const int cells = mesh.count(mesh.dimension());
  const int per_cell = std::max(1, n / std::max(1, std::min(cells, n)));
  for (cell = 0; cell < cells && total.samples < n; ++cell) {
    auto rep = validate_integrand(fn, mesh.dimension(), per_cell, seed + static_cast<std::uint64_t>(cell));
    total.samples += rep.samples;
    if (!rep.passed) {
      total.passed = false;
      for (auto& f : rep.failures) {
        f.witness = "cell " + std::to_string(cell) + ": " + f.witness;
        total.failures.push_back(f);
      }
    }
  }
  return total;
}

}  // namespace homocut
