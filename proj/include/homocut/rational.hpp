#pragma once

#include <gmpxx.h>

#include <cmath>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace homocut {

using Rational = mpq_class;

/// Sparse vector over a field, sorted by index, no stored zeros.
template <class T>
using SparseVec = std::vector<std::pair<int, T>>;

template <class T>
struct FieldTraits;

template <>
struct FieldTraits<Rational> {
  static bool is_zero(const Rational& x) { return sgn(x) == 0; }
  static double to_double(const Rational& x) { return x.get_d(); }
};

template <>
struct FieldTraits<double> {
  static constexpr double eps = 1e-11;
  static bool is_zero(double x) { return std::abs(x) < eps; }
  static double to_double(double x) { return x; }
};

/// a + s * b
template <class T>
SparseVec<T> axpy(const SparseVec<T>& a, const T& s, const SparseVec<T>& b) {
  SparseVec<T> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      T v = s * b[j].second;
      if (!FieldTraits<T>::is_zero(v)) out.emplace_back(b[j].first, std::move(v));
      ++j;
    } else {
      T v = a[i].second + s * b[j].second;
      if (!FieldTraits<T>::is_zero(v)) out.emplace_back(a[i].first, std::move(v));
      ++i;
      ++j;
    }
  }
  return out;
}

template <class T>
SparseVec<T> scaled(const SparseVec<T>& a, const T& s) {
  SparseVec<T> out;
  if (FieldTraits<T>::is_zero(s)) return out;
  out.reserve(a.size());
  for (const auto& [i, v] : a) out.emplace_back(i, v * s);
  return out;
}

template <class T>
T dot(const SparseVec<T>& a, const SparseVec<T>& b) {
  T acc = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first) {
      ++i;
    } else if (b[j].first < a[i].first) {
      ++j;
    } else {
      acc += a[i].second * b[j].second;
      ++i;
      ++j;
    }
  }
  return acc;
}

template <class T>
SparseVec<T> unit(int i) {
  return {{i, T(1)}};
}

/// Incremental column-echelon basis with pivot = largest nonzero index.
///
/// Every stored vector carries a "tag" vector: a sparse record of which
/// tracked generators it stands for. Reducing a vector returns the residual
/// together with the accumulated tags, so that
///   v = residual + sum(stored multiples),  tags(v) = accumulated tags.
template <class T>
class EchelonBasis {
 public:
  struct Reduced {
    SparseVec<T> residual;
    SparseVec<T> tags;
  };

  Reduced reduce(SparseVec<T> v) const {
    SparseVec<T> tags;
    while (!v.empty()) {
      auto it = rows_.find(v.back().first);
      if (it == rows_.end()) break;
      const auto& [bv, bt] = it->second;
      const T lambda = v.back().second / bv.back().second;
      v = axpy(v, T(-lambda), bv);
      if (!bt.empty()) tags = axpy(tags, lambda, bt);
    }
    return {std::move(v), std::move(tags)};
  }

  /// Inserts a nonzero residual (as returned by reduce) with its tags.
  void insert(SparseVec<T> residual, SparseVec<T> tags) {
    const int pivot = residual.back().first;
    rows_.emplace(pivot, std::make_pair(std::move(residual), std::move(tags)));
  }

  /// Reduces and inserts; returns true if the vector was independent.
  bool add(SparseVec<T> v, SparseVec<T> tags = {}) {
    auto r = reduce(std::move(v));
    if (r.residual.empty()) return false;
    insert(std::move(r.residual), axpy(tags, T(-1), r.tags));
    return true;
  }

  std::size_t rank() const { return rows_.size(); }

 private:
  std::map<int, std::pair<SparseVec<T>, SparseVec<T>>> rows_;
};

/// Solves x^T A = b for square A over the rationals; nullopt if singular.
std::optional<std::vector<Rational>> solve_left(const std::vector<std::vector<Rational>>& a,
                                                const std::vector<Rational>& b);

}  // namespace homocut
