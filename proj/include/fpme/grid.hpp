// Copyright (c) 2026 The FPME Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <type_traits>
#include <vector>

#include "fpme/errors.hpp"
#include "fpme/numeric.hpp"

namespace fpme {

enum class Geometry { Interval, Rectangle };

/// Uniform interior grid on (0,1)^d with homogeneous Dirichlet data.
/// Boundary nodes are not stored: values there are identically zero, which
/// makes the trapezoid rule collapse to weight h^d per interior node.
struct DomainSpec {
  Geometry geometry = Geometry::Interval;
  int n_interior = 0;  // nodes per axis

  DomainSpec() = default;
  DomainSpec(Geometry g, int n) : geometry(g), n_interior(n) {
    if (n < 1) throw ConfigError("DomainSpec: n_interior must be positive");
  }

  int dim() const { return geometry == Geometry::Interval ? 1 : 2; }
  double h() const { return 1.0 / (n_interior + 1); }
  double quad_weight() const { return std::pow(h(), dim()); }
  std::size_t node_count() const {
    return geometry == Geometry::Interval
               ? static_cast<std::size_t>(n_interior)
               : static_cast<std::size_t>(n_interior) * n_interior;
  }

  /// Coordinates of flattened node index (row-major: idx = ix + n*iy).
  double x_of(std::size_t idx) const {
    if (geometry == Geometry::Interval) return (static_cast<double>(idx) + 1.0) * h();
    return (static_cast<double>(idx % n_interior) + 1.0) * h();
  }
  double y_of(std::size_t idx) const {
    if (geometry == Geometry::Interval) return 0.0;
    return (static_cast<double>(idx / n_interior) + 1.0) * h();
  }

  double dist_to_boundary(std::size_t idx) const {
    const double x = x_of(idx);
    double d = std::min(x, 1.0 - x);
    if (geometry == Geometry::Rectangle) {
      const double y = y_of(idx);
      d = std::min({d, y, 1.0 - y});
    }
    return d;
  }

  bool operator==(const DomainSpec& o) const {
    return geometry == o.geometry && n_interior == o.n_interior;
  }
};

/// Nodal values on the interior grid; value semantics throughout.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(DomainSpec domain, Eigen::VectorXd values)
      : domain_(domain), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.size()) != domain_.node_count())
      throw UsageError("GridFunction: value count does not match domain");
  }
  static GridFunction zero(DomainSpec domain) {
    return GridFunction(domain, Eigen::VectorXd::Zero(domain.node_count()));
  }
  static GridFunction constant(DomainSpec domain, double c) {
    return GridFunction(domain, Eigen::VectorXd::Constant(domain.node_count(), c));
  }
  template <typename F>
  static GridFunction sample(DomainSpec domain, F&& f) {
    Eigen::VectorXd v(domain.node_count());
    for (std::size_t i = 0; i < domain.node_count(); ++i) {
      if constexpr (std::is_invocable_v<F&, double, double>)
        v[static_cast<Eigen::Index>(i)] = f(domain.x_of(i), domain.y_of(i));
      else
        v[static_cast<Eigen::Index>(i)] = f(domain.x_of(i));
    }
    return GridFunction(domain, std::move(v));
  }

  const DomainSpec& domain() const { return domain_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
  double& operator[](std::size_t i) { return values_[static_cast<Eigen::Index>(i)]; }

  /// Quadrature integral h^d * sum(values), pairwise order.
  double integral() const {
    std::vector<double> tmp(values_.data(), values_.data() + values_.size());
    return domain_.quad_weight() * pairwise_sum(tmp);
  }

  double sup_norm() const { return values_.size() ? values_.cwiseAbs().maxCoeff() : 0.0; }

  double lp_norm(double p) const {
    std::vector<double> tmp(size());
    for (std::size_t i = 0; i < size(); ++i) tmp[i] = std::pow(std::abs((*this)[i]), p);
    return std::pow(domain_.quad_weight() * pairwise_sum(tmp), 1.0 / p);
  }
  double l2_norm() const { return lp_norm(2.0); }
  double l1_norm() const { return lp_norm(1.0); }

  GridFunction& operator+=(const GridFunction& o) {
    check(o);
    values_ += o.values_;
    return *this;
  }
  GridFunction& operator-=(const GridFunction& o) {
    check(o);
    values_ -= o.values_;
    return *this;
  }
  GridFunction& operator*=(double c) {
    values_ *= c;
    return *this;
  }
  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(double c, GridFunction a) { return a *= c; }

  template <typename F>
  GridFunction map(F&& f) const {
    GridFunction out = *this;
    for (std::size_t i = 0; i < size(); ++i) out[i] = f((*this)[i]);
    return out;
  }

 private:
  void check(const GridFunction& o) const {
    if (!(domain_ == o.domain())) throw UsageError("GridFunction: domain mismatch");
  }
  DomainSpec domain_;
  Eigen::VectorXd values_;
};

/// Quadrature inner product h^d * sum(f*g), pairwise order.
inline double quad_inner(const GridFunction& f, const GridFunction& g) {
  if (!(f.domain() == g.domain())) throw UsageError("quad_inner: domain mismatch");
  std::vector<double> tmp(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) tmp[i] = f[i] * g[i];
  return f.domain().quad_weight() * pairwise_sum(tmp);
}

}  // namespace fpme
