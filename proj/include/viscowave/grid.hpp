#pragma once

#include <Eigen/Dense>

namespace viscowave {

using Vector = Eigen::VectorXd;

/// Uniform grid on (0, L) with nodes x_i = i*h, i = 0..cells. Fluxes and
/// flux coefficients live at the cell midpoints x_{i+1/2}.
struct Grid {
  double length = 1.0;
  int cells = 16;

  double spacing() const { return length / cells; }
  int node_count() const { return cells + 1; }

  Vector nodes() const { return Vector::LinSpaced(cells + 1, 0.0, length); }
  Vector midpoints() const {
    const double h = spacing();
    return Vector::LinSpaced(cells, 0.5 * h, length - 0.5 * h);
  }
};

/// Midpoint gradient (u_{i+1} - u_i)/h of a nodal vector.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> gradient(
    const Eigen::MatrixBase<Derived>& u, typename Derived::Scalar h) {
  const Eigen::Index n = u.size() - 1;
  return (u.tail(n) - u.head(n)) / h;
}

/// Nodal divergence (q_{i+1/2} - q_{i-1/2})/h of a midpoint flux. Boundary
/// entries are zero (Dirichlet nodes carry no equation).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> divergence(
    const Eigen::MatrixBase<Derived>& flux, typename Derived::Scalar h) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index cells = flux.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out =
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(cells + 1);
  out.segment(1, cells - 1) = (flux.tail(cells - 1) - flux.head(cells - 1)) / h;
  return out;
}

/// Flux-form stencil for div(c grad u):
///   (c_{i+1/2}(u_{i+1}-u_i) - c_{i-1/2}(u_i-u_{i-1})) / h^2.
template <typename DerivedU, typename DerivedC>
Eigen::Matrix<typename DerivedU::Scalar, Eigen::Dynamic, 1> apply_div_grad(
    const Eigen::MatrixBase<DerivedU>& u, const Eigen::MatrixBase<DerivedC>& coeff,
    typename DerivedU::Scalar h) {
  return divergence(coeff.cwiseProduct(gradient(u, h)), h);
}

/// Composite trapezoid inner product of nodal vectors.
template <typename D1, typename D2>
typename D1::Scalar nodal_dot(const Eigen::MatrixBase<D1>& u, const Eigen::MatrixBase<D2>& v,
                              typename D1::Scalar h) {
  const Eigen::Index n = u.size();
  return h * (u.segment(1, n - 2).dot(v.segment(1, n - 2)) +
              0.5 * (u(0) * v(0) + u(n - 1) * v(n - 1)));
}

/// Midpoint-rule weighted inner product h * sum_i w_{i+1/2} g_i q_i.
template <typename D1, typename D2, typename DW>
typename D1::Scalar midpoint_dot(const Eigen::MatrixBase<D1>& g, const Eigen::MatrixBase<D2>& q,
                                 const Eigen::MatrixBase<DW>& weight,
                                 typename D1::Scalar h) {
  return h * (g.array() * q.array() * weight.array()).sum();
}

}  // namespace viscowave
