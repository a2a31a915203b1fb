#pragma once

#include <Eigen/Dense>

#include "modhdr/unwrap.hpp"

namespace modhdr {

/// Dense brute-force reference for solve_dct: assembles the explicit
/// forward-difference operator A, forms the normal equations A^T A x =
/// A^T g, and pins the constant null space with a rank-one mean term so
/// the system is SPD. Intended for verification at small sizes only.
inline UnwrapSolution solve_dense_oracle(const WrappedGradient& g, Gauge gauge = Gauge::ZeroMean,
                                         double anchor_value = 0.0) {
  const int m = g.dh.height, n = g.dh.width;
  if (m < 2 || n < 2) throw InvalidArgument("solve_dense_oracle: image must be at least 2x2");
  if (!g.dh.same_shape(g.dv)) throw InvalidArgument("solve_dense_oracle: dh/dv shape mismatch");
  const long pix = static_cast<long>(m) * n;
  if (pix > 4096) throw InvalidArgument("solve_dense_oracle: image larger than 4096 pixels");

  const long rows = static_cast<long>(m) * (n - 1) + static_cast<long>(m - 1) * n;
  auto idx = [n](int i, int j) { return static_cast<long>(i) * n + j; };

  UnwrapSolution sol;
  sol.gauge = gauge;
  sol.anchor_value = anchor_value;
  sol.image = Image(m, n, g.dh.channels);
  double res = 0.0;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, pix);
  {
    long r = 0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j + 1 < n; ++j, ++r) {
        a(r, idx(i, j + 1)) = 1.0;
        a(r, idx(i, j)) = -1.0;
      }
    for (int i = 0; i + 1 < m; ++i)
      for (int j = 0; j < n; ++j, ++r) {
        a(r, idx(i + 1, j)) = 1.0;
        a(r, idx(i, j)) = -1.0;
      }
  }
  // A^T g is orthogonal to the constant vector, so adding ones/pix to
  // A^T A leaves the zero-mean minimizer as the unique SPD solution.
  Eigen::MatrixXd normal =
      a.transpose() * a + Eigen::MatrixXd::Constant(pix, pix, 1.0 / static_cast<double>(pix));
  Eigen::LLT<Eigen::MatrixXd> llt(normal);

  for (int c = 0; c < g.dh.channels; ++c) {
    Eigen::VectorXd b(rows);
    long r = 0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j + 1 < n; ++j, ++r) b(r) = g.dh.at(c, i, j);
    for (int i = 0; i + 1 < m; ++i)
      for (int j = 0; j < n; ++j, ++r) b(r) = g.dv.at(c, i, j);

    Eigen::VectorXd x = llt.solve(a.transpose() * b);
    auto p = sol.image.plane(c);
    for (long k = 0; k < pix; ++k) p[static_cast<std::size_t>(k)] = x(k);
    res += detail::gradient_residual(sol.image, g.dh, g.dv, c);
  }
  sol.residual_norm = std::sqrt(res);
  detail::apply_gauge(sol.image, gauge, anchor_value);
  return sol;
}

}  // namespace modhdr
