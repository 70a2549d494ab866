#include "arrival/quadrature.hpp"

#include <Eigen/Eigenvalues>

namespace arrival::quad {

Eigen::ArrayXd cumulative(const Eigen::Ref<const Eigen::ArrayXd>& values, const UniformGrid& grid) {
  const auto n = grid.size();
  if (values.size() != n) throw Error(ErrorKind::invalid_input, "sample count does not match grid");
  const double h = grid.step() / 24.0;
  Eigen::ArrayXd out(n);
  out[0] = 0.0;
  // end cells use the one-sided cubic through the first/last four nodes
  out[1] = h * (9.0 * values[0] + 19.0 * values[1] - 5.0 * values[2] + values[3]);
  for (Eigen::Index i = 1; i + 2 < n; ++i)
    out[i + 1] = out[i] + h * (-values[i - 1] + 13.0 * values[i] + 13.0 * values[i + 1] - values[i + 2]);
  out[n - 1] = out[n - 2] +
               h * (values[n - 4] - 5.0 * values[n - 3] + 19.0 * values[n - 2] + 9.0 * values[n - 1]);
  return out;
}

GaussRule gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorKind::invalid_input, "Gauss rule needs at least one node");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    jacobi(i, i - 1) = b;
    jacobi(i - 1, i) = b;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  GaussRule rule;
  rule.nodes = eig.eigenvalues().array();
  rule.weights = 2.0 * eig.eigenvectors().row(0).array().square().transpose();
  return rule;
}

}  // namespace arrival::quad
