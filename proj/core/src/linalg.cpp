#include "raogeo/linalg.hpp"

#include <cmath>

#include "raogeo/error.hpp"

namespace raogeo {

double max_asymmetry(const Matrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return max_asymmetry(m) <= tol * scale;
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

std::pair<double, double> eigen_range(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric,
                                               Eigen::EigenvaluesOnly);
  const Vector& ev = solver.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

Matrix spd_inverse(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success)
    throw DefinitenessError("matrix is not positive definite", 0.0);
  return llt.solve(Matrix::Identity(m.rows(), m.cols()));
}

}  // namespace raogeo
