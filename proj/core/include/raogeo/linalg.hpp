#pragma once

#include "raogeo/types.hpp"

namespace raogeo {

bool is_symmetric(const Matrix& m, double tol = 1e-12);
double max_asymmetry(const Matrix& m);
Matrix symmetrized(const Matrix& m);
/// Smallest and largest eigenvalues of a symmetric matrix.
std::pair<double, double> eigen_range(const Matrix& symmetric);
/// Inverse of a symmetric positive definite matrix via Cholesky; throws
/// DefinitenessError on failure.
Matrix spd_inverse(const Matrix& m);

}  // namespace raogeo
