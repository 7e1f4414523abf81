#pragma once

#include <Eigen/Dense>
#include <string>

namespace raogeo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point of a parameter space expressed in a named coordinate chart.
struct ParamPoint {
  Vector coords;
  std::string chart;

  int dim() const { return static_cast<int>(coords.size()); }
};

inline Vector make_vector(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

}  // namespace raogeo
