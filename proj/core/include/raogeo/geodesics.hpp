#pragma once

#include <string>
#include <vector>

#include "raogeo/expfam.hpp"
#include "raogeo/families.hpp"
#include "raogeo/fisher.hpp"

namespace raogeo {

/// Christoffel symbols of the first kind of the Fisher metric,
/// gamma[k](i, j) = 1/2 (d_j g_ik + d_i g_kj - d_k g_ij).
struct ChristoffelField {
  ParamPoint at;
  std::vector<Matrix> gamma;
  std::string method;  ///< "analytic" or "finite-difference"

  double operator()(int k, int i, int j) const { return gamma[k](i, j); }
  /// c_k = sum_ij gamma[k](i, j) v_i v_j.
  Vector contract(const Vector& v) const;
};

struct ChristoffelOptions {
  bool prefer_analytic = true;
  /// Base central-difference step, scaled by max(1, |theta_i|). Richardson
  /// extrapolation combines steps h and h/2.
  double step = 1e-3;
  bool richardson = true;
};

/// Throws DomainError when theta is too close to the boundary for the
/// difference stencil.
ChristoffelField christoffel(const Family& family, const ParamPoint& theta,
                             const ChristoffelOptions& opts = {});

struct GeodesicNode {
  double t = 0.0;
  Vector theta;
  Vector velocity;
};

struct GeodesicPath {
  std::string family;
  std::string chart;
  std::vector<GeodesicNode> nodes;
  double length = 0.0;
  double endpoint_residual = 0.0;
  std::string kind = "riemannian";
  /// Max over interior nodes of |second difference - ODE acceleration|.
  double ode_residual = 0.0;
  /// (max speed - min speed) / mean speed over the nodes.
  double speed_variation = 0.0;
  int newton_iterations = 0;

  /// sqrt(v^T I(theta) v) at every node.
  std::vector<double> speeds;
};

/// Integrates g theta'' + Gamma(theta', theta') = 0 on t in [0, 1] with
/// classical fixed-step RK4. Throws GeodesicExitError when the path leaves
/// the chart domain.
GeodesicPath geodesic_shoot(const Family& family, const ParamPoint& theta0,
                            const Vector& v0, int steps = 1000,
                            const ChristoffelOptions& copts = {});

struct ConnectOptions {
  int steps = 1000;
  double tol = 1e-10;  ///< on the endpoint residual
  int max_iter = 50;
  ChristoffelOptions christoffel{};
};

/// Shooting with damped Newton on the initial velocity. Throws SolverError
/// carrying the best endpoint residual when the tolerance is not met.
GeodesicPath geodesic_connect(const Family& family, const ParamPoint& theta1,
                              const ParamPoint& theta2,
                              const ConnectOptions& opts = {});

/// Length of the connecting geodesic.
double rao_distance_numeric(const Family& family, const ParamPoint& theta1,
                            const ParamPoint& theta2,
                            const ConnectOptions& opts = {});

/// Univariate normal Rao distance through the Poincare half-plane:
/// (mu, sigma) -> (mu / sqrt 2, sigma), standard hyperbolic distance
/// scaled by sqrt 2. Points may be in any Gaussian chart.
double rao_distance_gaussian_hyperbolic(const ParamPoint& theta1,
                                        const ParamPoint& theta2);

/// Distances with elementary closed forms: Poisson |2 sqrt(l2) - 2 sqrt(l1)|,
/// finite discrete 2 arccos(sum sqrt(p_i q_i)), and the Gaussian hyperbolic
/// form. Throws UsageError for other families.
double rao_distance_closed_form(const Family& family, const ParamPoint& theta1,
                                const ParamPoint& theta2);

/// (1 - lambda) theta1 + lambda theta2 in natural coordinates.
Vector e_geodesic(const ExpFamSpec& spec, const Vector& theta1,
                  const Vector& theta2, double lambda);
/// (1 - lambda) eta1 + lambda eta2 in expectation coordinates.
Vector m_geodesic(const ExpFamSpec& spec, const Vector& eta1,
                  const Vector& eta2, double lambda);

struct CosineRelation {
  double lhs = 0.0;  ///< D(p:q) + D(q:r) - D(p:r)
  double rhs = 0.0;  ///< (theta_p - theta_q)^T (eta_r - eta_q)
  double residual = 0.0;
};

/// D(p:q) = B_F(theta_p : theta_q); p, q, r are natural parameters.
CosineRelation cosine_relation(const ExpFamSpec& spec, const Vector& p,
                               const Vector& q, const Vector& r);
double cosine_residual(const ExpFamSpec& spec, const Vector& p,
                       const Vector& q, const Vector& r);

struct OrthogonalTriple {
  Vector p, q, r;  ///< natural parameters
};

/// p = q + t u along an e-direction, r with eta_r = eta_q + s I(q) w_perp
/// along an m-direction, where w_perp is w made orthogonal to u in the
/// Fisher inner product at q. Throws DomainError when p or r leave the domain.
OrthogonalTriple orthogonal_triple(const ExpFamSpec& spec, const Vector& q,
                                   const Vector& u, const Vector& w, double t,
                                   double s);

/// Squared distance (p - q)^T I (p - q) through the Cholesky factor,
/// |L^T p - L^T q|^2.
double tangent_embed(const MetricTensor& metric, const Vector& p, const Vector& q);
/// The same quantity as a direct quadratic form.
double tangent_quadratic_form(const MetricTensor& metric, const Vector& p,
                              const Vector& q);
/// L^T x for the Cholesky factor I = L L^T.
Vector tangent_coordinates(const MetricTensor& metric, const Vector& x);

}  // namespace raogeo
