#pragma once

#include <memory>
#include <span>
#include <string>

#include "raogeo/quadrature.hpp"
#include "raogeo/types.hpp"

namespace raogeo {

/// Canonical exponential family p_theta(x) = exp(theta^T t(x) - F(theta) + k(x))
/// on a one-dimensional sample space.
class ExpFamSpec {
 public:
  virtual ~ExpFamSpec() = default;

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }

  virtual Vector sufficient_statistic(double x) const = 0;
  virtual double carrier(double x) const = 0;
  virtual bool in_support(double x) const = 0;

  virtual double cumulant(const Vector& theta) const = 0;
  virtual Vector cumulant_gradient(const Vector& theta) const = 0;
  virtual Matrix cumulant_hessian(const Vector& theta) const = 0;

  virtual bool in_natural_domain(const Vector& theta) const = 0;
  /// Interior of the range of the cumulant gradient.
  virtual bool in_expectation_range(const Vector& eta) const = 0;
  /// Starting point for the Newton inversion of the gradient.
  virtual Vector newton_start() const = 0;

  /// log of the integral/sum of exp(theta^T t(x) + k(x)), evaluated
  /// numerically rather than from the closed-form cumulant.
  virtual double log_partition_numeric(const Vector& theta,
                                       const QuadratureOptions& opts = {}) const = 0;

 protected:
  ExpFamSpec(std::string name, int dim) : name_(std::move(name)), dim_(dim) {}

 private:
  std::string name_;
  int dim_;
};

using ExpFamPtr = std::shared_ptr<const ExpFamSpec>;

/// t(x) = x, k(x) = -log x!, F(theta) = exp(theta).
ExpFamPtr make_poisson_expfam();
/// t(x) = (x, x^2), k(x) = 0,
/// F(theta) = -theta_1^2 / (4 theta_2) + 1/2 log(-pi / theta_2), theta_2 < 0.
ExpFamPtr make_gaussian_expfam();
/// Categorical on {1..m}: t_i(x) = [x = i] for i < m, k = 0,
/// F(theta) = log(1 + sum exp(theta_i)).
ExpFamPtr make_categorical_expfam(int m);
/// F(theta) = theta^T theta / 2 in dimension d. For d = 1 this is the
/// unit-variance normal location family (t(x) = x,
/// k(x) = -x^2/2 - log(2 pi)/2); for d > 1 the sample-space functions throw.
ExpFamPtr make_self_dual_expfam(int d);
/// "poisson", "gaussian1d", "discrete:m", "selfdual:d".
ExpFamPtr make_expfam(const std::string& name);

struct NewtonOptions {
  double tol = 1e-12;  ///< on |grad F(theta) - eta| relative to max(1, |eta|)
  int max_iter = 100;
};

/// Natural and expectation coordinates of one member; eta = grad F(theta)
/// to 1e-10 (relative).
struct DualPoint {
  Vector theta;
  Vector eta;
};

DualPoint make_dual_point(const ExpFamSpec& spec, const Vector& theta);

/// grad F(theta).
Vector to_expectation(const ExpFamSpec& spec, const Vector& theta);
/// (grad F)^-1(eta) by damped Newton with backtracking.
/// Throws DomainError when eta is outside the gradient range and
/// SolverError (carrying the residual) on non-convergence.
Vector to_natural(const ExpFamSpec& spec, const Vector& eta,
                  const NewtonOptions& opts = {});
/// F*(eta) = eta^T theta - F(theta) with theta = (grad F)^-1(eta).
double legendre_conjugate(const ExpFamSpec& spec, const Vector& eta,
                          const NewtonOptions& opts = {});
/// Hessian of F* by Richardson-extrapolated central differences of the
/// Newton inverse gradient.
Matrix conjugate_hessian(const ExpFamSpec& spec, const Vector& eta,
                         const NewtonOptions& opts = {});

/// B_F(theta2 : theta1) = F(theta2) - F(theta1) - (theta2 - theta1)^T grad F(theta1).
double bregman(const ExpFamSpec& spec, const Vector& theta2, const Vector& theta1);
/// F(theta2) + F*(eta1) - theta2^T eta1.
double bregman_mixed(const ExpFamSpec& spec, const Vector& theta2,
                     const Vector& eta1, const NewtonOptions& opts = {});
/// B_F*(eta1 : eta2).
double bregman_dual(const ExpFamSpec& spec, const Vector& eta1,
                    const Vector& eta2, const NewtonOptions& opts = {});

/// KL(p_theta1 : p_theta2) as B_F(theta2 : theta1).
double kl_via_bregman(const ExpFamSpec& spec, const Vector& theta1,
                      const Vector& theta2);

/// Maximum-likelihood estimate: eta = mean of t(x_i) (exactly), theta by
/// inverting the gradient. Throws BoundaryError when the mean statistic is
/// not in the interior of the gradient range.
DualPoint mle(const ExpFamSpec& spec, std::span<const double> points,
              const NewtonOptions& opts = {});

/// log p_theta(x) from the canonical form.
double log_density(const ExpFamSpec& spec, const Vector& theta, double x);

struct BregmanFormCheck {
  double lhs = 0.0;  ///< theta^T t(x) - F(theta) + k(x)
  double rhs = 0.0;  ///< -B_F*(t(x) : eta) + F*(t(x)) + k(x)
  double residual = 0.0;
  /// t(x) lay on the boundary of the gradient range, where F* may diverge;
  /// rhs then uses the limit -B_F*(t : eta) + F*(t) = F*(eta) + (t - eta)^T theta.
  bool limit_form = false;
};

BregmanFormCheck log_density_bregman_form(const ExpFamSpec& spec,
                                          const Vector& theta, double x,
                                          const NewtonOptions& opts = {});

}  // namespace raogeo
