#pragma once

#include <functional>
#include <optional>

#include "inertia_hd/linalg_problems.hpp"
#include "inertia_hd/types.hpp"

namespace inertia_hd {

/// prox(x, step) for some convex f.
using ProxOracle = std::function<Vector(const Vector&, double)>;
using ValueOracle = std::function<double(const Vector&)>;

struct MoreauParams {
  double theta = 1.0;
  double lambda = 1.0;

  void validate() const;
};

/// Componentwise soft threshold sign(x_i) max(|x_i| - tau, 0).
Vector prox_l1(const Vector& x, double tau);

/// Soft-thresholds the singular values of X.
Matrix prox_nuclear(const Matrix& X, double tau);

/// Solves (I + lambda Q) z = x + lambda c.
Vector prox_smooth_quadratic(const Matrix& Q, const Vector& c, const Vector& x, double lambda);

// Moreau envelope f_theta through the prox of f:
//   f_theta(x)          = f(p) + |x - p|^2 / (2 theta),  p = prox_{theta f}(x)
//   grad f_theta(x)     = (x - p) / theta
//   prox_{lambda f_theta}(x) = theta/(lambda+theta) x + lambda/(lambda+theta) prox_{(lambda+theta) f}(x)
double moreau_value(const ProxOracle& f_prox, const ValueOracle& f_value, const Vector& x,
                    double theta);
Vector moreau_gradient(const ProxOracle& f_prox, const Vector& x, double theta);
Vector prox_of_envelope(const ProxOracle& f_prox, const Vector& x, double lambda, double theta);

/// The envelope f_theta packaged as a smooth Objective (gradient is
/// 1/theta-Lipschitz, minimizers and minimum value carried over from f).
Objective make_moreau_envelope(const Objective& f, double theta);

/// prox_{step g}(x) for the instance's regularizer g.
Vector prox_regularizer(const RLSInstance& inst, const Vector& x, double step);

/// Regularized least squares together with the metric M = I/lambda - A'A.
class MetricRLS {
 public:
  /// `lambda` defaults to the instance's lambda_metric. Throws InputError
  /// unless 0 < lambda |A|^2 < 1.
  explicit MetricRLS(RLSInstance inst, std::optional<double> lambda = std::nullopt);

  const RLSInstance& instance() const { return inst_; }
  double lambda() const { return lambda_; }
  Index dimension() const { return inst_.n(); }

  /// v'Mv = |v|^2 / lambda - |Av|^2
  double metric_sq_norm(const Vector& v) const;
  double metric_inner(const Vector& u, const Vector& v) const;
  /// Dense M, for small instances and tests.
  Matrix metric() const;

 private:
  RLSInstance inst_;
  double lambda_;
};

/// prox^M_f(x) = prox_{lambda g}(x + lambda A'(b - Ax))
Vector prox_metric_rls(const MetricRLS& mr, const Vector& x);

/// grad f_M(x) = x - prox^M_f(x), the gradient of f_M in the M inner product.
Vector grad_metric_rls(const MetricRLS& mr, const Vector& x);

/// f_M(x) = f(p) + 1/2 |x - p|_M^2 with p = prox^M_f(x).
double envelope_value_metric(const MetricRLS& mr, const Vector& x);

/// f_M as an Objective whose `gradient` is the M-gradient; its Lipschitz
/// constant in the M norm is one.
Objective make_metric_envelope(const MetricRLS& mr);

}  // namespace inertia_hd
