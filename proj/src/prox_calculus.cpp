#include "inertia_hd/prox_calculus.hpp"

#include <cmath>
#include <string>

#include "inertia_hd/errors.hpp"

namespace inertia_hd {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0)) throw InputError(std::string(name) + " must be positive");
}

}  // namespace

void MoreauParams::validate() const {
  require_positive(theta, "theta");
  require_positive(lambda, "lambda");
}

Vector prox_l1(const Vector& x, double tau) {
  require_positive(tau, "soft-threshold level");
  return (x.array().sign() * (x.array().abs() - tau).max(0.0)).matrix();
}

Matrix prox_nuclear(const Matrix& X, double tau) {
  require_positive(tau, "singular-value threshold");
  if (X.size() == 0) return X;
  Eigen::BDCSVD<Matrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericError("SVD failed in nuclear-norm prox");
  const Vector shrunk = (svd.singularValues().array() - tau).max(0.0).matrix();
  return svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose();
}

Vector prox_smooth_quadratic(const Matrix& Q, const Vector& c, const Vector& x, double lambda) {
  require_positive(lambda, "prox step");
  if (Q.rows() != Q.cols() || Q.cols() != x.size() || c.size() != x.size()) {
    throw InputError("quadratic prox: dimension mismatch");
  }
  Matrix sys = Matrix::Identity(Q.rows(), Q.cols()) + lambda * Q;
  Eigen::LLT<Matrix> llt(sys);
  if (llt.info() != Eigen::Success) throw NumericError("quadratic prox: I + lambda Q is singular");
  return llt.solve(x + lambda * c);
}

double moreau_value(const ProxOracle& f_prox, const ValueOracle& f_value, const Vector& x,
                    double theta) {
  require_positive(theta, "theta");
  const Vector p = f_prox(x, theta);
  return f_value(p) + (x - p).squaredNorm() / (2.0 * theta);
}

Vector moreau_gradient(const ProxOracle& f_prox, const Vector& x, double theta) {
  require_positive(theta, "theta");
  return (x - f_prox(x, theta)) / theta;
}

Vector prox_of_envelope(const ProxOracle& f_prox, const Vector& x, double lambda, double theta) {
  require_positive(lambda, "lambda");
  require_positive(theta, "theta");
  const double sum = lambda + theta;
  return (theta / sum) * x + (lambda / sum) * f_prox(x, sum);
}

Objective make_moreau_envelope(const Objective& f, double theta) {
  require_positive(theta, "theta");
  if (!f.has_prox()) throw CapabilityError("Moreau envelope needs a prox oracle");
  Objective env;
  env.dimension = f.dimension;
  const ProxOracle prox = f.prox;
  const ValueOracle value = f.value;
  env.value = [prox, value, theta](const Vector& x) { return moreau_value(prox, value, x, theta); };
  env.gradient = [prox, theta](const Vector& x) { return moreau_gradient(prox, x, theta); };
  env.prox = [prox, theta](const Vector& x, double step) {
    return prox_of_envelope(prox, x, step, theta);
  };
  env.lipschitz_L = 1.0 / theta;
  env.known_minimizer = f.known_minimizer;
  env.known_minimum = f.known_minimum;
  if (f.value_difference) {
    auto diff = f.value_difference;
    env.value_difference = [prox, diff, theta](const Vector& x, const Vector& y) {
      const Vector px = prox(x, theta);
      const Vector py = prox(y, theta);
      return diff(px, py) + ((x - px).squaredNorm() - (y - py).squaredNorm()) / (2.0 * theta);
    };
  }
  return env;
}

Vector prox_regularizer(const RLSInstance& inst, const Vector& x, double step) {
  require_positive(step, "prox step");
  switch (inst.regularizer) {
    case Regularizer::none: return x;
    case Regularizer::l1:
      if (inst.weight == 0.0) return x;
      return prox_l1(x, step * inst.weight);
    case Regularizer::nuclear:
      if (inst.weight == 0.0) return x;
      return vec(prox_nuclear(unvec(x, inst.mat_rows, inst.mat_cols), step * inst.weight));
  }
  return x;
}

MetricRLS::MetricRLS(RLSInstance inst, std::optional<double> lambda)
    : inst_(std::move(inst)), lambda_(lambda.value_or(inst_.lambda_metric)) {
  inst_.lambda_metric = lambda_;
  inst_.validate();
}

double MetricRLS::metric_sq_norm(const Vector& v) const {
  return v.squaredNorm() / lambda_ - (inst_.A * v).squaredNorm();
}

double MetricRLS::metric_inner(const Vector& u, const Vector& v) const {
  return u.dot(v) / lambda_ - (inst_.A * u).dot(inst_.A * v);
}

Matrix MetricRLS::metric() const {
  const Index n = inst_.n();
  return Matrix::Identity(n, n) / lambda_ - inst_.A.transpose() * inst_.A;
}

Vector prox_metric_rls(const MetricRLS& mr, const Vector& x) {
  const RLSInstance& inst = mr.instance();
  if (x.size() != inst.n()) throw InputError("metric prox: dimension mismatch");
  const double lambda = mr.lambda();
  return prox_regularizer(inst, x + lambda * (inst.A.transpose() * (inst.b - inst.A * x)), lambda);
}

Vector grad_metric_rls(const MetricRLS& mr, const Vector& x) {
  return x - prox_metric_rls(mr, x);
}

double envelope_value_metric(const MetricRLS& mr, const Vector& x) {
  const Vector p = prox_metric_rls(mr, x);
  return rls_value(mr.instance(), p) + 0.5 * mr.metric_sq_norm(x - p);
}

Objective make_metric_envelope(const MetricRLS& mr) {
  Objective env;
  env.dimension = mr.dimension();
  env.value = [mr](const Vector& x) { return envelope_value_metric(mr, x); };
  env.gradient = [mr](const Vector& x) { return grad_metric_rls(mr, x); };
  env.lipschitz_L = 1.0;
  env.value_difference = [mr](const Vector& x, const Vector& y) {
    const Vector px = prox_metric_rls(mr, x);
    const Vector py = prox_metric_rls(mr, y);
    return rls_value_difference(mr.instance(), px, py) +
           0.5 * (mr.metric_sq_norm(x - px) - mr.metric_sq_norm(y - py));
  };
  return env;
}

}  // namespace inertia_hd
