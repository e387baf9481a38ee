#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "inertia_hd/types.hpp"

namespace inertia_hd {

/// A convex objective described by its oracles.
///
/// `value` and `gradient` are mandatory. The remaining oracles are optional
/// and callers test for them with the `has_*` helpers. For nonsmooth
/// objectives `gradient` returns a subgradient and is only used for reporting.
struct Objective {
  Index dimension = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Vector(const Vector&, const Vector&)> hessian_vec;
  std::optional<double> lipschitz_L;
  /// prox(x, step) = argmin_z f(z) + |z - x|^2 / (2 step)
  std::function<Vector(const Vector&, double)> prox;
  std::optional<double> known_minimum;
  std::optional<Vector> known_minimizer;
  /// f(x) - f(y) without cancellation, used for gaps near machine precision.
  std::function<double(const Vector&, const Vector&)> value_difference;

  bool has_prox() const { return static_cast<bool>(prox); }
  bool has_hessian_vec() const { return static_cast<bool>(hessian_vec); }

  /// f(x) - f(y), through `value_difference` when available.
  double difference(const Vector& x, const Vector& y) const;
};

struct ValueAndGradient {
  double value = 0.0;
  Vector grad;
};

/// f(x) = 1/2 x'Qx - c'x and its gradient Qx - c.
ValueAndGradient quadratic_value_grad(const Matrix& Q, const Vector& c, const Vector& x);

/// A reference solution (x*, f*) for gap and distance diagnostics.
struct Reference {
  Vector x_star;
  double f_star = 0.0;
};

/// f(x) - f*. Uses the cancellation-free difference against x* when the
/// objective provides one (f* is then taken to be f(x*)).
double objective_gap(const Objective& obj, const Vector& x, const Reference& ref);

/// Reference from known_minimizer / known_minimum, when both are set.
std::optional<Reference> known_reference(const Objective& obj);

/// Quadratic objective with analytic Hessian-vector product, exact prox and
/// Lipschitz constant. The minimizer is filled in when Q is positive definite.
Objective make_quadratic(Matrix Q, Vector c);

/// f(x) = weight * |x - center|_1, nonsmooth with closed-form prox.
Objective make_l1_objective(Vector center, double weight = 1.0);

/// Max over coordinates of |g_i - d_i| / max(1, |g_i|, |d_i|), where d is the
/// central-difference gradient with the given step.
double finite_diff_gradient_check(const Objective& obj, const Vector& x, double step);

struct PowerIterationResult {
  double eigenvalue = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Largest eigenvalue of a symmetric PSD matrix. Stops when successive
/// Rayleigh quotients agree to `rel_tol`.
PowerIterationResult power_iteration(const Matrix& S, double rel_tol = 1e-8, int max_iter = 1000);

/// |A|^2 = largest eigenvalue of A'A, by power iteration.
double operator_norm_squared(const Matrix& A);

enum class Regularizer { none, l1, nuclear };

std::string_view to_string(Regularizer r);
Regularizer regularizer_from_string(std::string_view name);

/// min_x 1/2 |b - Ax|^2 + g(x).
///
/// For the nuclear norm, x is the column-major vectorization of a
/// `mat_rows` x `mat_cols` matrix.
struct RLSInstance {
  Matrix A;
  Vector b;
  Regularizer regularizer = Regularizer::none;
  double weight = 0.0;
  double lambda_metric = 0.0;
  std::optional<Vector> ground_truth;
  std::uint64_t seed = 0;
  Index mat_rows = 0;
  Index mat_cols = 0;

  Index m() const { return A.rows(); }
  Index n() const { return A.cols(); }

  /// Throws InputError unless 0 < lambda_metric |A|^2 < 1 and shapes agree.
  void validate() const;
};

struct GeneratorOptions {
  double weight = 0.05;
  /// lambda_metric = lambda_scale / |A|^2
  double lambda_scale = 0.9;
};

/// Gaussian sensing matrix scaled by 1/sqrt(m), `sparsity`-sparse ground truth
/// with entries of magnitude at least one, b = A x + noise * N(0, I).
RLSInstance gen_lasso_instance(int m, int n, int sparsity, double noise, std::uint64_t seed,
                               const GeneratorOptions& opts = {});

/// Rank-`rank` p x q ground truth observed through m Gaussian measurements of
/// its vectorization. Noiseless.
RLSInstance gen_lowrank_instance(int p, int q, int rank, int m, std::uint64_t seed,
                                 const GeneratorOptions& opts = {});

double regularizer_value(const RLSInstance& inst, const Vector& x);
double rls_value(const RLSInstance& inst, const Vector& x);
/// f(x) - f(y) for the composite objective, evaluated on differences.
double rls_value_difference(const RLSInstance& inst, const Vector& x, const Vector& y);

/// The smooth part 1/2 |b - Ax|^2 as an Objective.
Objective make_rls_smooth_part(const RLSInstance& inst);

Matrix unvec(const Vector& v, Index rows, Index cols);
Vector vec(const Matrix& m);

/// {m, n, seed, regularizer, weight, lambda_metric, A (row-major), b, ground_truth}
std::string instance_to_json(const RLSInstance& inst);
RLSInstance instance_from_json(std::string_view text);

}  // namespace inertia_hd
