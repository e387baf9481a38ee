#include <doctest.h>

#include <cmath>
#include <random>

#include "inertia_hd/errors.hpp"
#include "inertia_hd/inertial_algorithms.hpp"
#include "inertia_hd/prox_calculus.hpp"
#include "oracles.hpp"

using namespace inertia_hd;

namespace {

Vector v1(double a) {
  Vector v(1);
  v << a;
  return v;
}

Vector random_vector(Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

const ProxOracle abs_prox = [](const Vector& x, double t) { return prox_l1(x, t); };
const ValueOracle abs_value = [](const Vector& x) { return x.lpNorm<1>(); };
const ProxOracle half_sq_prox = [](const Vector& x, double t) -> Vector { return x / (1.0 + t); };
const ValueOracle half_sq_value = [](const Vector& x) { return 0.5 * x.squaredNorm(); };

double huber(double z, double theta) {
  return std::abs(z) <= theta ? z * z / (2.0 * theta) : std::abs(z) - theta / 2.0;
}

RLSInstance small_lasso(std::uint64_t seed, int m = 3, int n = 5, double weight = 0.3) {
  GeneratorOptions g;
  g.weight = weight;
  return gen_lasso_instance(m, n, 2, 0.1, seed, g);
}

}  // namespace

TEST_CASE("soft threshold") {
  CHECK(prox_l1(v1(2), 1)[0] == 1.0);
  Vector x(2);
  x << 0.5, -0.3;
  CHECK(prox_l1(x, 1).isZero());
  Vector y(3);
  y << 3, -2, 0.1;
  const Vector p = prox_l1(y, 0.5);
  Vector expect(3);
  expect << 2.5, -1.5, 0.0;
  CHECK(p.isApprox(expect));
  for (Index i = 0; i < 3; ++i) {
    const double grid = oracles::grid_prox([](double z) { return std::abs(z); }, y[i], 0.5);
    CHECK(std::abs(grid - p[i]) <= 1e-4);
  }
  CHECK_THROWS_AS(prox_l1(x, 0.0), InputError);
  CHECK_THROWS_AS(prox_l1(x, -1.0), InputError);
}

TEST_CASE("singular value threshold") {
  Matrix D = Vector::Ones(2).asDiagonal();
  D(0, 0) = 3;
  Matrix expect = Matrix::Zero(2, 2);
  expect(0, 0) = 1;
  CHECK(prox_nuclear(D, 2).isApprox(expect));
  CHECK(prox_nuclear(Matrix::Zero(3, 2), 0.4).isZero());

  std::mt19937_64 rng(9);
  Matrix X(3, 3);
  for (Index i = 0; i < 9; ++i) X.data()[i] = std::normal_distribution<double>(0, 1)(rng);
  const Matrix P = prox_nuclear(X, 0.7);
  const Vector s_in = oracles::singular_values_via_gram(X);
  const Vector s_out = oracles::singular_values_via_gram(P);
  for (Index i = 0; i < 3; ++i) CHECK(std::abs(s_out[i] - std::max(s_in[i] - 0.7, 0.0)) <= 1e-8);
  CHECK_THROWS_AS(prox_nuclear(X, 0.0), InputError);
}

TEST_CASE("quadratic prox") {
  CHECK(prox_smooth_quadratic(Matrix::Identity(1, 1), v1(0), v1(3), 1.0)[0] == doctest::Approx(1.5));
  Matrix Q = Matrix::Zero(2, 2);
  Q(0, 0) = 1;
  Q(1, 1) = 10;
  const Vector p = prox_smooth_quadratic(Q, Vector::Zero(2), Vector::Ones(2), 0.5);
  CHECK(p[0] == doctest::Approx(2.0 / 3.0));
  CHECK(p[1] == doctest::Approx(1.0 / 6.0));
  const double g0 = oracles::grid_prox([](double z) { return 0.5 * z * z; }, 1.0, 0.5);
  const double g1 = oracles::grid_prox([](double z) { return 5.0 * z * z; }, 1.0, 0.5);
  CHECK(std::abs(g0 - p[0]) <= 1e-4);
  CHECK(std::abs(g1 - p[1]) <= 1e-4);

  Vector c(2);
  c << 1, 2;
  const Vector xstar = Q.ldlt().solve(c);
  for (double lam : {0.1, 1.0, 10.0}) {
    CHECK((prox_smooth_quadratic(Q, c, xstar, lam) - xstar).norm() < 1e-12);
  }
  CHECK_THROWS_AS(prox_smooth_quadratic(Q, c, xstar, 0.0), InputError);
}

TEST_CASE("Moreau envelope value") {
  CHECK(moreau_value(abs_prox, abs_value, v1(0), 1.0) == 0.0);
  const double v = moreau_value(abs_prox, abs_value, v1(2), 1.0);
  CHECK(v == doctest::Approx(1.5));
  const double grid = oracles::grid_min([](double z) { return std::abs(z) + 0.5 * (z - 2) * (z - 2); },
                                        -1.0, 4.0, 1e-5);
  CHECK(std::abs(v - grid) <= 1e-8);

  const double q = moreau_value(half_sq_prox, half_sq_value, v1(2), 1.0);
  CHECK(q == doctest::Approx(1.0));
  const double qgrid = oracles::grid_min([](double z) { return 0.5 * z * z + 0.5 * (z - 2) * (z - 2); },
                                         -1.0, 4.0, 1e-5);
  CHECK(std::abs(q - qgrid) <= 1e-8);
  CHECK_THROWS_AS(moreau_value(abs_prox, abs_value, v1(2), 0.0), InputError);
}

TEST_CASE("Moreau envelope gradient") {
  auto env = [](double x) { return moreau_value(abs_prox, abs_value, v1(x), 1.0); };
  CHECK(moreau_gradient(abs_prox, v1(2), 1.0)[0] == doctest::Approx(1.0));
  CHECK(oracles::central_diff(env, 2.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(moreau_gradient(abs_prox, v1(0), 1.0)[0] == 0.0);
  auto qenv = [](double x) { return moreau_value(half_sq_prox, half_sq_value, v1(x), 1.0); };
  CHECK(moreau_gradient(half_sq_prox, v1(2), 1.0)[0] == doctest::Approx(1.0));
  CHECK(oracles::central_diff(qenv, 2.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(moreau_gradient(abs_prox, v1(2), -1.0), InputError);
}

TEST_CASE("prox of the envelope") {
  const double p = prox_of_envelope(abs_prox, v1(3), 1.0, 1.0)[0];
  CHECK(p == doctest::Approx(2.0));
  CHECK(std::abs(prox_of_envelope(abs_prox, v1(3), 1e-8, 1.0)[0] - 3.0) <= 1e-6);
  CHECK(prox_of_envelope(abs_prox, v1(0), 2.0, 0.5)[0] == 0.0);
  CHECK_THROWS_AS(prox_of_envelope(abs_prox, v1(3), 0.0, 1.0), InputError);
  CHECK_THROWS_AS(prox_of_envelope(abs_prox, v1(3), 1.0, 0.0), InputError);

  for (double theta : {0.5, 1.0, 2.0}) {
    for (double lam : {0.3, 1.0, 4.0}) {
      for (double x : {-5.0, -0.7, 0.2, 1.3, 6.0}) {
        const double ours = prox_of_envelope(abs_prox, v1(x), lam, theta)[0];
        const double grid =
            oracles::grid_prox([theta](double z) { return huber(z, theta); }, x, lam);
        CHECK(std::abs(ours - grid) <= 1e-4);
      }
    }
  }
}

TEST_CASE("prox operators are firmly nonexpansive") {
  std::mt19937_64 rng(21);
  Matrix Q(3, 3);
  Q << 2, 0.3, 0, 0.3, 1, 0.2, 0, 0.2, 0.5;
  const Vector c = Vector::Ones(3);
  std::vector<std::function<Vector(const Vector&)>> proxes = {
      [](const Vector& x) { return prox_l1(x, 0.4); },
      [Q, c](const Vector& x) { return prox_smooth_quadratic(Q, c, x, 0.7); },
      [](const Vector& x) { return vec(prox_nuclear(unvec(x, 3, 1), 0.4)); },
      [](const Vector& x) { return prox_of_envelope(abs_prox, x, 0.8, 0.6); },
  };
  for (const auto& prox : proxes) {
    for (int t = 0; t < 50; ++t) {
      const Vector x = random_vector(3, rng, 2.0);
      const Vector y = random_vector(3, rng, 2.0);
      const Vector d = prox(x) - prox(y);
      CHECK(d.squaredNorm() <= d.dot(x - y) + 1e-10);
    }
  }
  const Vector X = random_vector(6, rng);
  const Vector Y = random_vector(6, rng);
  const Vector d = vec(prox_nuclear(unvec(X, 2, 3), 0.5)) - vec(prox_nuclear(unvec(Y, 2, 3), 0.5));
  CHECK(d.squaredNorm() <= d.dot(X - Y) + 1e-10);
}

TEST_CASE("envelope gradient is 1/theta Lipschitz and vanishes on minimizers") {
  std::mt19937_64 rng(4);
  Vector center(3);
  center << 1, -2, 0.5;
  Objective f = make_l1_objective(center, 1.5);
  for (double theta : {0.25, 1.0, 3.0}) {
    Objective env = make_moreau_envelope(f, theta);
    CHECK(*env.lipschitz_L == doctest::Approx(1.0 / theta));
    for (int t = 0; t < 30; ++t) {
      const Vector x = random_vector(3, rng, 3.0);
      const Vector y = random_vector(3, rng, 3.0);
      CHECK((env.gradient(x) - env.gradient(y)).norm() <= (x - y).norm() / theta + 1e-12);
      CHECK(env.difference(x, y) == doctest::Approx(env.value(x) - env.value(y)).epsilon(1e-9));
    }
    CHECK(env.gradient(center).norm() <= 1e-8);
    CHECK(env.gradient(center + Vector::Constant(3, 10.0)).norm() > 1.0);
  }

  // A high-accuracy IPAHD solve of a shifted l1 objective is stationary for
  // the envelope too.
  SolverSettings st;
  st.schedule = DiscreteSchedule::constant(4.0, 1.0, 0.0);
  RunOptions opts;
  opts.max_iter = 3000;
  opts.x1 = Vector::Constant(3, 5.0);
  const RunResult r = run_solver(Method::ipahd, Problem::from_objective(f), st, opts);
  const Vector xs = r.final_state.x_curr;
  CHECK((xs - center).norm() <= 1e-8);
  CHECK(moreau_gradient(f.prox, xs, 0.7).norm() <= 1e-8);
}

TEST_CASE("MetricRLS validation and metric") {
  RLSInstance inst = small_lasso(3);
  MetricRLS mr(inst);
  Eigen::SelfAdjointEigenSolver<Matrix> es(mr.metric());
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  std::mt19937_64 rng(2);
  const Vector v = random_vector(5, rng);
  CHECK(mr.metric_sq_norm(v) == doctest::Approx(v.dot(mr.metric() * v)).epsilon(1e-12));
  const double norm2 = operator_norm_squared(inst.A);
  CHECK_THROWS_AS(MetricRLS(inst, 1.5 / norm2), InputError);
  CHECK_THROWS_AS(MetricRLS(inst, -1.0), InputError);
}

TEST_CASE("metric prox for the regularized least-squares problem") {
  std::mt19937_64 rng(6);
  SUBCASE("zero regularizer reduces to a Landweber step") {
    RLSInstance inst = small_lasso(5);
    inst.regularizer = Regularizer::none;
    MetricRLS mr(inst);
    const Vector x = random_vector(5, rng);
    const double lam = mr.lambda();
    const Vector expect = x + lam * inst.A.transpose() * (inst.b - inst.A * x);
    CHECK((prox_metric_rls(mr, x) - expect).norm() <= 1e-14 * (1 + expect.norm()));
    CHECK((grad_metric_rls(mr, x) - lam * inst.A.transpose() * (inst.A * x - inst.b)).norm() <= 1e-12);
  }
  SUBCASE("consistent point with zero weight is fixed") {
    RLSInstance inst = small_lasso(5);
    inst.weight = 0.0;
    inst.b = inst.A * *inst.ground_truth;
    MetricRLS mr(inst);
    CHECK((prox_metric_rls(mr, *inst.ground_truth) - *inst.ground_truth).norm() <= 1e-12);
  }
  SUBCASE("matches the minimizer of f + 1/2 |z - x|_M^2") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      RLSInstance inst = small_lasso(seed);
      MetricRLS mr(inst);
      const Matrix M = mr.metric();
      const Vector x = random_vector(5, rng, 2.0);
      const Vector p = prox_metric_rls(mr, x);

      // Optimality system of the strongly convex subproblem.
      const Vector r = inst.A.transpose() * (inst.A * p - inst.b) + M * (p - x);
      CHECK(oracles::l1_kkt_violation(p, r, inst.weight) <= 1e-10);

      // Independent solve: proximal gradient with half the natural step.
      const Matrix H = inst.A.transpose() * inst.A + M;
      const double step = 0.5 / Eigen::SelfAdjointEigenSolver<Matrix>(H).eigenvalues().maxCoeff();
      Vector z = Vector::Zero(5);
      for (int it = 0; it < 20000; ++it) {
        const Vector g = inst.A.transpose() * (inst.A * z - inst.b) + M * (z - x);
        z = prox_l1(z - step * g, step * inst.weight);
      }
      CHECK((z - p).norm() <= 1e-5);
    }
  }
  SUBCASE("envelope gradient vanishes on the minimizer and is M-nonexpansive") {
    RLSInstance inst = small_lasso(8, 5, 8);
    MetricRLS mr(inst);
    const Reference ref = presolve_reference(mr, 20000);
    CHECK(grad_metric_rls(mr, ref.x_star).norm() <= 1e-8);
    for (int t = 0; t < 50; ++t) {
      const Vector x = random_vector(8, rng, 2.0);
      const Vector z = random_vector(8, rng, 2.0);
      const Vector d = grad_metric_rls(mr, x) - grad_metric_rls(mr, z);
      CHECK(std::sqrt(mr.metric_sq_norm(d)) <= std::sqrt(mr.metric_sq_norm(x - z)) + 1e-12);
    }
  }
}

TEST_CASE("metric envelope objective") {
  RLSInstance inst = small_lasso(12, 6, 10);
  MetricRLS mr(inst);
  Objective env = make_metric_envelope(mr);
  std::mt19937_64 rng(8);
  for (int t = 0; t < 10; ++t) {
    const Vector x = random_vector(10, rng);
    const Vector y = random_vector(10, rng);
    CHECK(env.difference(x, y) == doctest::Approx(env.value(x) - env.value(y)).epsilon(1e-9));
    // f_M(x) >= f(prox^M(x)) with equality exactly at fixed points.
    CHECK(env.value(x) >= rls_value(inst, prox_metric_rls(mr, x)) - 1e-12);
  }
  const Reference ref = presolve_reference(mr, 20000);
  CHECK(env.value(ref.x_star) == doctest::Approx(ref.f_star).epsilon(1e-10));
}

TEST_CASE("regularizer prox dispatch") {
  RLSInstance inst = gen_lowrank_instance(3, 2, 1, 5, 1);
  Vector x(6);
  x << 3, 0, 0, 0, 1, 0;
  const Vector p = prox_regularizer(inst, x, 1.0 / inst.weight);
  const Matrix expect = prox_nuclear(unvec(x, 3, 2), 1.0);
  CHECK((p - vec(expect)).norm() <= 1e-12);
  inst.regularizer = Regularizer::none;
  CHECK(prox_regularizer(inst, x, 1.0) == x);
}

TEST_CASE("Moreau parameters validate") {
  CHECK_NOTHROW((MoreauParams{1.0, 0.5}.validate()));
  CHECK_THROWS_AS((MoreauParams{0.0, 0.5}.validate()), InputError);
  CHECK_THROWS_AS((MoreauParams{1.0, -1.0}.validate()), InputError);
  Objective no_prox;
  no_prox.value = abs_value;
  CHECK_THROWS_AS(make_moreau_envelope(no_prox, 1.0), CapabilityError);
}
