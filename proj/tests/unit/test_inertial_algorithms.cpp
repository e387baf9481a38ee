#include <doctest.h>

#include <cmath>
#include <random>

#include "inertia_hd/diagnostics.hpp"
#include "inertia_hd/errors.hpp"
#include "inertia_hd/inertial_algorithms.hpp"
#include "oracles.hpp"

using namespace inertia_hd;

namespace {

Vector v1(double a) {
  Vector v(1);
  v << a;
  return v;
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Objective half_square() { return make_quadratic(Matrix::Identity(1, 1), Vector::Zero(1)); }

Objective diag_quadratic() { return make_quadratic(vec2(1, 10).asDiagonal(), Vector::Zero(2)); }

Objective coupled_quadratic() {
  Matrix Q(2, 2);
  Q << 3, 1, 1, 2;
  return make_quadratic(Q, vec2(1, -1));
}

RLSInstance small_lasso(std::uint64_t seed) {
  GeneratorOptions g;
  g.weight = 0.3;
  return gen_lasso_instance(3, 5, 2, 0.1, seed, g);
}

}  // namespace

TEST_CASE("growth quantities") {
  auto s0 = DiscreteSchedule::constant(4.0, 1.0, 0.0);
  GrowthQuantities g = compute_growth(s0, 3.0, 5);
  CHECK(g.gamma == 0.0);
  CHECK(g.B == doctest::Approx(5.0));
  CHECK(g.delta == doctest::Approx(30.0));

  auto s1 = DiscreteSchedule::constant(4.0, 0.1, 0.5);
  CHECK(compute_growth(s1, 3.0, 10).B == doctest::Approx(0.5));

  // Symbolic recomputation for a non-constant schedule and gamma > 0.
  DiscreteSchedule s2;
  s2.alpha = 5.0;
  s2.h = 0.3;
  s2.beta_k = [](int k) { return 1.0 / k; };
  s2.b_k = [](int k) { return 1.0 + 0.1 * k; };
  for (int k : {1, 4, 17}) {
    const double lam = 2.5, gamma = 5.0 - lam - 1.0;
    const double B = k * (0.3 * (1 + 0.1 * k) + 1.0 / k - 1.0 / (k + 1)) - 1.0 / (k + 1);
    const double delta = 0.3 * ((k + 1 + gamma) * B + gamma * (k + 1) / (k + 1.0));
    const GrowthQuantities q = compute_growth(s2, lam, k);
    CHECK(q.B == doctest::Approx(B).epsilon(1e-14));
    CHECK(q.delta == doctest::Approx(delta).epsilon(1e-14));
  }

  for (double beta : {0.35, 1.0, 2.0}) {
    const auto s = DiscreteSchedule::constant(4.0, 0.1, beta);
    for (int k = 1; k <= 40; ++k) {
      CHECK((compute_growth(s, 3.0, k).B > 1e-12) == (k > beta / 0.1 + 1e-12));
    }
  }

  CHECK_THROWS_AS(compute_growth(s0, 0.0, 5), InputError);
  CHECK_THROWS_AS(compute_growth(s0, 3.5, 5), InputError);
  CHECK_THROWS_AS(compute_growth(s0, 3.0, 0), InputError);
}

TEST_CASE("discrete growth conditions") {
  SUBCASE("zero Hessian damping with lambda = alpha - 1") {
    auto s = DiscreteSchedule::constant(4.0, 1.0, 0.0);
    // delta_{k+1} - delta_k - 3 k = 2(k+1) - 3k, positive at k = 1 only.
    ConditionReport r = validate_discrete_conditions(s, 3.0, 1000, 0.1, 1.0);
    CHECK(r.at("G1").ok());
    CHECK(r.at("G1+").ok());
    CHECK(r.at("G3").ok());
    CHECK_FALSE(r.at("G2").ok());
    CHECK(*r.at("G2").first_violation == 1.0);
    CHECK(*r.at("G2").holds_from == 2.0);

    ConditionReport r2 = validate_discrete_conditions(s, 3.0, 1000, 0.1, 1.0, 2);
    CHECK(r2.at("G1").ok());
    CHECK(r2.at("G2").ok());
    CHECK(r2.at("G3").ok());
    CHECK(*r2.at("G2+").holds_from == 3.0);
    CHECK(validate_discrete_conditions(s, 3.0, 1000, 0.1, 1.0, 3).all_hold());
  }
  SUBCASE("G2 from a direct recurrence scan") {
    auto s = DiscreteSchedule::constant(4.0, 1.0, 0.0);
    const double lam = 2.5;
    int first_ok = 0;
    for (int k = 1; k <= 1000; ++k) {
      const double gamma = 4.0 - lam - 1.0;
      auto delta = [&](double j) { return (j + 1 + gamma) * j; };
      const bool ok = delta(k + 1) - delta(k) - lam * k <= 0.0;
      if (ok && first_ok == 0) first_ok = k;
      if (!ok) first_ok = 0;
    }
    ConditionReport r = validate_discrete_conditions(s, lam, 1000, 0.1, 1.0);
    REQUIRE(r.at("G2").holds_from);
    CHECK(*r.at("G2").holds_from == first_ok);
    CHECK_FALSE(r.at("G2+").ok());
  }
  SUBCASE("constant Hessian damping makes G1 fail for small k") {
    auto s = DiscreteSchedule::constant(4.0, 0.1, 1.0);
    ConditionReport r = validate_discrete_conditions(s, 3.0, 1000, 0.1, 0.05);
    const ConditionVerdict& g1 = r.at("G1");
    CHECK_FALSE(g1.ok());
    REQUIRE(g1.first_violation);
    CHECK(*g1.first_violation == 1.0);
    CHECK(*g1.holds_from == 11.0);
    CHECK(r.at("G3").ok());
  }
  SUBCASE("alpha = 2 keeps B_k = k") {
    auto s = DiscreteSchedule::constant(2.0, 1.0, 0.0);
    ConditionReport r = validate_discrete_conditions(s, 1.0, 100, 0.1, 1.0);
    CHECK(r.at("G1").ok());
    CHECK(r.at("G1+").ok());
  }
  CHECK_THROWS_AS(validate_discrete_conditions(DiscreteSchedule::constant(4, 1, 0), 3.0, 1, 0.1, 1.0),
                  InputError);
}

TEST_CASE("schedule and parameter validation") {
  CHECK_THROWS_AS(DiscreteSchedule::constant(1.0, 1.0, 0.0).validate(), InputError);
  CHECK_THROWS_AS(DiscreteSchedule::constant(3.0, 0.0, 0.0).validate(), InputError);
  CHECK_THROWS_AS(DiscreteSchedule::constant(3.0, 1.0, -1.0).validate(), InputError);
  CHECK_THROWS_AS(DiscreteSchedule::constant(3.0, 1.0, 0.0, 0.0).validate(), InputError);
  CHECK_NOTHROW((IGAHDParams{3.0, 0.5, 1.0}.validate(1.0)));
  CHECK_THROWS_AS((IGAHDParams{2.9, 0.5, 1.0}.validate(1.0)), InputError);
  CHECK_THROWS_AS((IGAHDParams{4.0, 2.0, 1.0}.validate(1.0)), InputError);
  CHECK_THROWS_AS((IGAHDParams{4.0, -0.1, 1.0}.validate(1.0)), InputError);
  CHECK_THROWS_AS((IGAHDParams{4.0, 0.5, 1.0}.validate(1.5)), InputError);
  CHECK_NOTHROW((IGAHDParams{4.0, 0.5, 1.0}.validate(std::nullopt)));
}

TEST_CASE("IPAHD step") {
  Objective f = half_square();
  auto s = DiscreteSchedule::constant(4.0, 1.0, 0.0);
  RunState st{4, v1(1.0), v1(0.5), v1(1.0)};
  RunState next = ipahd_step(f, s, st);
  CHECK(next.k == 5);
  CHECK(next.x_prev[0] == 0.5);
  CHECK(next.x_curr[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  // prox_{0.5 f}(0.25) by grid minimization.
  const double grid = oracles::grid_prox([](double z) { return 0.5 * z * z; }, 0.25, 0.5);
  CHECK(std::abs(grid - next.x_curr[0]) <= 1e-4);

  RunState at_min{3, v1(0.0), v1(0.0), v1(0.0)};
  CHECK(ipahd_step(f, DiscreteSchedule::constant(4.0, 1.0, 0.7), at_min).x_curr[0] == 0.0);

  Objective no_prox = f;
  no_prox.prox = nullptr;
  CHECK_THROWS_AS(ipahd_step(no_prox, s, st), CapabilityError);
}

TEST_CASE("IPAHD iterates satisfy the second-order recursion") {
  Objective f = coupled_quadratic();
  DiscreteSchedule s;
  s.alpha = 4.5;
  s.h = 0.7;
  s.beta_k = [](int k) { return 0.5 + 1.0 / k; };
  s.b_k = [](int k) { return 1.0 + 0.05 * k; };
  RunState st = warm_start(1, vec2(2, -3), f.gradient(vec2(2, -3)));
  for (int i = 0; i < 60; ++i) {
    RunState next = ipahd_step(f, s, st);
    const double k = st.k;
    const Vector lhs = next.x_curr - 2.0 * st.x_curr + st.x_prev;
    const Vector rhs = -(s.alpha / k) * (next.x_curr - st.x_curr) -
                       s.h * (s.beta_k(st.k) + s.h * s.b_k(st.k)) * f.gradient(next.x_curr) +
                       s.h * s.beta_k(st.k) * f.gradient(st.x_curr);
    CHECK((lhs - rhs).norm() <= 1e-9 * (1.0 + st.x_curr.norm()));
    st = next;
  }
}

TEST_CASE("IPAHD-NS step") {
  auto s = DiscreteSchedule::constant(4.0, 1.0, 0.0);
  CHECK(ipahd_ns_mu(s, 1.0, 4) == doctest::Approx(2.0 / 3.0));
  const ProxOracle abs_prox = [](const Vector& x, double t) { return prox_l1(x, t); };

  RunState at_min{5, v1(0.0), v1(0.0), v1(0.0)};
  CHECK(ipahd_ns_step(abs_prox, DiscreteSchedule::constant(4.0, 1.0, 0.5), 1.0, at_min).x_curr[0] ==
        0.0);
  CHECK_THROWS_AS(ipahd_ns_step(abs_prox, s, 0.0, at_min), InputError);

  Objective huber = make_moreau_envelope(make_l1_objective(Vector::Zero(1)), 0.8);
  for (double beta : {0.0, 0.5, 2.0}) {
    const auto sb = DiscreteSchedule::constant(3.5, 0.5, beta);
    for (double x : {-4.0, -0.3, 0.1, 2.5}) {
      RunState st{6, v1(x + 0.7), v1(x), huber.gradient(v1(x + 0.7))};
      const RunState ns = ipahd_ns_step(abs_prox, sb, 0.8, st);
      const RunState env = ipahd_step(huber, sb, st);
      CHECK(std::abs(ns.x_curr[0] - env.x_curr[0]) <= 1e-10);
    }
  }
}

TEST_CASE("IPAHD-NS traces match IPAHD on the envelope") {
  const double theta = 0.6;
  Objective l1 = make_l1_objective(v1(0.5), 2.0);
  Objective env = make_moreau_envelope(l1, theta);
  SolverSettings st;
  st.schedule = DiscreteSchedule::constant(4.0, 1.0, 0.5);
  st.theta = theta;
  RunOptions opts;
  opts.max_iter = 200;
  opts.x1 = v1(7.0);
  std::vector<double> a, b;
  opts.observer = [&a](const RunState& s) { a.push_back(s.x_curr[0]); };
  run_solver(Method::ipahd_ns, Problem::from_objective(l1), st, opts);
  opts.observer = [&b](const RunState& s) { b.push_back(s.x_curr[0]); };
  run_solver(Method::ipahd, Problem::from_objective(env), st, opts);
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  CHECK(worst <= 1e-10);
  CHECK(std::abs(a.back() - 0.5) <= 1e-8);
}

TEST_CASE("IGAHD step") {
  Objective f = half_square();
  IGAHDParams p{4.0, 0.5, 1.0};
  RunState st{5, v1(1.0), v1(0.8), v1(1.0)};
  GradientStep gs = igahd_step(f, p, st);
  CHECK(gs.y[0] == doctest::Approx(0.76).epsilon(1e-14));
  CHECK(gs.next.x_curr[0] == 0.0);
  CHECK(gs.next.k == 6);
  CHECK(gs.grad_x[0] == doctest::Approx(0.8));

  RunState at_min{5, v1(0.0), v1(0.0), v1(0.0)};
  GradientStep fixed = igahd_step(f, p, at_min);
  CHECK(fixed.y[0] == 0.0);
  CHECK(fixed.next.x_curr[0] == 0.0);

  IGAHDParams p0{4.0, 0.0, 0.5};
  GradientStep plain = igahd_step(f, p0, st);
  const double y = 0.8 + (1.0 - 4.0 / 5.0) * (0.8 - 1.0);
  CHECK(plain.y[0] == doctest::Approx(y).epsilon(1e-15));
  CHECK(plain.next.x_curr[0] == doctest::Approx(y - 0.5 * y).epsilon(1e-15));
  GradientStep fs = fista_step(f, p, st);
  CHECK(fs.y[0] == doctest::Approx(0.8 + 0.2 * (0.8 - 1.0) * 1.0).epsilon(1e-15));
}

TEST_CASE("IGAHD-RLS step") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal;
  auto rand5 = [&]() {
    Vector v(5);
    for (Index i = 0; i < 5; ++i) v[i] = normal(rng);
    return v;
  };
  MetricRLS mr(small_lasso(4));
  IGAHDParams p{4.0, 0.8, 0.9};

  SUBCASE("lagged correction equals IGAHD on the metric envelope") {
    Objective env = make_metric_envelope(mr);
    for (int t = 0; t < 5; ++t) {
      const Vector xp = rand5(), xc = rand5();
      RunState st{7, xp, xc, grad_metric_rls(mr, xp)};
      GradientStep a = igahd_rls_step(mr, p, st, RlsCorrection::lagged);
      GradientStep b = igahd_step(env, p, st);
      CHECK((a.next.x_curr - b.next.x_curr).norm() <= 1e-12);
      CHECK((a.y - b.y).norm() <= 1e-12);
    }
  }
  SUBCASE("current correction follows the three-line update") {
    const Vector xp = rand5(), xc = rand5();
    RunState st{6, xp, xc, grad_metric_rls(mr, xp)};
    GradientStep a = igahd_rls_step(mr, p, st);
    const double rs = p.beta * std::sqrt(p.s);
    const Vector zk = xc - prox_metric_rls(mr, xc);
    const Vector zp = xp - prox_metric_rls(mr, xp);
    const Vector y = xc + (1.0 - 4.0 / 6.0) * (xc - xp) - rs * (zk - zp) - rs / 6.0 * zk;
    const Vector x = (1.0 - p.s) * y + p.s * prox_metric_rls(mr, y);
    CHECK((a.y - y).norm() <= 1e-12);
    CHECK((a.next.x_curr - x).norm() <= 1e-12);
    CHECK((a.next.grad_prev - zk).norm() <= 1e-12);
  }
  SUBCASE("zero weight and s = 1 give a Landweber step") {
    RLSInstance inst = small_lasso(4);
    inst.weight = 0.0;
    MetricRLS lw(inst);
    const Vector xp = rand5(), xc = rand5();
    RunState st{6, xp, xc, grad_metric_rls(lw, xp)};
    GradientStep a = igahd_rls_step(lw, IGAHDParams{4.0, 0.8, 1.0}, st);
    const Vector expect = a.y + lw.lambda() * inst.A.transpose() * (inst.b - inst.A * a.y);
    CHECK((a.next.x_curr - expect).norm() <= 1e-12);
  }
  SUBCASE("minimizers are fixed points") {
    const Reference ref = presolve_reference(mr, 20000);
    const Vector xs = ref.x_star;
    RunState st{6, xs, xs, grad_metric_rls(mr, xs)};
    CHECK((igahd_rls_step(mr, p, st).next.x_curr - xs).norm() <= 1e-9);
  }
}

TEST_CASE("run_solver") {
  SUBCASE("IGAHD reaches high accuracy on an anisotropic quadratic") {
    SolverSettings st;
    st.igahd = IGAHDParams{4.0, 0.5, 0.1};
    RunOptions opts;
    opts.max_iter = 2000;
    opts.x1 = vec2(1, 1);
    RunResult r = run_solver(Method::igahd, Problem::from_objective(diag_quadratic()), st, opts);
    CHECK(r.trace.size() == 2000);
    CHECK(r.trace.records.front().k == 5);
    CHECK(r.trace.records.back().f_gap <= 1e-8);
    CHECK(r.stop_reason == "max_iter");
  }
  SUBCASE("zero iterations") {
    SolverSettings st;
    st.igahd = IGAHDParams{4.0, 0.5, 0.1};
    RunOptions opts;
    opts.max_iter = 0;
    RunResult r = run_solver(Method::igahd, Problem::from_objective(diag_quadratic()), st, opts);
    CHECK(r.trace.empty());
  }
  SUBCASE("FISTA is IGAHD with beta = 0") {
    SolverSettings st;
    st.igahd = IGAHDParams{4.0, 0.0, 0.1};
    RunOptions opts;
    opts.max_iter = 300;
    opts.x1 = vec2(1, -2);
    const Problem prob = Problem::from_objective(coupled_quadratic());
    const std::string a = run_solver(Method::fista, prob, st, opts).trace.to_csv();
    const std::string b = run_solver(Method::igahd, prob, st, opts).trace.to_csv();
    CHECK(a == b);
    st.igahd.beta = 0.7;
    CHECK(run_solver(Method::fista, prob, st, opts).trace.to_csv() == a);
  }
  SUBCASE("parameter errors surface before iterating") {
    SolverSettings st;
    st.igahd = IGAHDParams{4.0, 0.5, 1.0};
    RunOptions opts;
    int calls = 0;
    opts.observer = [&calls](const RunState&) { ++calls; };
    CHECK_THROWS_AS(run_solver(Method::igahd, Problem::from_objective(diag_quadratic()), st, opts),
                    InputError);
    CHECK(calls == 0);
    CHECK_THROWS_AS(run_solver(Method::ipahd, Problem::from_objective(diag_quadratic()), st, opts),
                    InputError);
    CHECK_THROWS_AS(
        run_solver(Method::igahd_rls, Problem::from_objective(diag_quadratic()), st, opts),
        InputError);
  }
  SUBCASE("stopping rules") {
    SolverSettings st;
    st.igahd = IGAHDParams{4.0, 0.5, 0.1};
    RunOptions opts;
    opts.max_iter = 5000;
    opts.x1 = vec2(1, 1);
    opts.stop.gap_tol = 1e-6;
    RunResult r = run_solver(Method::igahd, Problem::from_objective(diag_quadratic()), st, opts);
    CHECK(r.stop_reason == "gap_tol");
    CHECK(r.trace.records.back().f_gap <= 1e-6);
    CHECK(r.trace.size() < 5000);
  }
  SUBCASE("IGAHD-RLS uses a presolved reference") {
    SolverSettings st;
    st.igahd = IGAHDParams{4.0, 0.5, 1.0};
    RunOptions opts;
    opts.max_iter = 3000;
    RunResult r = run_solver(Method::igahd_rls, Problem::from_rls(MetricRLS(small_lasso(2))), st, opts);
    CHECK(r.trace.records.back().f_gap <= 1e-10);
    CHECK(r.trace.records.back().f_gap >= -1e-12);
  }
}

TEST_CASE("IGAHD energy is non-increasing") {
  for (double beta : {0.0, 0.3, 0.6}) {
    Objective f = coupled_quadratic();
    IGAHDParams p{4.0, beta, 1.0 / *f.lipschitz_L};
    SolverSettings st;
    st.igahd = p;
    RunOptions opts;
    opts.max_iter = 500;
    opts.x1 = vec2(4, -4);
    const Reference ref = *known_reference(f);
    std::vector<double> energy;
    opts.observer = [&](const RunState& s) { energy.push_back(lyapunov_igahd(f, p, ref, s)); };
    run_solver(Method::igahd, Problem::from_objective(f), st, opts);
    for (std::size_t i = 1; i < energy.size(); ++i) {
      CHECK(energy[i] <= energy[i - 1] + 1e-10 * (1.0 + energy[i - 1]));
    }
  }
}

TEST_CASE("reinforced descent inequality under sL <= 1") {
  std::mt19937_64 rng(30);
  std::normal_distribution<double> normal(0.0, 3.0);
  Objective f = coupled_quadratic();
  const double s = 1.0 / *f.lipschitz_L;
  for (int t = 0; t < 200; ++t) {
    const Vector x = vec2(normal(rng), normal(rng));
    const Vector y = vec2(normal(rng), normal(rng));
    CHECK(descent_lemma_slack(f, x, y, s) >= -1e-10);
  }
}

TEST_CASE("trace CSV round trip") {
  RunTrace t;
  TraceRecord a;
  a.k = 3;
  a.f_gap = 0.1;
  a.grad_norm = 1.0 / 3.0;
  a.velocity_norm = 0.0;
  a.lyapunov = 2.5e-17;
  TraceRecord b = a;
  b.k = 4;
  b.y_grad_norm = 7.0;
  b.lyapunov.reset();
  t.records = {a, b};
  const std::string csv = t.to_csv();
  CHECK(csv.rfind("k,f_gap,grad_norm,velocity_norm,lyapunov,y_grad_norm\n", 0) == 0);
  const RunTrace back = RunTrace::from_csv(csv);
  REQUIRE(back.size() == 2);
  CHECK(back.records[0].grad_norm == a.grad_norm);
  CHECK(*back.records[0].lyapunov == *a.lyapunov);
  CHECK_FALSE(back.records[0].y_grad_norm);
  CHECK_FALSE(back.records[1].lyapunov);
  CHECK(*back.records[1].y_grad_norm == 7.0);
  CHECK(back.to_csv() == csv);
  CHECK_THROWS_AS(RunTrace::from_csv("k,f\n1,2\n"), InputError);
}

TEST_CASE("method names") {
  for (Method m : {Method::ipahd, Method::ipahd_ns, Method::igahd, Method::igahd_rls, Method::fista}) {
    CHECK(method_from_string(to_string(m)) == m);
  }
  CHECK_THROWS_AS(method_from_string("adam"), InputError);
  CHECK(default_k_start(Method::igahd, 4.0) == 5);
  CHECK(default_k_start(Method::fista, 3.5) == 5);
  CHECK(default_k_start(Method::ipahd, 4.0) == 1);
}
