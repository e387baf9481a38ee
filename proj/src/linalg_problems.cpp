#include "inertia_hd/linalg_problems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "inertia_hd/errors.hpp"

namespace inertia_hd {

namespace {

void require_same_size(Index a, Index b, const char* what) {
  if (a != b) {
    throw InputError(std::string("dimension mismatch: ") + what + " (" + std::to_string(a) +
                     " vs " + std::to_string(b) + ")");
  }
}

Matrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) out(i, j) = normal(rng);
  }
  return out;
}

}  // namespace

double Objective::difference(const Vector& x, const Vector& y) const {
  if (value_difference) return value_difference(x, y);
  return value(x) - value(y);
}

double objective_gap(const Objective& obj, const Vector& x, const Reference& ref) {
  if (obj.value_difference && ref.x_star.size() == x.size()) {
    return obj.value_difference(x, ref.x_star);
  }
  return obj.value(x) - ref.f_star;
}

std::optional<Reference> known_reference(const Objective& obj) {
  if (!obj.known_minimizer || !obj.known_minimum) return std::nullopt;
  return Reference{*obj.known_minimizer, *obj.known_minimum};
}

ValueAndGradient quadratic_value_grad(const Matrix& Q, const Vector& c, const Vector& x) {
  require_same_size(Q.rows(), Q.cols(), "Q must be square");
  require_same_size(Q.cols(), x.size(), "Q and x");
  require_same_size(c.size(), x.size(), "c and x");
  Vector qx = Q * x;
  return {0.5 * x.dot(qx) - c.dot(x), qx - c};
}

Objective make_quadratic(Matrix Q, Vector c) {
  require_same_size(Q.rows(), Q.cols(), "Q must be square");
  require_same_size(Q.cols(), c.size(), "Q and c");
  if (!Q.isApprox(Q.transpose(), 1e-12)) throw InputError("Q must be symmetric");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(Q, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (lo < -1e-12 * std::max(1.0, hi)) throw InputError("Q must be positive semidefinite");

  Objective obj;
  obj.dimension = Q.rows();
  obj.lipschitz_L = std::max(hi, 0.0);
  if (lo > 1e-12 * std::max(1.0, hi)) {
    Vector xs = Q.ldlt().solve(c);
    obj.known_minimizer = xs;
    obj.known_minimum = -0.5 * c.dot(xs);
  }
  obj.value = [Q, c](const Vector& x) { return 0.5 * x.dot(Q * x) - c.dot(x); };
  obj.gradient = [Q, c](const Vector& x) -> Vector { return Q * x - c; };
  obj.hessian_vec = [Q](const Vector&, const Vector& v) -> Vector { return Q * v; };
  obj.prox = [Q, c](const Vector& x, double step) -> Vector {
    const Index n = Q.rows();
    Matrix sys = Matrix::Identity(n, n) + step * Q;
    Eigen::LLT<Matrix> llt(sys);
    if (llt.info() != Eigen::Success) throw NumericError("quadratic prox: factorization failed");
    return llt.solve(x + step * c);
  };
  // f(x) - f(y) = <x - y, Q(x + y)/2 - c>
  obj.value_difference = [Q, c](const Vector& x, const Vector& y) {
    return (x - y).dot(0.5 * (Q * (x + y)) - c);
  };
  return obj;
}

Objective make_l1_objective(Vector center, double weight) {
  if (!(weight > 0.0)) throw InputError("l1 objective: weight must be positive");
  Objective obj;
  obj.dimension = center.size();
  obj.value = [center, weight](const Vector& x) { return weight * (x - center).lpNorm<1>(); };
  obj.gradient = [center, weight](const Vector& x) -> Vector {
    return weight * (x - center).array().sign().matrix();
  };
  obj.prox = [center, weight](const Vector& x, double step) -> Vector {
    if (!(step > 0.0)) throw InputError("prox step must be positive");
    Vector d = x - center;
    const double tau = weight * step;
    return center + (d.array().sign() * (d.array().abs() - tau).max(0.0)).matrix();
  };
  obj.value_difference = [center, weight](const Vector& x, const Vector& y) {
    double acc = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
      acc += std::abs(x[i] - center[i]) - std::abs(y[i] - center[i]);
    }
    return weight * acc;
  };
  obj.known_minimizer = center;
  obj.known_minimum = 0.0;
  return obj;
}

double finite_diff_gradient_check(const Objective& obj, const Vector& x, double step) {
  if (!(step > 0.0)) throw InputError("finite difference step must be positive");
  const Vector g = obj.gradient(x);
  require_same_size(g.size(), x.size(), "gradient and x");
  double worst = 0.0;
  Vector probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double fp = obj.value(probe);
    probe[i] = x[i] - step;
    const double fm = obj.value(probe);
    probe[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm) || !std::isfinite(g[i])) {
      throw NumericError("non-finite value in gradient check at coordinate " +
                         std::to_string(i));
    }
    const double fd = (fp - fm) / (2.0 * step);
    const double scale = std::max({1.0, std::abs(g[i]), std::abs(fd)});
    worst = std::max(worst, std::abs(g[i] - fd) / scale);
  }
  return worst;
}

PowerIterationResult power_iteration(const Matrix& S, double rel_tol, int max_iter) {
  require_same_size(S.rows(), S.cols(), "power iteration needs a square matrix");
  PowerIterationResult out;
  if (S.rows() == 0) {
    out.converged = true;
    return out;
  }
  // Deterministic start with components along every axis.
  Vector v(S.rows());
  for (Index i = 0; i < v.size(); ++i) v[i] = 1.0 + 0.01 * static_cast<double>(i % 7);
  v.normalize();
  double prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    Vector w = S * v;
    const double rq = v.dot(w);
    const double nw = w.norm();
    out.iterations = it;
    out.eigenvalue = rq;
    if (nw == 0.0) {
      out.converged = true;
      return out;
    }
    v = w / nw;
    if (it > 1 && std::abs(rq - prev) <= rel_tol * std::abs(rq)) {
      out.converged = true;
      return out;
    }
    prev = rq;
  }
  return out;
}

double operator_norm_squared(const Matrix& A) {
  return power_iteration(A.transpose() * A).eigenvalue;
}

std::string_view to_string(Regularizer r) {
  switch (r) {
    case Regularizer::none: return "none";
    case Regularizer::l1: return "l1";
    case Regularizer::nuclear: return "nuclear";
  }
  return "none";
}

Regularizer regularizer_from_string(std::string_view name) {
  if (name == "none") return Regularizer::none;
  if (name == "l1") return Regularizer::l1;
  if (name == "nuclear") return Regularizer::nuclear;
  throw InputError("unknown regularizer '" + std::string(name) + "'");
}

void RLSInstance::validate() const {
  require_same_size(A.rows(), b.size(), "A rows and b");
  if (ground_truth) require_same_size(ground_truth->size(), A.cols(), "ground truth and A cols");
  if (weight < 0.0) throw InputError("regularizer weight must be non-negative");
  if (regularizer == Regularizer::nuclear && mat_rows * mat_cols != A.cols()) {
    throw InputError("nuclear regularizer: matrix shape does not match A cols");
  }
  const double prod = lambda_metric * operator_norm_squared(A);
  if (!(lambda_metric > 0.0) || !(prod < 1.0)) {
    throw InputError("metric parameter must satisfy 0 < lambda |A|^2 < 1 (got " +
                     std::to_string(prod) + ")");
  }
}

RLSInstance gen_lasso_instance(int m, int n, int sparsity, double noise, std::uint64_t seed,
                               const GeneratorOptions& opts) {
  if (m < 1 || m > n) throw InputError("lasso instance: need 1 <= m <= n");
  if (sparsity < 0 || sparsity > n) throw InputError("lasso instance: need 0 <= sparsity <= n");
  if (noise < 0.0) throw InputError("lasso instance: noise must be non-negative");

  std::mt19937_64 rng(seed);
  RLSInstance inst;
  inst.seed = seed;
  inst.A = gaussian_matrix(m, n, rng) / std::sqrt(static_cast<double>(m));

  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector truth = Vector::Zero(n);
  for (int j = 0; j < sparsity; ++j) {
    const double z = normal(rng);
    truth[idx[static_cast<std::size_t>(j)]] = (z < 0.0 ? -1.0 : 1.0) * (1.0 + std::abs(z));
  }
  Vector eps(m);
  for (Index i = 0; i < m; ++i) eps[i] = normal(rng);
  inst.b = inst.A * truth;
  if (noise > 0.0) inst.b += noise * eps;
  inst.ground_truth = truth;
  inst.regularizer = Regularizer::l1;
  inst.weight = opts.weight;
  inst.lambda_metric = opts.lambda_scale / operator_norm_squared(inst.A);
  return inst;
}

RLSInstance gen_lowrank_instance(int p, int q, int rank, int m, std::uint64_t seed,
                                 const GeneratorOptions& opts) {
  if (p < 1 || q < 1) throw InputError("low-rank instance: p and q must be positive");
  if (rank < 1 || rank > std::min(p, q)) {
    throw InputError("low-rank instance: rank must lie in [1, min(p, q)]");
  }
  if (m < 1 || m > p * q) throw InputError("low-rank instance: need 1 <= m <= p q");

  std::mt19937_64 rng(seed);
  RLSInstance inst;
  inst.seed = seed;
  inst.mat_rows = p;
  inst.mat_cols = q;
  inst.A = gaussian_matrix(m, static_cast<Index>(p) * q, rng) / std::sqrt(static_cast<double>(m));
  const Matrix U = gaussian_matrix(p, rank, rng);
  const Matrix V = gaussian_matrix(q, rank, rng);
  const Vector truth = vec(U * V.transpose());
  inst.b = inst.A * truth;
  inst.ground_truth = truth;
  inst.regularizer = Regularizer::nuclear;
  inst.weight = opts.weight;
  inst.lambda_metric = opts.lambda_scale / operator_norm_squared(inst.A);
  return inst;
}

double regularizer_value(const RLSInstance& inst, const Vector& x) {
  switch (inst.regularizer) {
    case Regularizer::none: return 0.0;
    case Regularizer::l1: return inst.weight * x.lpNorm<1>();
    case Regularizer::nuclear: {
      Eigen::BDCSVD<Matrix> svd(unvec(x, inst.mat_rows, inst.mat_cols));
      return inst.weight * svd.singularValues().sum();
    }
  }
  return 0.0;
}

double rls_value(const RLSInstance& inst, const Vector& x) {
  return 0.5 * (inst.b - inst.A * x).squaredNorm() + regularizer_value(inst, x);
}

double rls_value_difference(const RLSInstance& inst, const Vector& x, const Vector& y) {
  // 1/2 |r_x|^2 - 1/2 |r_y|^2 = 1/2 <r_x - r_y, r_x + r_y>, r_x - r_y = A(y - x)
  const Vector rx = inst.b - inst.A * x;
  const Vector ry = inst.b - inst.A * y;
  const Vector dr = inst.A * (y - x);
  double out = 0.5 * dr.dot(rx + ry);
  switch (inst.regularizer) {
    case Regularizer::none: break;
    case Regularizer::l1: {
      double acc = 0.0;
      for (Index i = 0; i < x.size(); ++i) acc += std::abs(x[i]) - std::abs(y[i]);
      out += inst.weight * acc;
      break;
    }
    case Regularizer::nuclear: out += regularizer_value(inst, x) - regularizer_value(inst, y); break;
  }
  return out;
}

Objective make_rls_smooth_part(const RLSInstance& inst) {
  Objective obj;
  obj.dimension = inst.n();
  const Matrix A = inst.A;
  const Vector b = inst.b;
  obj.value = [A, b](const Vector& x) { return 0.5 * (b - A * x).squaredNorm(); };
  obj.gradient = [A, b](const Vector& x) -> Vector { return A.transpose() * (A * x - b); };
  obj.hessian_vec = [A](const Vector&, const Vector& v) -> Vector {
    return A.transpose() * (A * v);
  };
  obj.lipschitz_L = operator_norm_squared(A);
  obj.value_difference = [A, b](const Vector& x, const Vector& y) {
    return 0.5 * (A * (y - x)).dot((b - A * x) + (b - A * y));
  };
  return obj;
}

Matrix unvec(const Vector& v, Index rows, Index cols) {
  require_same_size(v.size(), rows * cols, "vectorized matrix size");
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_std(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

std::string instance_to_json(const RLSInstance& inst) {
  nlohmann::json j;
  j["m"] = inst.m();
  j["n"] = inst.n();
  j["seed"] = inst.seed;
  j["regularizer"] = std::string(to_string(inst.regularizer));
  j["weight"] = inst.weight;
  j["lambda_metric"] = inst.lambda_metric;
  std::vector<double> a;
  a.reserve(static_cast<std::size_t>(inst.A.size()));
  for (Index i = 0; i < inst.A.rows(); ++i) {
    for (Index k = 0; k < inst.A.cols(); ++k) a.push_back(inst.A(i, k));
  }
  j["A"] = a;
  j["b"] = to_std(inst.b);
  j["ground_truth"] = inst.ground_truth ? nlohmann::json(to_std(*inst.ground_truth))
                                        : nlohmann::json(nullptr);
  if (inst.regularizer == Regularizer::nuclear) {
    j["shape"] = {inst.mat_rows, inst.mat_cols};
  }
  return j.dump();
}

RLSInstance instance_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("instance JSON: ") + e.what());
  }
  try {
    RLSInstance inst;
    const auto m = j.at("m").get<Index>();
    const auto n = j.at("n").get<Index>();
    const auto a = j.at("A").get<std::vector<double>>();
    if (static_cast<Index>(a.size()) != m * n) throw InputError("instance JSON: A has wrong size");
    inst.A.resize(m, n);
    for (Index i = 0; i < m; ++i) {
      for (Index k = 0; k < n; ++k) inst.A(i, k) = a[static_cast<std::size_t>(i * n + k)];
    }
    inst.b = from_std(j.at("b").get<std::vector<double>>());
    inst.seed = j.at("seed").get<std::uint64_t>();
    inst.regularizer = regularizer_from_string(j.at("regularizer").get<std::string>());
    inst.weight = j.at("weight").get<double>();
    inst.lambda_metric = j.at("lambda_metric").get<double>();
    if (j.contains("ground_truth") && !j["ground_truth"].is_null()) {
      inst.ground_truth = from_std(j["ground_truth"].get<std::vector<double>>());
    }
    if (j.contains("shape")) {
      inst.mat_rows = j["shape"].at(0).get<Index>();
      inst.mat_cols = j["shape"].at(1).get<Index>();
    }
    inst.validate();
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("instance JSON: ") + e.what());
  }
}

}  // namespace inertia_hd
