#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

/// Minimizer of a 1-D function by exhaustive search on [lo, hi] with the given
/// step, refined once on a 100x finer grid around the best point.
inline double grid_argmin(const std::function<double(double)>& f, double lo, double hi,
                          double step) {
  double best = lo, best_v = f(lo);
  for (double z = lo; z <= hi + 0.5 * step; z += step) {
    const double v = f(z);
    if (v < best_v) best_v = v, best = z;
  }
  const double fine = step / 100.0;
  const double a = best - step, b = best + step;
  for (double z = a; z <= b; z += fine) {
    const double v = f(z);
    if (v < best_v) best_v = v, best = z;
  }
  return best;
}

inline double grid_min(const std::function<double(double)>& f, double lo, double hi, double step) {
  return f(grid_argmin(f, lo, hi, step));
}

/// prox_{tau g}(x) for scalar g by grid minimization over [x - 10 tau - 1, x + 10 tau + 1].
inline double grid_prox(const std::function<double(double)>& g, double x, double tau,
                        double step = 1e-4) {
  auto obj = [&](double z) { return tau * g(z) + 0.5 * (z - x) * (z - x); };
  return grid_argmin(obj, x - 10.0 * tau - 1.0, x + 10.0 * tau + 1.0, step);
}

/// Central-difference derivative.
inline double central_diff(const std::function<double(double)>& f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline Eigen::VectorXd central_diff_grad(const std::function<double(const Eigen::VectorXd&)>& f,
                                         const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(x.size());
    e[i] = h;
    g[i] = (f(x + e) - f(x - e)) / (2.0 * h);
  }
  return g;
}

/// Largest |residual| of the lasso-type optimality system
///   0 in r + w d|z|_1,   r = smooth gradient at z,
/// i.e. r_i = -w sign(z_i) where z_i != 0 and |r_i| <= w where z_i = 0.
inline double l1_kkt_violation(const Eigen::VectorXd& z, const Eigen::VectorXd& r, double w,
                               double zero_tol = 1e-12) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (std::abs(z[i]) > zero_tol) {
      worst = std::max(worst, std::abs(r[i] + w * (z[i] > 0 ? 1.0 : -1.0)));
    } else {
      worst = std::max(worst, std::max(0.0, std::abs(r[i]) - w));
    }
  }
  return worst;
}

/// Singular values of X, descending, by the eigenvalues of X'X (independent of
/// any SVD routine).
inline Eigen::VectorXd singular_values_via_gram(const Eigen::MatrixXd& X) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X.transpose() * X);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return ev.reverse();
}

/// Sequence recursion a_{k+1} <= (1 - alpha/k) a_k + w_k. Given a nonnegative
/// sequence a (a[i] is a_{k0+i}), returns the smallest admissible w_k, i.e.
/// max(0, a_{k+1} - (1 - alpha/k) a_k).
inline std::vector<double> recursion_forcing(const std::vector<double>& a, int k0, double alpha) {
  std::vector<double> w;
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    const double k = k0 + static_cast<double>(i);
    w.push_back(std::max(0.0, a[i + 1] - (1.0 - alpha / k) * a[i]));
  }
  return w;
}

/// Share of a partial sum contributed by indices in the last decade [K/10, K].
inline double tail_share(const std::vector<double>& terms, int k0) {
  if (terms.empty()) return 0.0;
  const double K = k0 + static_cast<double>(terms.size()) - 1.0;
  double total = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    total += terms[i];
    if (k0 + static_cast<double>(i) >= K / 10.0) tail += terms[i];
  }
  return total > 0.0 ? tail / total : 0.0;
}

struct RecursionSummary {
  /// Tail share of sum k w_k.
  double forcing_tail = 0.0;
  /// Tail share of sum a_k.
  double sequence_tail = 0.0;
};

/// Checks both sides of the implication "sum k w_k < inf => sum a_k < inf" on
/// finite data through tail shares.
inline RecursionSummary recursion_summability(const std::vector<double>& a, int k0, double alpha) {
  const std::vector<double> w = recursion_forcing(a, k0, alpha);
  std::vector<double> kw(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) kw[i] = (k0 + static_cast<double>(i)) * w[i];
  return {tail_share(kw, k0), tail_share(a, k0)};
}

}  // namespace oracles
