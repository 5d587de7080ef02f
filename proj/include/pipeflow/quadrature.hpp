#pragma once

// Gauss-Legendre panels with adaptive bisection, plus a uniform composite rule
// for refinement studies.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <queue>
#include <tuple>
#include <vector>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>

namespace pipeflow {

struct QuadratureSpec {
  double rel_tol = 1e-6;
  double abs_tol = 0.0;
  int max_depth = 30;
  int nodes_per_panel = 8;
  int initial_panels = 4;

  void validate() const {
    if (!(rel_tol > 0.0)) throw std::invalid_argument("QuadratureSpec: rel_tol must be > 0");
    if (!(abs_tol >= 0.0)) throw std::invalid_argument("QuadratureSpec: abs_tol must be >= 0");
    if (max_depth < 1) throw std::invalid_argument("QuadratureSpec: max_depth must be >= 1");
    if (nodes_per_panel < 1 || nodes_per_panel > 64) {
      throw std::invalid_argument("QuadratureSpec: nodes_per_panel must be in [1, 64]");
    }
    if (initial_panels < 1) throw std::invalid_argument("QuadratureSpec: initial_panels must be >= 1");
  }
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0; ///< sum of |fine - coarse| over accepted panels
  long evaluations = 0;
  bool converged = true;
};

class QuadratureError : public std::runtime_error {
public:
  QuadratureError(const std::string& what, double estimate, double error_bound)
      : std::runtime_error(what + " (estimate " + std::to_string(estimate) + ", error bound " +
                           std::to_string(error_bound) + ")"),
        estimate_(estimate), error_bound_(error_bound) {}

  double estimate() const noexcept { return estimate_; }
  double error_bound() const noexcept { return error_bound_; }

private:
  double estimate_;
  double error_bound_;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Golub-Welsch).
class GaussLegendreRule {
public:
  explicit GaussLegendreRule(int n) {
    if (n < 1) throw std::invalid_argument("GaussLegendreRule: n must be >= 1");
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
      const double beta = k / std::sqrt(4.0 * k * k - 1.0);
      jacobi(k, k - 1) = beta;
      jacobi(k - 1, k) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    nodes_ = eig.eigenvalues();
    weights_ = 2.0 * eig.eigenvectors().row(0).transpose().array().square().matrix();
  }

  int size() const noexcept { return static_cast<int>(nodes_.size()); }
  const Eigen::VectorXd& nodes() const noexcept { return nodes_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }

  template <typename F>
  double apply(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < nodes_.size(); ++i) sum += weights_(i) * f(mid + half * nodes_(i));
    return half * sum;
  }

private:
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;
};

/// Shared, lazily built rule; references stay valid for the program lifetime.
inline const GaussLegendreRule& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, GaussLegendreRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, GaussLegendreRule(n)).first;
  return it->second;
}

namespace detail {

struct Panel {
  double a, b;
  double left, right; ///< rule applied to each half
  double coarse;      ///< rule applied to [a, b]
  int depth;

  double fine() const noexcept { return left + right; }
  double error() const noexcept { return std::abs(fine() - coarse); }
  bool operator<(const Panel& other) const noexcept { return error() < other.error(); }
};

} // namespace detail

/// Globally adaptive integration: the panel with the largest local error
/// estimate |fine - coarse| is bisected until the summed estimate drops below
/// max(rel_tol * |I|, abs_tol). Panels at max_depth are frozen.
template <typename F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, const QuadratureSpec& spec) {
  spec.validate();
  QuadratureResult result;
  if (a == b) return result;
  const GaussLegendreRule& rule = gauss_legendre(spec.nodes_per_panel);

  auto apply = [&](double lo, double hi) {
    result.evaluations += rule.size();
    return rule.apply(f, lo, hi);
  };
  auto make_panel = [&](double lo, double hi, double coarse, int depth) {
    const double mid = 0.5 * (lo + hi);
    return detail::Panel{lo, hi, apply(lo, mid), apply(mid, hi), coarse, depth};
  };

  std::priority_queue<detail::Panel> active;
  std::vector<detail::Panel> frozen;
  const int n0 = spec.initial_panels;
  const double width = (b - a) / n0;
  for (int i = 0; i < n0; ++i) {
    const double lo = a + i * width;
    const double hi = (i + 1 == n0) ? b : lo + width;
    active.push(make_panel(lo, hi, apply(lo, hi), 0));
  }

  auto totals = [&] {
    double value = 0.0, error = 0.0;
    auto copy = active;
    for (; !copy.empty(); copy.pop()) {
      value += copy.top().fine();
      error += copy.top().error();
    }
    for (const auto& p : frozen) {
      value += p.fine();
      error += p.error();
    }
    return std::pair{value, error};
  };

  auto [value, error] = totals();
  long iterations = 0;
  while (!active.empty() && error > std::max(spec.rel_tol * std::abs(value), spec.abs_tol)) {
    const detail::Panel worst = active.top();
    active.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (worst.depth >= spec.max_depth || !(mid > worst.a && mid < worst.b)) {
      frozen.push_back(worst);
      continue;
    }
    const detail::Panel lo = make_panel(worst.a, mid, worst.left, worst.depth + 1);
    const detail::Panel hi = make_panel(mid, worst.b, worst.right, worst.depth + 1);
    value += lo.fine() + hi.fine() - worst.fine();
    error += lo.error() + hi.error() - worst.error();
    active.push(lo);
    active.push(hi);
    // Incremental sums drift; resynchronise now and then.
    if (++iterations % 256 == 0) std::tie(value, error) = totals();
  }
  std::tie(value, error) = totals();
  result.value = value;
  result.error = error;
  result.converged = error <= std::max(spec.rel_tol * std::abs(value), spec.abs_tol);
  return result;
}

/// Adaptive integral; throws QuadratureError when max_depth is hit before the
/// tolerance is met.
template <typename F>
double integrate(F&& f, double a, double b, const QuadratureSpec& spec) {
  const QuadratureResult r = integrate_adaptive(std::forward<F>(f), a, b, spec);
  if (!r.converged) {
    throw QuadratureError("integrate: no convergence at max depth " +
                              std::to_string(spec.max_depth),
                          r.value, r.error);
  }
  return r.value;
}

/// Composite rule on `panels` equal panels.
template <typename F>
double integrate_uniform(F&& f, double a, double b, int panels, int nodes_per_panel) {
  if (panels < 1) throw std::invalid_argument("integrate_uniform: panels must be >= 1");
  const GaussLegendreRule& rule = gauss_legendre(nodes_per_panel);
  const double width = (b - a) / panels;
  double sum = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double lo = a + i * width;
    const double hi = (i + 1 == panels) ? b : lo + width;
    sum += rule.apply(f, lo, hi);
  }
  return sum;
}

} // namespace pipeflow
