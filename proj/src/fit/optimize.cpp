#include "vidprog/fit/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "vidprog/core/error.hpp"

namespace vidprog::fit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGolden = 0.3819660112501051;  // 2 - phi
constexpr double kGrow = 1.618033988749895;

struct BudgetExhausted {};

// Counts evaluations, enforces the budget and keeps the best point seen.
class Counter {
 public:
  Counter(const Objective& f, int budget) : f_(f), budget_(budget) {}

  double operator()(const std::vector<double>& x) {
    if (evaluations_ >= budget_) throw BudgetExhausted{};
    ++evaluations_;
    double v = f_(x);
    if (std::isnan(v)) v = kInf;
    if (v < best_f_ || best_x_.empty()) {
      best_x_ = x;
      best_f_ = v;
    }
    return v;
  }

  int evaluations() const noexcept { return evaluations_; }
  const std::vector<double>& best_x() const noexcept { return best_x_; }
  double best_f() const noexcept { return best_f_; }

 private:
  const Objective& f_;
  int budget_;
  int evaluations_ = 0;
  std::vector<double> best_x_;
  double best_f_ = kInf;
};

void check_start(const std::vector<double>& x0, const Box& box, const OptimizeOptions& opt) {
  if (box.lower.size() != x0.size() || box.upper.size() != x0.size()) {
    fail(ErrorCode::shape_mismatch, "start point and box differ in dimension");
  }
  for (std::size_t i = 0; i < x0.size(); ++i) {
    if (!(box.lower[i] <= box.upper[i])) fail(ErrorCode::invalid_argument, "empty box");
  }
  if (!box.contains(x0)) fail(ErrorCode::out_of_bounds, "start point outside the box");
  if (opt.max_iterations < 1 || opt.max_evaluations < opt.max_iterations) {
    fail(ErrorCode::config, "evaluation budget must be >= iterations >= 1");
  }
  if (!(opt.tolerance > 0.0)) fail(ErrorCode::config, "tolerance must be > 0");
}

OptimizeResult finish(const Counter& counter, std::vector<double> trace, int iterations,
                      StopReason reason) {
  OptimizeResult r;
  r.x = counter.best_x();
  r.f = counter.best_f();
  r.trace = std::move(trace);
  if (r.trace.empty() || r.trace.back() != r.f) r.trace.push_back(r.f);
  r.evaluations = counter.evaluations();
  r.iterations = iterations;
  r.reason = reason;
  return r;
}

std::vector<double> along(const std::vector<double>& x, const std::vector<double>& d, double t,
                          const Box& box) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = std::clamp(x[i] + t * d[i], box.lower[i], box.upper[i]);
  }
  return y;
}

// Feasible step interval [lo, hi] for x + t d inside the box.
std::pair<double, double> feasible(const std::vector<double>& x, const std::vector<double>& d,
                                   const Box& box) {
  double lo = -kInf, hi = kInf;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (d[i] > 0.0) {
      hi = std::min(hi, (box.upper[i] - x[i]) / d[i]);
      lo = std::max(lo, (box.lower[i] - x[i]) / d[i]);
    } else if (d[i] < 0.0) {
      hi = std::min(hi, (box.lower[i] - x[i]) / d[i]);
      lo = std::max(lo, (box.upper[i] - x[i]) / d[i]);
    }
  }
  return {std::min(lo, 0.0), std::max(hi, 0.0)};
}

// Minimizes f(x + t d) over the feasible interval; updates x, fx and returns
// the accepted step (0 if nothing better was found).
double line_minimize(Counter& f, std::vector<double>& x, double& fx,
                     const std::vector<double>& d, double step, const Box& box) {
  const auto [lo, hi] = feasible(x, d, box);
  if (hi - lo <= kLineTolerance) return 0.0;
  auto eval = [&](double t) { return f(along(x, d, t, box)); };
  double best_t = 0.0, best_f = fx;
  auto note = [&](double t, double v) {
    if (v < best_f) {
      best_f = v;
      best_t = t;
    }
    return v;
  };

  step = std::clamp(step, kLineTolerance, std::isfinite(hi - lo) ? hi - lo : 1.0);
  const auto [u0, v0] = [&]() -> std::pair<double, double> {
    // Bracket a < b < c in the descent direction with f(b) below both ends.
    double a = 0.0;
    double b = std::min(step, hi);
    double fb = b > 0.0 ? note(b, eval(b)) : kInf;
    double sign = 1.0;
    if (!(fb < fx)) {
      const double c = std::max(-step, lo);
      const double fc = c < 0.0 ? note(c, eval(c)) : kInf;
      if (!(fc < fx)) return {c, std::max(b, 0.0)};
      sign = -1.0;
      b = c;
      fb = fc;
    }
    const double limit = sign > 0 ? hi : lo;
    while (b != limit) {
      double next = b + kGrow * (b - a);
      next = sign > 0 ? std::min(next, limit) : std::max(next, limit);
      const double fn = note(next, eval(next));
      if (fn >= fb) return {std::min(a, next), std::max(a, next)};
      a = b;
      b = next;
      fb = fn;
    }
    return {std::min(a, b), std::max(a, b)};
  }();

  double u = u0, v = v0;
  double x1 = u + kGolden * (v - u), x2 = v - kGolden * (v - u);
  double f1 = note(x1, eval(x1)), f2 = note(x2, eval(x2));
  while (v - u > kLineTolerance) {
    if (f1 <= f2) {
      v = x2;
      x2 = x1;
      f2 = f1;
      x1 = u + kGolden * (v - u);
      f1 = note(x1, eval(x1));
    } else {
      u = x1;
      x1 = x2;
      f1 = f2;
      x2 = v - kGolden * (v - u);
      f2 = note(x2, eval(x2));
    }
  }
  if (best_t != 0.0) {
    x = along(x, d, best_t, box);
    fx = best_f;
  }
  return best_t;
}

double norm(const std::vector<double>& v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

bool Box::contains(const std::vector<double>& x) const {
  if (x.size() != lower.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
  }
  return true;
}

std::vector<double> Box::project(std::vector<double> x) const {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
  return x;
}

const char* to_string(StopReason reason) noexcept {
  switch (reason) {
    case StopReason::converged: return "converged";
    case StopReason::max_iterations: return "max-iterations";
    case StopReason::budget_exhausted: return "budget-exhausted";
    case StopReason::non_finite_start: return "non-finite-start";
  }
  return "unknown";
}

OptimizeResult powell_minimize(const Objective& objective, const std::vector<double>& x0,
                               const Box& box, const OptimizeOptions& options) {
  check_start(x0, box, options);
  Counter f(objective, options.max_evaluations);
  std::vector<double> trace;
  int iterations = 0;
  try {
    std::vector<double> x = x0;
    double fx = f(x);
    trace.push_back(fx);
    if (!std::isfinite(fx)) return finish(f, trace, 0, StopReason::non_finite_start);
    const std::size_t n = x.size();
    if (n == 0) return finish(f, trace, 0, StopReason::converged);

    std::vector<std::vector<double>> dirs(n, std::vector<double>(n, 0.0));
    std::vector<double> steps(n);
    for (std::size_t i = 0; i < n; ++i) {
      dirs[i][i] = 1.0;
      const double width = box.upper[i] - box.lower[i];
      steps[i] = std::isfinite(width) ? 0.1 * width : 0.1 * std::max(1.0, std::abs(x[i]));
    }

    while (iterations < options.max_iterations) {
      ++iterations;
      const std::vector<double> start = x;
      const double f_start = fx;
      double biggest = 0.0;
      std::size_t ibig = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double before = fx;
        const double t = line_minimize(f, x, fx, dirs[i], steps[i], box);
        if (t != 0.0) steps[i] = std::max(2.0 * std::abs(t), 1e3 * kLineTolerance);
        if (before - fx > biggest) {
          biggest = before - fx;
          ibig = i;
        }
      }
      trace.push_back(f.best_f());
      if (!(f_start - fx >= options.tolerance)) {
        return finish(f, trace, iterations, StopReason::converged);
      }

      std::vector<double> d(n), extrapolated(n);
      for (std::size_t i = 0; i < n; ++i) {
        d[i] = x[i] - start[i];
        extrapolated[i] = 2.0 * x[i] - start[i];
      }
      const double len = norm(d);
      if (len == 0.0 || !box.contains(extrapolated)) continue;
      const double fe = f(extrapolated);
      if (fe >= f_start) continue;
      const double a = f_start - fx - biggest;
      const double test = 2.0 * (f_start - 2.0 * fx + fe) * a * a -
                          biggest * (f_start - fe) * (f_start - fe);
      if (test >= 0.0) continue;
      for (auto& di : d) di /= len;
      line_minimize(f, x, fx, d, len, box);
      dirs[ibig] = dirs[n - 1];
      steps[ibig] = steps[n - 1];
      dirs[n - 1] = d;
      steps[n - 1] = len;
    }
    return finish(f, trace, iterations, StopReason::max_iterations);
  } catch (const BudgetExhausted&) {
    return finish(f, trace, iterations, StopReason::budget_exhausted);
  }
}

std::vector<double> fd_gradient(const Objective& f, const std::vector<double>& x, double fx,
                                const Box& box) {
  std::vector<double> g(x.size(), 0.0);
  std::vector<double> probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
    const bool up = x[i] + h <= box.upper[i];
    const bool down = x[i] - h >= box.lower[i];
    if (up && down) {
      probe[i] = x[i] + h;
      const double fp = f(probe);
      probe[i] = x[i] - h;
      const double fm = f(probe);
      g[i] = (fp - fm) / (2.0 * h);
    } else if (up) {
      probe[i] = x[i] + h;
      g[i] = (f(probe) - fx) / h;
    } else if (down) {
      probe[i] = x[i] - h;
      g[i] = (fx - f(probe)) / h;
    }
    probe[i] = x[i];
  }
  return g;
}

OptimizeResult lbfgs_fd_minimize(const Objective& objective, const std::vector<double>& x0,
                                 const Box& box, const OptimizeOptions& options) {
  check_start(x0, box, options);
  Counter f(objective, options.max_evaluations);
  std::vector<double> trace;
  int iterations = 0;
  try {
    std::vector<double> x = x0;
    double fx = f(x);
    trace.push_back(fx);
    if (!std::isfinite(fx)) return finish(f, trace, 0, StopReason::non_finite_start);
    const std::size_t n = x.size();
    if (n == 0) return finish(f, trace, 0, StopReason::converged);

    auto gradient = [&](const std::vector<double>& at, double fat) {
      auto g = fd_gradient(std::ref(f), at, fat, box);
      for (auto& gi : g) {
        if (!std::isfinite(gi)) gi = 0.0;
      }
      return g;
    };
    // Components pushing into an active bound are frozen.
    auto free_mask = [&](const std::vector<double>& at, const std::vector<double>& g) {
      std::vector<char> free(n, 1);
      for (std::size_t i = 0; i < n; ++i) {
        if ((at[i] <= box.lower[i] && g[i] > 0.0) || (at[i] >= box.upper[i] && g[i] < 0.0)) {
          free[i] = 0;
        }
      }
      return free;
    };

    std::deque<std::pair<std::vector<double>, std::vector<double>>> memory;  // (s, y)
    std::vector<double> g = gradient(x, fx);

    while (iterations < options.max_iterations) {
      ++iterations;
      const auto free = free_mask(x, g);
      std::vector<double> q(n);
      for (std::size_t i = 0; i < n; ++i) q[i] = free[i] ? g[i] : 0.0;
      const double pg = norm(q);
      if (pg == 0.0) {
        trace.push_back(f.best_f());
        return finish(f, trace, iterations, StopReason::converged);
      }

      // Two-loop recursion.
      std::vector<double> alpha(memory.size());
      for (std::size_t k = memory.size(); k-- > 0;) {
        const auto& [s, y] = memory[k];
        alpha[k] = dot(s, q) / dot(y, s);
        for (std::size_t i = 0; i < n; ++i) q[i] -= alpha[k] * y[i];
      }
      double gamma = 1.0 / std::max(1.0, pg);
      if (!memory.empty()) {
        const auto& [s, y] = memory.back();
        gamma = dot(s, y) / dot(y, y);
      }
      for (auto& qi : q) qi *= gamma;
      for (std::size_t k = 0; k < memory.size(); ++k) {
        const auto& [s, y] = memory[k];
        const double beta = dot(y, q) / dot(y, s);
        for (std::size_t i = 0; i < n; ++i) q[i] += s[i] * (alpha[k] - beta);
      }
      std::vector<double> d(n);
      for (std::size_t i = 0; i < n; ++i) d[i] = free[i] ? -q[i] : 0.0;
      if (!(dot(d, g) < 0.0)) {
        memory.clear();
        for (std::size_t i = 0; i < n; ++i) d[i] = free[i] ? -g[i] / std::max(1.0, pg) : 0.0;
      }

      // Projected Armijo backtracking.
      double step = 1.0;
      bool accepted = false;
      std::vector<double> xn;
      double fn = fx;
      for (int k = 0; k < 60; ++k, step *= 0.5) {
        xn = box.project(along(x, d, step, box));
        if (xn == x) break;
        fn = f(xn);
        std::vector<double> delta(n);
        for (std::size_t i = 0; i < n; ++i) delta[i] = xn[i] - x[i];
        if (std::isfinite(fn) && fn <= fx + kArmijo * dot(g, delta)) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        trace.push_back(f.best_f());
        if (!memory.empty()) {
          memory.clear();
          continue;
        }
        return finish(f, trace, iterations, StopReason::converged);
      }

      const double decrease = fx - fn;
      const auto gn = gradient(xn, fn);
      std::vector<double> s(n), y(n);
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = xn[i] - x[i];
        y[i] = gn[i] - g[i];
      }
      if (dot(s, y) > 1e-12 * dot(s, s) + 1e-300) {
        memory.emplace_back(std::move(s), std::move(y));
        if (memory.size() > static_cast<std::size_t>(kLbfgsMemory)) memory.pop_front();
      }
      x = std::move(xn);
      fx = fn;
      g = gn;
      trace.push_back(f.best_f());
      if (decrease < options.tolerance) return finish(f, trace, iterations, StopReason::converged);
    }
    return finish(f, trace, iterations, StopReason::max_iterations);
  } catch (const BudgetExhausted&) {
    return finish(f, trace, iterations, StopReason::budget_exhausted);
  }
}

}  // namespace vidprog::fit
