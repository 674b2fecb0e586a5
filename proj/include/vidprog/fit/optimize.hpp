#pragma once

#include <functional>
#include <vector>

namespace vidprog::fit {

using Objective = std::function<double(const std::vector<double>&)>;

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const noexcept { return lower.size(); }
  bool contains(const std::vector<double>& x) const;
  std::vector<double> project(std::vector<double> x) const;
};

struct OptimizeOptions {
  int max_iterations = 200;
  int max_evaluations = 20000;
  double tolerance = 1e-10;  // on the per-iteration loss decrease
};

enum class StopReason { converged, max_iterations, budget_exhausted, non_finite_start };

const char* to_string(StopReason reason) noexcept;

struct OptimizeResult {
  std::vector<double> x;
  double f = 0.0;
  std::vector<double> trace;  // best-so-far after each iteration, trace[0] at x0
  int evaluations = 0;
  int iterations = 0;
  StopReason reason = StopReason::converged;

  bool flagged() const noexcept {
    return reason == StopReason::budget_exhausted || reason == StopReason::non_finite_start;
  }
};

inline constexpr double kLineTolerance = 1e-8;
inline constexpr int kLbfgsMemory = 10;
inline constexpr double kArmijo = 1e-4;

// Powell's conjugate directions with bounded golden-section line searches.
OptimizeResult powell_minimize(const Objective& f, const std::vector<double>& x0, const Box& box,
                               const OptimizeOptions& options = {});

// L-BFGS on central-difference gradients with projection onto the box.
OptimizeResult lbfgs_fd_minimize(const Objective& f, const std::vector<double>& x0,
                                 const Box& box, const OptimizeOptions& options = {});

// Central differences with h_i = 1e-6 * max(1, |x_i|); one-sided where a
// central stencil would leave the box. fx is f(x), used by one-sided steps.
std::vector<double> fd_gradient(const Objective& f, const std::vector<double>& x, double fx,
                                const Box& box);

}  // namespace vidprog::fit
