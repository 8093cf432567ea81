#pragma once

#include <functional>
#include <span>
#include <vector>

namespace adrsig {

struct SimplexOptions {
  double ftol_rel = 1e-8;  // stop when the vertex value spread is below ftol_rel * (|f_best| + ftol_rel)
  double xtol = 1e-8;      // ... and every vertex lies within xtol of the best, coordinate-wise
  int max_iterations = 2000;
  double initial_step = 0.5;
  int restarts = 1;  // fresh simplices built around the converged point
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Derivative-free minimisation (Nelder-Mead with standard coefficients:
/// reflection 1, expansion 2, contraction 1/2, shrink 1/2). Non-finite
/// objective values are treated as +infinity.
SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                          std::span<const double> start, const SimplexOptions& options = {});

}  // namespace adrsig
