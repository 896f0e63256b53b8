#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace spiked {

struct ScalarOptimum {
  double argmax = 0.0;
  double value = 0.0;
};

// Golden-section maximization of a unimodal function on [lo, hi].
ScalarOptimum golden_section_max(const std::function<double(double)>& f,
                                 double lo, double hi, double tol = 1e-12);

// Grid scan over [lo, hi] with the given step, then golden-section refinement
// around the best grid cell.
ScalarOptimum grid_then_golden_max(const std::function<double(double)>& f,
                                   double lo, double hi, double step,
                                   double tol = 1e-12);

// Root of a function with a sign change on [lo, hi].
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double tol = 1e-13, int max_iter = 200);

struct SimplexOptions {
  double initial_step = 0.05;
  double x_tol = 1e-11;
  double f_tol = 1e-14;
  int max_evals = 20000;
};

struct SimplexResult {
  Eigen::VectorXd argmax;
  double value = 0.0;
  int evaluations = 0;
};

// Nelder-Mead maximization. Infeasible points should return -infinity.
SimplexResult nelder_mead_max(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& start, const SimplexOptions& opts = {});

}  // namespace spiked
