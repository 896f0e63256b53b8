#pragma once

#include <cmath>
#include <functional>

namespace spiked {

struct QuadratureOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  int max_depth = 50;
  int panels = 64;
};

// Adaptive Simpson over [a, b], split into uniform panels first so that narrow
// peaks are not skipped by the initial five-point estimate.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts = {});

// Integral over the real line. The window [-T, T] is widened until the
// integrand on the boundary is below 1e-12 of the running total; the
// integrand must decay monotonically outside `core`.
double integrate_real_line(const std::function<double(double)>& f, double core,
                           const QuadratureOptions& opts = {});

}  // namespace spiked
