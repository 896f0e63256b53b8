#include "spiked/quadrature.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "spiked/errors.hpp"

namespace spiked {
namespace {

struct Simpson {
  const std::function<double(double)>& f;
  const QuadratureOptions& opts;
  bool failed = false;

  double recurse(double a, double b, double fa, double fm, double fb,
                 double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (!std::isfinite(delta)) {
      failed = true;
      return left + right;
    }
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth >= opts.max_depth) {
      failed = true;
      return left + right + delta / 15.0;
    }
    return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
  }
};

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts) {
  if (b <= a) return 0.0;
  const int panels = std::max(1, opts.panels);
  const double width = (b - a) / panels;

  // Coarse pass gives the scale for the relative tolerance.
  std::vector<double> nodes(2 * panels + 1);
  for (int i = 0; i <= 2 * panels; ++i) nodes[i] = f(a + 0.5 * width * i);
  double coarse = 0.0;
  for (int p = 0; p < panels; ++p)
    coarse += width / 6.0 * (nodes[2 * p] + 4.0 * nodes[2 * p + 1] + nodes[2 * p + 2]);
  const double tol = std::max(opts.abs_tol, opts.rel_tol * std::abs(coarse));

  Simpson s{f, opts};
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + width * p;
    const double whole = width / 6.0 * (nodes[2 * p] + 4.0 * nodes[2 * p + 1] + nodes[2 * p + 2]);
    total += s.recurse(lo, lo + width, nodes[2 * p], nodes[2 * p + 1], nodes[2 * p + 2],
                       whole, tol / panels, 0);
  }
  if (s.failed || !std::isfinite(total))
    throw QuadratureNonConvergence("adaptive Simpson did not reach tolerance on [" +
                                   std::to_string(a) + ", " + std::to_string(b) + "]");
  return total;
}

double integrate_real_line(const std::function<double(double)>& f, double core,
                           const QuadratureOptions& opts) {
  double half = std::max(core, 1.0);
  double total = integrate(f, -half, half, opts);
  for (int grow = 0; grow < 60; ++grow) {
    const double edge = std::max(std::abs(f(-half)), std::abs(f(half)));
    if (edge * half <= 1e-12 * std::abs(total) || (total == 0.0 && edge == 0.0)) return total;
    const double next = half * 1.5;
    QuadratureOptions tail = opts;
    tail.panels = std::max(8, opts.panels / 4);
    total += integrate(f, -next, -half, tail) + integrate(f, half, next, tail);
    half = next;
  }
  throw QuadratureNonConvergence("integrand tail does not decay");
}

}  // namespace spiked
