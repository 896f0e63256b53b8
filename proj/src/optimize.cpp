#include "spiked/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "spiked/errors.hpp"

namespace spiked {

ScalarOptimum golden_section_max(const std::function<double(double)>& f,
                                 double lo, double hi, double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  ScalarOptimum best{c, fc};
  if (fd > best.value) best = {d, fd};
  for (double end : {lo, hi}) {
    const double fe = f(end);
    if (fe > best.value) best = {end, fe};
  }
  return best;
}

ScalarOptimum grid_then_golden_max(const std::function<double(double)>& f,
                                   double lo, double hi, double step, double tol) {
  const auto count = static_cast<long>(std::ceil((hi - lo) / step));
  long best_i = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (long i = 0; i <= count; ++i) {
    const double t = std::min(hi, lo + step * i);
    const double v = f(t);
    if (v > best_v) {
      best_v = v;
      best_i = i;
    }
  }
  const double a = std::max(lo, lo + step * (best_i - 1));
  const double b = std::min(hi, lo + step * (best_i + 1));
  ScalarOptimum refined = golden_section_max(f, a, b, tol);
  if (refined.value < best_v) refined = {std::min(hi, lo + step * best_i), best_v};
  return refined;
}

double bisect(const std::function<double(double)>& f, double lo, double hi,
              double tol, int max_iter) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) throw NonConvergence("bisect: no sign change on bracket");
  for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

SimplexResult nelder_mead_max(const std::function<double(const Eigen::VectorXd&)>& f,
                              const Eigen::VectorXd& start, const SimplexOptions& opts) {
  const Eigen::Index dim = start.size();
  std::vector<Eigen::VectorXd> pts(dim + 1, start);
  std::vector<double> vals(dim + 1);
  for (Eigen::Index i = 0; i < dim; ++i) pts[i + 1](i) += opts.initial_step;
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    const double v = f(x);
    return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
  };
  for (Eigen::Index i = 0; i <= dim; ++i) vals[i] = eval(pts[i]);

  std::vector<Eigen::Index> order(dim + 1);
  while (evals < opts.max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] > vals[b]; });
    const auto best = order.front();
    const auto worst = order.back();
    const auto second = order[dim - 1 >= 0 ? dim - 1 : 0];

    double spread = 0.0;
    for (Eigen::Index i = 0; i <= dim; ++i)
      spread = std::max(spread, (pts[i] - pts[best]).lpNorm<Eigen::Infinity>());
    const double fspread = vals[best] - vals[worst];
    if (spread < opts.x_tol && std::isfinite(fspread) &&
        fspread <= opts.f_tol * std::max(1.0, std::abs(vals[best])))
      break;
    if (spread < 1e-15) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index i = 0; i <= dim; ++i)
      if (i != worst) centroid += pts[i];
    centroid /= static_cast<double>(dim);

    const Eigen::VectorXd reflected = centroid + (centroid - pts[worst]);
    const double fr = eval(reflected);
    if (fr > vals[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = eval(expanded);
      if (fe > fr) {
        pts[worst] = expanded;
        vals[worst] = fe;
      } else {
        pts[worst] = reflected;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr > vals[second]) {
      pts[worst] = reflected;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr > vals[worst];
    const Eigen::VectorXd contracted =
        outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = eval(contracted);
    if (fc > (outside ? fr : vals[worst])) {
      pts[worst] = contracted;
      vals[worst] = fc;
      continue;
    }
    for (Eigen::Index i = 0; i <= dim; ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
      vals[i] = eval(pts[i]);
    }
  }
  const auto it = std::max_element(vals.begin(), vals.end());
  return {pts[it - vals.begin()], *it, evals};
}

}  // namespace spiked
