#include "spiked/detect.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "spiked/eigen_extreme.hpp"
#include "spiked/errors.hpp"

namespace spiked {
namespace {

constexpr double kSearchCap = 1e7;

std::optional<double> squared_cosine(const Eigen::VectorXd& v, const Eigen::VectorXd& spike) {
  if (spike.size() != v.size() || spike.norm() == 0.0) return std::nullopt;
  const double c = v.dot(spike) / (v.norm() * spike.norm());
  return c * c;
}

// Calls visit(assignment) for every assignment with g_1 = identity.
template <class Visit>
void for_each_assignment(const GroupSpec& group, int n, Visit&& visit) {
  if (group.is_circle()) throw SearchSpaceTooLarge("exhaustive search over U(1) is infinite");
  const int L = group.order();
  if ((n - 1) * std::log(static_cast<double>(L)) > std::log(kSearchCap) + 1e-12)
    throw SearchSpaceTooLarge("L^(n-1) exceeds 1e7 candidates");
  std::vector<int> digits(n, 0);
  std::vector<GroupElement> g(n, group.identity());
  for (;;) {
    visit(static_cast<const std::vector<GroupElement>&>(g));
    int pos = 1;
    while (pos < n && ++digits[pos] == L) {
      digits[pos] = 0;
      g[pos] = group.element(0);
      ++pos;
    }
    if (pos >= n) return;
    g[pos] = group.element(digits[pos]);
    for (int k = 1; k < pos; ++k) g[k] = group.element(0);
  }
}

}  // namespace

DetectionOutcome pca_detect(const SampleBundle& bundle, std::optional<double> threshold) {
  if (bundle.matrix.size() == 0) throw DomainError("pca_detect needs a matrix observation");
  const auto pair = extreme_eigenpair(bundle.matrix, Extreme::largest);
  DetectionOutcome out;
  out.statistic = pair.value;
  out.threshold = threshold.value_or(2.0 + std::pow(static_cast<double>(bundle.n), -1.0 / 3.0));
  out.spiked = out.statistic > out.threshold;
  out.witness = pair.vector;
  out.correlation = squared_cosine(pair.vector, bundle.spike);
  return out;
}

double pretransformed_threshold(double fisher, int n) {
  return std::sqrt(fisher) * (2.0 + std::pow(static_cast<double>(n), -1.0 / 3.0));
}

DetectionOutcome pretransformed_pca(const SampleBundle& bundle, const NoiseModel& noise,
                                    std::optional<double> threshold) {
  if (bundle.matrix.size() == 0) throw DomainError("pretransformed_pca needs a matrix observation");
  const double root_n = std::sqrt(static_cast<double>(bundle.n));
  Eigen::MatrixXd transformed = apply_score(noise, root_n * bundle.matrix);
  transformed.diagonal().setZero();
  const auto pair = extreme_eigenpair(transformed, Extreme::largest);
  DetectionOutcome out;
  out.statistic = pair.value / root_n;
  out.threshold = threshold.value_or(pretransformed_threshold(fisher_information(noise), bundle.n));
  out.spiked = out.statistic > out.threshold;
  out.witness = pair.vector;
  out.correlation = squared_cosine(pair.vector, bundle.spike);
  return out;
}

double toh_statistic(const Eigen::MatrixXi& observation, const GroupSpec& group,
                     const std::vector<GroupElement>& assignment) {
  const auto n = static_cast<int>(assignment.size());
  std::vector<int> inv(n);
  for (int v = 0; v < n; ++v) inv[v] = group.inverse(assignment[v]).index;
  const Eigen::MatrixXi& table = group.table();
  int count = 0;
  for (int v = 1; v < n; ++v)
    for (int u = 0; u < v; ++u) count += observation(u, v) == table(assignment[u].index, inv[v]);
  return count;
}

double toh_asymptotic_threshold(int n, int order, double p) {
  const double edges = 0.5 * n * (n - 1.0);
  const double p_match = p + (1.0 - p) / order;
  return edges * p_match - n * std::log(static_cast<double>(n));
}

DetectionOutcome toh_exhaustive_test(const SampleBundle& bundle, const GroupSpec& group,
                                     std::optional<double> threshold) {
  if (bundle.group_matrix.size() == 0) throw DomainError("toh test needs a group-valued observation");
  DetectionOutcome out;
  out.statistic = -1.0;
  for_each_assignment(group, bundle.n, [&](const std::vector<GroupElement>& g) {
    const double t = toh_statistic(bundle.group_matrix, group, g);
    if (t > out.statistic) {
      out.statistic = t;
      out.group_witness = g;
    }
  });
  const double p = bundle.params.count("p") ? bundle.params.at("p") : 0.0;
  out.threshold = threshold.value_or(toh_asymptotic_threshold(bundle.n, group.order(), p));
  out.spiked = out.statistic > out.threshold;
  if (!threshold) out.note = "asymptotic threshold; calibrate for small n";
  return out;
}

double gsynch_statistic(const SampleBundle& bundle, const std::vector<double>& lambdas,
                        const std::vector<GroupElement>& assignment) {
  double total = 0.0;
  for (std::size_t k = 0; k < bundle.reps.size(); ++k) {
    const auto& rep = bundle.reps[k];
    const Eigen::MatrixXcd v = stacked_representation(rep, assignment);
    const double trace = (v.adjoint() * bundle.channels[k] * v).trace().real();
    // The complex embedding doubles quaternionic traces.
    const double base_trace = trace * rep.dim / rep.complex_dim();
    total += lambdas[k] * rep.beta() * rep.dim * base_trace;
  }
  return total;
}

double gsynch_asymptotic_threshold(int n, const std::vector<double>& lambdas,
                                   const std::vector<RepresentationSpec>& reps) {
  double mean = 0.0;
  for (std::size_t k = 0; k < reps.size(); ++k)
    mean += n * lambdas[k] * lambdas[k] * reps[k].beta() * reps[k].dim * reps[k].dim;
  return mean - std::sqrt(n * std::log(static_cast<double>(n)));
}

DetectionOutcome gsynch_exhaustive_test(const SampleBundle& bundle, const GroupSpec& group,
                                        const std::vector<double>& lambdas,
                                        std::optional<double> threshold) {
  if (bundle.channels.empty()) throw DomainError("gsynch test needs frequency channels");
  if (lambdas.size() != bundle.reps.size()) throw ConfigError("one lambda per frequency is required");
  // Cache rho(g) per element so the inner loop is a sum of small products.
  const int L = group.order();
  std::vector<std::vector<Eigen::MatrixXcd>> cache(bundle.reps.size());
  for (std::size_t k = 0; k < bundle.reps.size(); ++k)
    for (int g = 0; g < L; ++g) cache[k].push_back(bundle.reps[k].matrix(group.element(g)));

  DetectionOutcome out;
  out.statistic = -std::numeric_limits<double>::infinity();
  const int n = bundle.n;
  for_each_assignment(group, n, [&](const std::vector<GroupElement>& g) {
    double total = 0.0;
    for (std::size_t k = 0; k < bundle.reps.size(); ++k) {
      const auto& rep = bundle.reps[k];
      const int dc = rep.complex_dim();
      const Eigen::MatrixXcd& y = bundle.channels[k];
      double trace = 0.0;
      if (dc == 1) {
        for (int v = 0; v < n; ++v) {
          cplx acc = 0.0;
          for (int u = 0; u < n; ++u) acc += std::conj(cache[k][g[u].index](0, 0)) * y(u, v);
          trace += (acc * cache[k][g[v].index](0, 0)).real();
        }
      } else {
        for (int u = 0; u < n; ++u)
          for (int v = 0; v < n; ++v)
            trace += (cache[k][g[u].index].adjoint() * y.block(u * dc, v * dc, dc, dc) *
                      cache[k][g[v].index]).trace().real();
      }
      total += lambdas[k] * rep.beta() * rep.dim * trace * rep.dim / dc;
    }
    if (total > out.statistic) {
      out.statistic = total;
      out.group_witness = g;
    }
  });
  out.threshold = threshold.value_or(gsynch_asymptotic_threshold(n, lambdas, bundle.reps));
  out.spiked = out.statistic > out.threshold;
  if (!threshold) out.note = "asymptotic threshold; calibrate for small n";
  return out;
}

DetectionOutcome wishart_min_quadratic_test(const SampleBundle& bundle, const FiniteLaw& support,
                                            double beta, double gamma, double eps,
                                            std::optional<double> threshold) {
  const Eigen::MatrixXd& y = bundle.matrix;
  const int n = static_cast<int>(y.rows());
  if (n < 1 || y.cols() != n) throw DomainError("min-quadratic test needs a square Gram matrix");
  if (n > 22) throw SearchSpaceTooLarge("min-quadratic enumeration supports n <= 22");
  const double nn = static_cast<double>(n) * n;
  DetectionOutcome out;
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_s;

  const bool pm_one = support.size() == 2 && support.values[0] == -support.values[1];
  if (pm_one) {
    // Gray-code walk over sign patterns with s_0 = +1; each flip updates the
    // quadratic form in O(n).
    const double a = support.values[1];
    Eigen::VectorXd s = Eigen::VectorXd::Constant(n, a);
    Eigen::VectorXd ys = y * s;
    double q = s.dot(ys);
    best = q;
    best_s = s;
    const std::uint64_t total = std::uint64_t{1} << (n - 1);
    for (std::uint64_t step = 1; step < total; ++step) {
      const int bit = 1 + std::countr_zero(step);
      const double si = s(bit);
      q += -4.0 * si * ys(bit) + 4.0 * si * si * y(bit, bit);
      ys.noalias() -= 2.0 * si * y.col(bit);
      s(bit) = -si;
      if ((step & 0xffff) == 0) {
        ys.noalias() = y * s;
        q = s.dot(ys);
      }
      if (q < best) {
        best = q;
        best_s = s;
      }
    }
  } else {
    const double count = std::pow(static_cast<double>(support.size()), n);
    if (count > kSearchCap) throw SearchSpaceTooLarge("support^n exceeds 1e7 candidates");
    std::vector<std::size_t> digits(n, 0);
    Eigen::VectorXd s(n);
    for (;;) {
      for (int i = 0; i < n; ++i) s(i) = support.values[digits[i]];
      const double q = s.dot(y * s);
      if (q < best && s.squaredNorm() > 0.0) {
        best = q;
        best_s = s;
      }
      int pos = 0;
      while (pos < n && ++digits[pos] == support.size()) digits[pos++] = 0;
      if (pos == n) break;
    }
  }
  out.statistic = best / nn;
  out.threshold = threshold.value_or((1.0 + beta + eps) / gamma);
  out.spiked = out.statistic < out.threshold;
  out.witness = best_s / std::sqrt(static_cast<double>(n));
  out.correlation = squared_cosine(out.witness, bundle.spike);
  if (beta == 0.0) out.note = "uninformative: beta = 0 plants nothing";
  return out;
}

double calibrate_threshold(const std::function<double(std::uint64_t)>& null_statistic, int draws,
                           double level, std::uint64_t seed, bool upper_tail) {
  if (draws < 2) throw DomainError("calibration needs at least two draws");
  std::vector<double> stats(draws);
  for (int i = 0; i < draws; ++i) stats[i] = null_statistic(mix_seed(seed, static_cast<std::uint64_t>(i)));
  std::sort(stats.begin(), stats.end());
  const double q = upper_tail ? level : 1.0 - level;
  // Linear interpolation between order statistics.
  const double pos = q * (draws - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min<std::size_t>(lo + 1, stats.size() - 1);
  return stats[lo] + (pos - lo) * (stats[hi] - stats[lo]);
}

PowerPoint power_point(const std::function<DetectionOutcome(std::uint64_t, bool)>& detect,
                       double parameter, int trials, std::uint64_t seed) {
  if (trials < 1) throw DomainError("power study needs at least one trial");
  PowerPoint pt;
  pt.parameter = parameter;
  pt.trials = trials;
  int alarms = 0, misses = 0;
  for (int t = 0; t < trials; ++t) {
    const DetectionOutcome planted = detect(mix_seed(seed, 2 * static_cast<std::uint64_t>(t)), true);
    const DetectionOutcome null = detect(mix_seed(seed, 2 * static_cast<std::uint64_t>(t) + 1), false);
    misses += !planted.spiked;
    alarms += null.spiked;
    pt.threshold = planted.threshold;
  }
  pt.type_one = static_cast<double>(alarms) / trials;
  pt.type_two = static_cast<double>(misses) / trials;
  return pt;
}

}  // namespace spiked
