#include "spiked/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "spiked/errors.hpp"
#include "spiked/optimize.hpp"
#include "spiked/parse.hpp"

namespace spiked {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Neumaier {
  double sum = 0.0, carry = 0.0;
  void add(double x) {
    const double t = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

// Distribution of sum_i pi_i pi'_i over an integer lattice, when the product
// law lives on multiples of a common unit.
struct OverlapLattice {
  double unit = 1.0;
  long offset = 0;
  std::vector<double> probs;  // probs[k] = P(sum = (k - offset) * unit)
};

std::optional<OverlapLattice> overlap_lattice(const FiniteLaw& law, int n) {
  const FiniteLaw prod = product_law(law);
  double unit = kInf;
  for (double v : prod.values)
    if (std::abs(v) > 1e-12) unit = std::min(unit, std::abs(v));
  if (!std::isfinite(unit)) return std::nullopt;
  std::vector<long> steps;
  long reach = 0;
  for (double v : prod.values) {
    const double r = v / unit;
    if (std::abs(r - std::round(r)) > 1e-9) return std::nullopt;
    steps.push_back(std::lround(r));
    reach = std::max(reach, std::abs(steps.back()));
  }
  const long width = 2 * reach * n + 1;
  if (static_cast<double>(width) * n * steps.size() > 5e7) return std::nullopt;
  OverlapLattice lat;
  lat.unit = unit;
  lat.offset = reach * n;
  lat.probs.assign(width, 0.0);
  lat.probs[lat.offset] = 1.0;
  std::vector<double> next(width);
  for (int i = 0; i < n; ++i) {
    std::fill(next.begin(), next.end(), 0.0);
    for (long k = 0; k < width; ++k) {
      if (lat.probs[k] == 0.0) continue;
      for (std::size_t j = 0; j < steps.size(); ++j) {
        const long to = k + steps[j];
        if (to >= 0 && to < width) next[to] += lat.probs[k] * prod.probs[j];
      }
    }
    lat.probs.swap(next);
  }
  return lat;
}

template <class Term>
SecondMomentValue lattice_moment(const OverlapLattice& lat, int n, Term&& log_term) {
  // log-sum-exp over the lattice; log_term returns +inf for divergent atoms.
  double top = -kInf;
  std::vector<double> logs(lat.probs.size(), -kInf);
  for (std::size_t k = 0; k < lat.probs.size(); ++k) {
    if (lat.probs[k] <= 0.0) continue;
    const double overlap = lat.unit * (static_cast<long>(k) - lat.offset) / n;
    const double lt = log_term(overlap);
    if (lt == kInf) return {kInf, n, MomentEstimator::exact, 0.0};
    logs[k] = std::log(lat.probs[k]) + lt;
    top = std::max(top, logs[k]);
  }
  Neumaier s;
  for (double l : logs)
    if (l > -kInf) s.add(std::exp(l - top));
  return {std::exp(top) * s.value(), n, MomentEstimator::exact, 0.0};
}

template <class Term>
SecondMomentValue monte_carlo_moment(const SpikePrior& prior, int n, const MomentOptions& opts,
                                     Term&& term) {
  if (opts.trials < 2) throw DomainError("Monte Carlo needs at least two trials");
  Rng rng = make_rng(opts.seed);
  Neumaier sum, sq;
  for (long t = 0; t < opts.trials; ++t) {
    const Eigen::VectorXd x = sample_spike(prior, n, rng);
    const Eigen::VectorXd y = sample_spike(prior, n, rng);
    const double v = term(x.dot(y));
    if (!std::isfinite(v)) return {kInf, n, MomentEstimator::monte_carlo, 0.0};
    sum.add(v);
    sq.add(v * v);
  }
  const double m = sum.value() / opts.trials;
  const double var = std::max(0.0, sq.value() / opts.trials - m * m) * opts.trials / (opts.trials - 1);
  return {m, n, MomentEstimator::monte_carlo, std::sqrt(var / opts.trials)};
}

// 10^4 uniform points of (0, 1) plus a refinement towards t = 1. Both
// inequalities are tight at t = 0, where the leading series coefficient is
// used instead of raw differences.
std::vector<double> inequality_grid() {
  constexpr int kPoints = 10000;
  std::vector<double> t;
  t.reserve(kPoints + 8);
  for (int i = 1; i <= kPoints; ++i) t.push_back(static_cast<double>(i) / (kPoints + 1));
  for (int k = 5; k <= 12; ++k) t.push_back(1.0 - std::pow(10.0, -k));
  return t;
}

}  // namespace

std::string to_string(ThresholdMethod m) {
  switch (m) {
    case ThresholdMethod::closed_form: return "closed_form";
    case ThresholdMethod::subgaussian: return "subgaussian";
    case ThresholdMethod::conditioning: return "conditioning";
    case ThresholdMethod::rate_function: return "rate_function";
    case ThresholdMethod::upper_bound: return "upper_bound";
    case ThresholdMethod::noise_conditioned: return "noise_conditioned";
  }
  return "?";
}

std::string to_string(MomentEstimator e) {
  switch (e) {
    case MomentEstimator::exact: return "exact";
    case MomentEstimator::series: return "series";
    case MomentEstimator::monte_carlo: return "monte_carlo";
  }
  return "?";
}

bool SecondMomentValue::finite() const { return std::isfinite(value); }

SecondMomentValue second_moment_gwig(const SpikePrior& prior, double lambda, int n,
                                     const MomentOptions& opts) {
  if (n < 1) throw DomainError("n must be positive");
  const double scale = 0.5 * n * lambda * lambda;
  if (prior.kind == PriorKind::iid_finite && !opts.force_monte_carlo && n <= 1000) {
    if (auto lat = overlap_lattice(*prior.marginal, n))
      return lattice_moment(*lat, n, [&](double o) { return scale * o * o; });
  }
  return monte_carlo_moment(prior, n, opts, [&](double o) { return std::exp(scale * o * o); });
}

double kummer_series(double a, double b, double z) {
  if (b <= 0.0) throw DomainError("kummer_series needs b > 0");
  if (z < 0.0) throw DomainError("kummer_series is used for z >= 0 only");
  Neumaier sum;
  double term = 1.0;
  sum.add(term);
  for (long k = 0; k < 10000000; ++k) {
    term *= (a + k) / (b + k) * z / (k + 1.0);
    if (!std::isfinite(term) || term > 1e300) throw SeriesDivergence("Kummer series overflow");
    sum.add(term);
    if (k > z && term <= 1e-12 * sum.value()) return sum.value();
  }
  throw SeriesDivergence("Kummer series did not converge");
}

SecondMomentValue second_moment_spherical_exact(int n, double lambda) {
  if (n < 2) throw DomainError("spherical second moment needs n >= 2");
  return {kummer_series(0.5, 0.5 * n, 0.5 * lambda * lambda * n), n, MomentEstimator::series, 0.0};
}

double second_moment_spherical_limit(double lambda) {
  const double l2 = lambda * lambda;
  return l2 < 1.0 ? 1.0 / std::sqrt(1.0 - l2) : kInf;
}

double hyptest_tradeoff(double moment, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0, 1]");
  if (std::isnan(moment) || moment < 1.0 - 1e-12) throw DomainError("a second moment is at least 1");
  if (!std::isfinite(moment)) return 0.0;
  // Smaller root of the quadratic (1-b)^2/alpha + b^2/(1-alpha) = M.
  const double disc = alpha * (1.0 - alpha) * std::max(0.0, moment - 1.0);
  return std::max(0.0, (1.0 - alpha) - std::sqrt(disc));
}

double bernoulli_chi2_moment(double alpha, double beta) {
  const double p1 = 1.0 - beta, q1 = alpha;
  const double p0 = beta, q0 = 1.0 - alpha;
  return p1 * p1 / q1 + p0 * p0 / q0;
}

NongaussianBounds nongaussian_bounds(const NoiseModel& noise, double lambda_star) {
  NongaussianBounds b;
  b.fisher = fisher_information(noise);
  b.upper = 1.0 / std::sqrt(b.fisher);
  b.lower = lambda_star == 1.0 ? b.upper : lambda_star / std::sqrt(b.fisher);
  return b;
}

SecondMomentValue second_moment_wishart(const SpikePrior& prior, double beta, double gamma, int n,
                                        const MomentOptions& opts) {
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  if (n < 1) throw DomainError("n must be positive");
  const double cols = static_cast<double>(std::lround(n / gamma));
  const double b2 = beta * beta;
  auto log_term = [&](double o) {
    const double s = b2 * o * o;
    if (s >= 1.0) return kInf;
    return -0.5 * cols * std::log1p(-s);
  };
  if (prior.kind == PriorKind::iid_finite && !opts.force_monte_carlo && n <= 1000) {
    if (auto lat = overlap_lattice(*prior.marginal, n)) return lattice_moment(*lat, n, log_term);
  }
  return monte_carlo_moment(prior, n, opts, [&](double o) { return std::exp(log_term(o)); });
}

WishartRegion wishart_contiguity_region(const RateFunction& rate, double lambda_star, double gamma,
                                        double beta) {
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  WishartRegion r;
  const double b2 = beta * beta;
  auto gap = [&](double t) {
    const double s = b2 * t;
    const double penalty = s < 1.0 ? std::log1p(-s) / (2.0 * gamma) : -kInf;
    return rate(t) + penalty;
  };
  r.margin = kInf;
  bool violated = false;
  for (double t : inequality_grid()) {
    const double g = gap(t);
    if (g < r.margin) {
      r.margin = g;
      r.worst_t = t;
    }
    violated = violated || g < 0.0;
  }
  const double h = 1e-5;
  r.slope_at_zero = gap(h) / h;

  const bool spectral_ok = b2 / gamma < lambda_star * lambda_star;
  r.contiguous = b2 < 1.0 && spectral_ok && !violated && r.margin > 0.0 && r.slope_at_zero > 0.0;
  if (b2 > 1.0) r.reasons.emplace_back("beta^2 > 1");
  if (b2 / gamma > lambda_star * lambda_star) r.reasons.emplace_back("beta^2/gamma > lambda*^2");
  if (violated) r.reasons.emplace_back("rate inequality fails at t = " + format_number(r.worst_t));
  r.moment_unbounded = !r.reasons.empty();
  return r;
}

double wigner_wishart_simple_bound(double lambda_star, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  return std::sqrt(-std::expm1(-gamma * lambda_star * lambda_star));
}

bool wishart_mle_condition(double beta, double gamma, double log_c) {
  const double b = -beta;
  if (!(b > 0.0 && b < 1.0 && b * b < gamma)) return false;
  return b + std::log1p(-b) < -2.0 * gamma * log_c;
}

double wishart_mle_critical_gamma(double log_c) {
  if (!(log_c >= 0.0)) throw DomainError("log_c must be nonnegative");
  // Gap of the best beta for a given gamma; negative means the test works.
  auto best_gap = [&](double gamma) {
    const double top = std::min(std::sqrt(gamma), 1.0) * (1.0 - 1e-12);
    const ScalarOptimum o =
        golden_section_max([](double b) { return -(b + std::log1p(-b)); }, 0.0, top, 1e-10);
    return -o.value + 2.0 * gamma * log_c;
  };
  double lo = 1e-8, hi = 1.0 - 1e-9;
  if (best_gap(lo) < 0.0) return lo;
  while (hi - lo > 1e-4) {
    const double mid = 0.5 * (lo + hi);
    (best_gap(mid) < 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

double optimal_exponent_c(double t, double beta) {
  const double b = 1.0 + beta;
  const double e = 1.0 - t * t;
  return 2.0 * t * b * b / (e + std::sqrt(e * e + 4.0 * t * t * b * b));
}

double noise_conditioned_exponent(double t, double beta) {
  if (beta == 0.0) return 0.0;  // exact cancellation: c*(t) = t
  const double b = 1.0 + beta;
  const double e = 1.0 - t * t;
  const double root = std::sqrt(e * e + 4.0 * t * t * b * b);
  const double c_over_t = 2.0 * b * b / (e + root);
  // (1 + beta - t c*)/(1 - t^2) after rationalizing the difference.
  const double middle = 2.0 * b * (b + 1.0) / (2.0 * b + e + root);
  return -std::log(b) + beta + 0.5 * std::log(c_over_t) - middle + 1.0;
}

NoiseConditionedCheck wishart_noise_conditioned_check(const RateFunction& rate, double lambda_star,
                                                      double gamma, double beta) {
  if (beta < -1.0) throw InvalidBeta("beta must be >= -1");
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  NoiseConditionedCheck c;
  c.side_condition = beta * beta / gamma < lambda_star * lambda_star;
  if (beta == -1.0) {
    c.margin = -kInf;
    return c;
  }
  c.margin = kInf;
  for (double t : inequality_grid()) {
    const double g = gamma * rate(t * t) - noise_conditioned_exponent(t, beta);
    if (g < c.margin) {
      c.margin = g;
      c.worst_t = t;
    }
  }
  const double h = 1e-3;
  c.curvature_at_zero = (gamma * rate(h * h) - noise_conditioned_exponent(h, beta)) / (h * h);
  c.satisfied = c.side_condition && c.margin > 0.0 && c.curvature_at_zero > 0.0;
  return c;
}

double toh_threshold(int order) {
  if (order < 2) throw DomainError("group order must be at least 2");
  if (order == 2) return 1.0;
  const double L = order;
  return std::sqrt(2.0 * (L - 1.0) * std::log(L - 1.0) / (L * (L - 2.0)));
}

double toh_upper_threshold(int order) {
  if (order < 2) throw DomainError("group order must be at least 2");
  const double L = order;
  return std::sqrt(4.0 * std::log(L) / (L - 1.0));
}

double block_constant(double order, double k) {
  const double L = order;
  return (L - 2.0 * k) / (k * (L - k) * std::log((L - k) / k));
}

MatrixOptReport matrix_opt_verify(int order) {
  if (order < 3) throw DomainError("matrix_opt_verify needs L >= 3");
  const double L = order;
  MatrixOptReport rep;
  rep.closed_form = L * (L - 2.0) / (2.0 * (L - 1.0) * std::log(L - 1.0));
  rep.numeric_sup = 1.0;  // value of the ratio in the limit alpha -> uniform
  auto xlogx = [](double v) { return v > 0.0 ? v * std::log(v) : 0.0; };
  for (int k = 1; 2 * k <= order; ++k) {
    auto ratio = [&](double x) {
      const double y = (1.0 - k * x) / (L - k);
      if (y < 0.0 || std::abs(x - 1.0 / L) < 1e-6) return -kInf;
      const double num = 0.5 * L * (k * x * x + (L - k) * y * y - 1.0 / L);
      const double den = std::log(L) + k * xlogx(x) + (L - k) * xlogx(y);
      return den > 0.0 ? num / den : -kInf;
    };
    const double top = 1.0 / k;
    const ScalarOptimum o = grid_then_golden_max(ratio, 0.0, top, top / 20000.0, 1e-14);
    if (o.value > rep.numeric_sup) {
      rep.numeric_sup = o.value;
      rep.argmax_k = k;
      rep.argmax_x = o.argmax;
    }
  }
  rep.ck_decreasing = true;
  double prev = block_constant(L, 1.0);
  for (double k = 1.001; k < 0.5 * L - 1e-9; k += 1e-3) {
    const double c = block_constant(L, k);
    if (!(c < prev)) rep.ck_decreasing = false;
    prev = c;
  }
  return rep;
}

ThresholdReport synch_subgaussian_threshold(const GroupSpec& group,
                                            const std::vector<RepresentationSpec>& reps,
                                            const SynchOptions& opts) {
  if (reps.empty()) throw TrivialRepresentation("no frequencies given");
  // Real coordinates of Z(h) at Haar-quadrature nodes.
  std::vector<GroupElement> nodes;
  if (group.is_circle()) {
    for (int i = 0; i < opts.circle_nodes; ++i)
      nodes.push_back({0, 2.0 * std::numbers::pi * i / opts.circle_nodes});
  } else {
    for (int g = 0; g < group.order(); ++g) nodes.push_back(group.element(g));
  }
  int dim = 0;
  for (const auto& r : reps) dim += r.beta() * r.dim * r.dim;
  Eigen::MatrixXd z(dim, static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    int row = 0;
    for (const auto& r : reps) {
      const Eigen::VectorXd c = real_coordinates(r, nodes[j]);
      z.col(static_cast<Eigen::Index>(j)).segment(row, c.size()) = c;
      row += static_cast<int>(c.size());
    }
  }
  auto ratio = [&](const Eigen::VectorXd& v) {
    const double norm2 = v.squaredNorm();
    if (norm2 < 1e-12) return 1.0;
    const Eigen::RowVectorXd s = v.transpose() * z;
    const double top = s.maxCoeff();
    double log_mgf;
    if (top < 1.0) {
      log_mgf = std::log1p(s.unaryExpr([](double x) { return std::expm1(x); }).mean());
    } else {
      log_mgf = top + std::log((s.array() - top).exp().mean());
    }
    return 2.0 * log_mgf / norm2;
  };

  // On U(1) a rotation fixes the phase of the first frequency, so its
  // imaginary coordinate is pinned to zero.
  const bool pin = group.is_circle();
  auto expand = [&](const Eigen::VectorXd& free) {
    if (!pin) return free;
    Eigen::VectorXd v(dim);
    v(0) = free(0);
    v(1) = 0.0;
    v.tail(dim - 2) = free.tail(dim - 2);
    return v;
  };
  const int free_dim = pin ? dim - 1 : dim;
  Rng rng = make_rng(opts.seed);
  std::vector<double> values;
  double best = -kInf;
  Eigen::VectorXd best_v;
  for (int r = 0; r < opts.restarts; ++r) {
    Eigen::VectorXd start(free_dim);
    for (int i = 0; i < free_dim; ++i) start(i) = standard_normal(rng);
    start *= (0.2 + 2.8 * uniform01(rng)) / start.norm();
    auto f = [&](const Eigen::VectorXd& x) { return ratio(expand(x)); };
    SimplexOptions so;
    so.initial_step = 0.1;
    so.max_evals = 4000 * free_dim;
    SimplexResult res = nelder_mead_max(f, start, so);
    so.initial_step = 1e-3;
    res = nelder_mead_max(f, res.argmax, so);
    values.push_back(res.value);
    if (res.value > best) {
      best = res.value;
      best_v = expand(res.argmax);
    }
  }
  int agreeing = 0;
  for (double v : values) agreeing += std::abs(v - best) <= 1e-4 * std::max(1.0, best);

  ThresholdReport rep;
  rep.name = "synch_subgaussian";
  rep.method = ThresholdMethod::subgaussian;
  rep.diagnostics["weight"] = dim;
  if (best <= 1.0 + 1e-9) {
    rep.value = 1.0;
    rep.diagnostics["proxy"] = 1.0;
    rep.maximizer = Eigen::VectorXd::Zero(dim);
    return rep;
  }
  if (agreeing < 2) throw OptimizerStall("synchronization proxy: restarts disagree");
  // Half turn on U(1) flips odd frequencies; use it to make v_1 >= 0.
  if (pin && best_v(0) < 0.0) {
    int row = 0;
    for (const auto& r : reps) {
      const int len = r.beta() * r.dim * r.dim;
      const auto k = std::stoi(r.id.substr(1));
      if (k % 2 != 0) best_v.segment(row, len) *= -1.0;
      row += len;
    }
  }
  rep.value = 1.0 / std::sqrt(best);
  rep.diagnostics["proxy"] = best;
  rep.diagnostics["agreeing_restarts"] = agreeing;
  rep.maximizer = best_v;
  return rep;
}

double synch_general_bound(const std::vector<RepresentationSpec>& reps) {
  if (reps.empty()) throw TrivialRepresentation("no frequencies given");
  return 1.0 / std::sqrt(frequency_weight(reps));
}

double synch_conditioning_threshold_allfreq(int order) { return toh_threshold(order); }

bool synch_upper_condition(const std::vector<double>& lambdas, const GroupSpec& group,
                           const std::vector<RepresentationSpec>& reps) {
  if (group.is_circle()) throw DomainError("upper condition needs a finite group");
  if (lambdas.size() != reps.size()) throw ConfigError("one lambda per frequency is required");
  double total = 0.0;
  for (std::size_t k = 0; k < reps.size(); ++k)
    total += lambdas[k] * lambdas[k] * reps[k].beta() * reps[k].dim * reps[k].dim;
  return total > 4.0 * std::log(static_cast<double>(group.order()));
}

}  // namespace spiked
