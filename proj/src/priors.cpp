#include "spiked/priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "spiked/errors.hpp"
#include "spiked/optimize.hpp"
#include "spiked/parse.hpp"

namespace spiked {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// (1+e) log(1+e) - e, accurate for small e.
double relative_entropy_term(double e) {
  if (std::abs(e) < 1e-2) {
    double sum = 0.0, power = e * e;
    for (int k = 2; k < 30; ++k) {
      sum += ((k % 2 == 0) ? 1.0 : -1.0) * power / (k * (k - 1.0));
      power *= e;
    }
    return sum;
  }
  return e <= -1.0 ? 1.0 : (1.0 + e) * std::log1p(e) - e;
}

double double_factorial(int k) {
  double r = 1.0;
  for (int i = k; i > 1; i -= 2) r *= i;
  return r;
}

}  // namespace

FiniteLaw FiniteLaw::rademacher() { return {{-1.0, 1.0}, {0.5, 0.5}}; }

FiniteLaw FiniteLaw::sparse_rademacher(double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw InvalidPrior("sparse_rademacher needs 0 < rho <= 1");
  const double v = std::sqrt(1.0 / rho);
  if (rho == 1.0) return rademacher();
  return {{-v, 0.0, v}, {rho / 2.0, 1.0 - rho, rho / 2.0}};
}

FiniteLaw FiniteLaw::custom(std::vector<double> values, std::vector<double> probs) {
  if (values.size() != probs.size() || values.empty())
    throw InvalidPrior("custom_finite needs matching nonempty values and probs");
  FiniteLaw law;
  double total = 0.0, mean = 0.0, second = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (probs[i] < 0.0) throw InvalidPrior("negative probability in custom_finite");
    total += probs[i];
    mean += probs[i] * values[i];
    second += probs[i] * values[i] * values[i];
    if (probs[i] > 0.0) {
      law.values.push_back(values[i]);
      law.probs.push_back(probs[i]);
    }
  }
  if (std::abs(total - 1.0) > 1e-10 || std::abs(mean) > 1e-10 || std::abs(second - 1.0) > 1e-10)
    throw InvalidPrior("custom_finite must have total mass 1, mean 0 and variance 1");
  return law;
}

double FiniteLaw::moment(int q) const {
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i) m += probs[i] * std::pow(values[i], q);
  return m;
}

double FiniteLaw::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double FiniteLaw::log_mgf(double t) const {
  double top = -kInf;
  for (double v : values) top = std::max(top, t * v);
  if (top < 1.0) {
    // log1p(sum p (e^{tv} - 1)) keeps the O(t^2) behaviour near t = 0.
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) s += probs[i] * std::expm1(t * values[i]);
    return std::log1p(s);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) s += probs[i] * std::exp(t * values[i] - top);
  return top + std::log(s);
}

FiniteLaw product_law(const FiniteLaw& law) {
  std::map<double, double> atoms;
  for (std::size_t i = 0; i < law.size(); ++i)
    for (std::size_t j = 0; j < law.size(); ++j) {
      const double v = law.values[i] * law.values[j];
      // Merge values equal up to rounding.
      auto it = atoms.lower_bound(v - 1e-12 * std::max(1.0, std::abs(v)));
      if (it != atoms.end() && std::abs(it->first - v) <= 1e-12 * std::max(1.0, std::abs(v)))
        it->second += law.probs[i] * law.probs[j];
      else
        atoms[v] += law.probs[i] * law.probs[j];
    }
  FiniteLaw out;
  for (const auto& [v, p] : atoms) {
    out.values.push_back(v);
    out.probs.push_back(p);
  }
  return out;
}

SpikePrior SpikePrior::spherical() {
  SpikePrior p;
  p.lambda_star = 1.0;
  return p;
}

SpikePrior SpikePrior::iid(FiniteLaw law, std::string id) {
  SpikePrior p;
  p.kind = PriorKind::iid_finite;
  p.id = std::move(id);
  p.marginal = std::move(law);
  return p;
}

SpikePrior SpikePrior::iid_rademacher() {
  SpikePrior p = iid(FiniteLaw::rademacher(), "iid_rademacher");
  p.lambda_star = 1.0;
  p.log_c = std::log(2.0);
  return p;
}

SpikePrior SpikePrior::sparse_rademacher(double rho) {
  return iid(FiniteLaw::sparse_rademacher(rho), "sparse_rademacher{" + format_number(rho) + "}");
}

SpikePrior SpikePrior::iid_gaussian() {
  SpikePrior p;
  p.kind = PriorKind::iid_gaussian;
  p.id = "iid_gaussian";
  p.lambda_star = 1.0;
  return p;
}

SpikePrior SpikePrior::iid_student(double dof) {
  if (!(dof > 2.0)) throw InvalidPrior("iid_student needs more than 2 degrees of freedom");
  SpikePrior p;
  p.kind = PriorKind::iid_student;
  p.id = "iid_student{" + format_number(dof) + "}";
  p.student_dof = dof;
  return p;
}

SpikePrior parse_prior(const std::string& config_id) {
  const ParsedId p = parse_config_id(config_id);
  if (p.name == "spherical" && p.args.empty()) return SpikePrior::spherical();
  if (p.name == "iid_rademacher" && p.args.empty()) return SpikePrior::iid_rademacher();
  if (p.name == "iid_gaussian" && p.args.empty()) return SpikePrior::iid_gaussian();
  if (p.name == "sparse_rademacher" && p.args.size() == 1)
    return SpikePrior::sparse_rademacher(p.args[0]);
  if (p.name == "iid_student" && p.args.size() == 1) return SpikePrior::iid_student(p.args[0]);
  if (p.name == "custom_finite" && p.groups.size() == 2)
    return SpikePrior::iid(FiniteLaw::custom(p.groups[0], p.groups[1]), config_id);
  throw InvalidPrior("unknown prior id: " + config_id);
}

Eigen::VectorXd sample_spike(const SpikePrior& prior, int n, Rng& rng) {
  if (n < 1) throw DomainError("spike dimension must be positive");
  Eigen::VectorXd x(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  switch (prior.kind) {
    case PriorKind::spherical: {
      for (int i = 0; i < n; ++i) x(i) = standard_normal(rng);
      const double norm = x.norm();
      if (norm == 0.0) x(0) = 1.0;
      else x /= norm;
      break;
    }
    case PriorKind::iid_gaussian:
      for (int i = 0; i < n; ++i) x(i) = standard_normal(rng) * scale;
      break;
    case PriorKind::iid_student: {
      std::student_t_distribution<double> t(prior.student_dof);
      const double unit = std::sqrt((prior.student_dof - 2.0) / prior.student_dof);
      for (int i = 0; i < n; ++i) x(i) = t(rng) * unit * scale;
      break;
    }
    case PriorKind::iid_finite: {
      const auto& law = *prior.marginal;
      std::discrete_distribution<std::size_t> pick(law.probs.begin(), law.probs.end());
      for (int i = 0; i < n; ++i) x(i) = law.values[pick(rng)] * scale;
      break;
    }
  }
  return x;
}

Eigen::VectorXd sample_spike(const SpikePrior& prior, int n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return sample_spike(prior, n, rng);
}

double subgaussian_proxy(const FiniteLaw& law) {
  const FiniteLaw prod = product_law(law);
  const double reach = 2.0 * prod.max_abs() + 1.0;
  double best = 1.0;
  for (double sign : {1.0, -1.0}) {
    auto ratio = [&](double t) {
      const double s = sign * t;
      return 2.0 * prod.log_mgf(s) / (s * s);
    };
    const ScalarOptimum opt = grid_then_golden_max(ratio, 1e-3, reach, 1e-3);
    best = std::max(best, opt.value);
  }
  return best > 1.0 + 1e-9 ? best : 1.0;
}

double subgaussian_proxy(const SpikePrior& prior) {
  if (prior.kind == PriorKind::spherical || prior.kind == PriorKind::iid_gaussian)
    throw UnboundedProxy("prior " + prior.id + " has no finite-support marginal");
  if (prior.kind == PriorKind::iid_student)
    throw UnboundedProxy("heavy-tailed prior has no sub-Gaussian proxy");
  return subgaussian_proxy(*prior.marginal);
}

namespace {

// Legendre transform of the log-mgf at level u: sup_theta (theta u - K(theta)).
double legendre(const FiniteLaw& prod, double u) {
  double mean = 0.0;
  for (std::size_t i = 0; i < prod.size(); ++i) mean += prod.probs[i] * prod.values[i];
  const double vmax = prod.values.back();
  const double vmin = prod.values.front();
  if (u > vmax * (1 + 1e-14) + 1e-300 || u < vmin * (1 + 1e-14) - 1e-300) return kInf;
  if (std::abs(u - vmax) <= 1e-14 * std::max(1.0, std::abs(vmax))) return -std::log(prod.probs.back());
  if (std::abs(u - vmin) <= 1e-14 * std::max(1.0, std::abs(vmin))) return -std::log(prod.probs.front());
  if (u == mean) return 0.0;
  auto tilted_mean = [&](double theta) {
    double top = -kInf;
    for (double v : prod.values) top = std::max(top, theta * v);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < prod.size(); ++i) {
      const double w = prod.probs[i] * std::exp(theta * prod.values[i] - top);
      num += w * prod.values[i];
      den += w;
    }
    return num / den - u;
  };
  const double dir = u > mean ? 1.0 : -1.0;
  double hi = dir;
  while (dir * tilted_mean(hi) < 0.0) {
    hi *= 2.0;
    if (std::abs(hi) > 1e8) return dir > 0 ? -std::log(prod.probs.back()) : -std::log(prod.probs.front());
  }
  const double theta = dir > 0 ? bisect(tilted_mean, 0.0, hi, 1e-15) : bisect(tilted_mean, hi, 0.0, 1e-15);
  return std::max(0.0, theta * u - prod.log_mgf(theta));
}

}  // namespace

double rate_function(const FiniteLaw& law, double t) {
  if (t < 0.0) throw DomainError("rate_function needs t >= 0");
  if (t == 0.0) return 0.0;
  const FiniteLaw prod = product_law(law);
  const double u = std::sqrt(t);
  return std::min(legendre(prod, u), legendre(prod, -u));
}

double rademacher_rate(double t) {
  if (t < 0.0) throw DomainError("rademacher_rate needs t >= 0");
  if (t > 1.0) return kInf;
  // log 2 - H((1+u)/2) = ((1+u) log(1+u) + (1-u) log(1-u)) / 2.
  const double u = std::sqrt(t);
  return 0.5 * (relative_entropy_term(u) + relative_entropy_term(-u));
}

namespace {

// D(a || ref) written as sum ref * h(a/ref - 1), which stays accurate as a -> ref.
double kl(const Eigen::MatrixXd& a, const Eigen::MatrixXd& ref) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    d += ref.data()[i] * relative_entropy_term((a.data()[i] - ref.data()[i]) / ref.data()[i]);
  return d;
}

struct CouplingProblem {
  Eigen::VectorXd marg;
  Eigen::MatrixXd base;   // pi pi^T
  Eigen::MatrixXd value;  // beta_ab = a b
  int s;

  explicit CouplingProblem(const FiniteLaw& law)
      : marg(Eigen::Map<const Eigen::VectorXd>(law.probs.data(), law.size())),
        s(static_cast<int>(law.size())) {
    const Eigen::Map<const Eigen::VectorXd> v(law.values.data(), law.size());
    base = marg * marg.transpose();
    value = v * v.transpose();
  }

  // Free coordinates are the leading (s-1)x(s-1) block.
  Eigen::MatrixXd coupling(const Eigen::VectorXd& free) const {
    Eigen::MatrixXd a(s, s);
    a.topLeftCorner(s - 1, s - 1) = Eigen::Map<const Eigen::MatrixXd>(free.data(), s - 1, s - 1);
    for (int i = 0; i < s - 1; ++i) {
      a(i, s - 1) = marg(i) - a.row(i).head(s - 1).sum();
      a(s - 1, i) = marg(i) - a.col(i).head(s - 1).sum();
    }
    a(s - 1, s - 1) = marg(s - 1) - a.row(s - 1).head(s - 1).sum();
    return a;
  }

  Eigen::VectorXd free_of(const Eigen::MatrixXd& a) const {
    Eigen::MatrixXd block = a.topLeftCorner(s - 1, s - 1);
    return Eigen::Map<Eigen::VectorXd>(block.data(), block.size());
  }

  double ratio(const Eigen::MatrixXd& a, double exclusion) const {
    if (a.minCoeff() < 0.0) return -kInf;
    if ((a - base).norm() < exclusion) return -kInf;
    const double num = ((a - base).array() * value.array()).sum();
    const double d = kl(a, base);
    if (!(d > 0.0)) return -kInf;
    return num * num / (2.0 * d);
  }

  // sup of <delta, beta>^2 / (sum delta^2 / base) over tangent directions.
  double limit_ratio() const {
    const int k = (s - 1) * (s - 1);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(s * s, k);
    Eigen::VectorXd b(k);
    for (int j = 0; j < s - 1; ++j)
      for (int i = 0; i < s - 1; ++i) {
        const int c = i + j * (s - 1);
        jac(i + j * s, c) += 1.0;
        jac(i + (s - 1) * s, c) -= 1.0;
        jac((s - 1) + j * s, c) -= 1.0;
        jac((s - 1) + (s - 1) * s, c) += 1.0;
        b(c) = value(i, j) - value(i, s - 1) - value(s - 1, j) + value(s - 1, s - 1);
      }
    const Eigen::VectorXd inv_base =
        Eigen::Map<const Eigen::VectorXd>(base.data(), base.size()).cwiseInverse();
    const Eigen::MatrixXd metric = jac.transpose() * inv_base.asDiagonal() * jac;
    return b.dot(metric.ldlt().solve(b));
  }

  Eigen::MatrixXd random_coupling(Rng& rng) const {
    std::exponential_distribution<double> expo(1.0);
    Eigen::MatrixXd a(s, s);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = expo(rng);
    for (int it = 0; it < 2000; ++it) {
      a = (marg.array() / a.rowwise().sum().array()).matrix().asDiagonal() * a;
      a = a * (marg.array() / a.colwise().sum().transpose().array()).matrix().asDiagonal();
      if ((a.rowwise().sum() - marg).cwiseAbs().maxCoeff() < 1e-15) break;
    }
    return a;
  }
};

ConditioningResult finish(double limit, double best, int agreeing, Eigen::MatrixXd arg,
                          const ConditioningOptions& opts) {
  ConditioningResult r;
  r.limit_ratio = limit;
  if (best > limit * (1.0 + 1e-9)) {
    if (agreeing < 2)
      throw OptimizerStall("conditioning search: restarts disagree by more than " +
                           format_number(opts.agreement_tol));
    r.sup_ratio = best;
    r.coupling = std::move(arg);
  } else {
    r.sup_ratio = limit;
  }
  r.lambda_star = 1.0 / std::sqrt(r.sup_ratio);
  return r;
}

}  // namespace

ConditioningResult conditioning_threshold(const FiniteLaw& law, const ConditioningOptions& opts) {
  if (law.size() < 2 || law.size() > 7)
    throw DomainError("conditioning_threshold supports 2..7 atoms");
  const CouplingProblem prob(law);
  const double limit = prob.limit_ratio();
  if (law.size() == 2) {
    // A 2x2 coupling with fixed marginals has one free coordinate.
    auto f = [&](double x) {
      Eigen::VectorXd v(1);
      v << x;
      return prob.ratio(prob.coupling(v), opts.exclusion_radius);
    };
    const double top = std::min(prob.marg(0), prob.marg(1));
    const ScalarOptimum o = grid_then_golden_max(f, 0.0, top, top / 20000.0, 1e-14);
    Eigen::VectorXd v(1);
    v << o.argmax;
    return finish(limit, o.value, 2, prob.coupling(v), opts);
  }

  Rng rng = make_rng(opts.seed);
  std::vector<double> values;
  Eigen::VectorXd best_x;
  double best = -kInf;
  auto objective = [&](const Eigen::VectorXd& x) {
    return prob.ratio(prob.coupling(x), opts.exclusion_radius);
  };
  for (int r = 0; r < opts.restarts; ++r) {
    Eigen::VectorXd x = prob.free_of(prob.random_coupling(rng));
    SimplexOptions so;
    so.initial_step = 0.25 * prob.marg.minCoeff() * prob.marg.minCoeff();
    so.max_evals = 4000 * static_cast<int>(x.size());
    SimplexResult res = nelder_mead_max(objective, x, so);
    // Polish from the end point with a fresh, smaller simplex.
    so.initial_step *= 0.01;
    res = nelder_mead_max(objective, res.argmax, so);
    values.push_back(res.value);
    if (res.value > best) {
      best = res.value;
      best_x = res.argmax;
    }
  }
  int agreeing = 0;
  for (double v : values)
    if (std::abs(v - best) <= opts.agreement_tol * std::max(1.0, best)) ++agreeing;
  return finish(limit, best, agreeing, prob.coupling(best_x), opts);
}

ConditioningResult conditioning_threshold_symmetric3(const FiniteLaw& law,
                                                     const ConditioningOptions& opts) {
  if (law.size() != 3 || law.values[1] != 0.0 || std::abs(law.values[0] + law.values[2]) > 1e-12 ||
      std::abs(law.probs[0] - law.probs[2]) > 1e-15)
    throw DomainError("symmetric reduction needs a law on {-v, 0, v} with equal outer masses");
  const CouplingProblem prob(law);
  const double limit = prob.limit_ratio();
  const double half = law.probs[2];  // mass at +v
  // u = a(+,+) = a(-,-), w = a(+,-) = a(-,+).
  auto build = [&](double u, double w) {
    const double side = half - u - w;
    Eigen::MatrixXd a(3, 3);
    a << u, side, w,
         side, law.probs[1] - 2.0 * side, side,
         w, side, u;
    return a;
  };
  auto objective = [&](const Eigen::VectorXd& x) {
    return prob.ratio(build(x(0), x(1)), opts.exclusion_radius);
  };

  // Dense grid over the feasible triangle, then simplex polish from the best
  // cells and from random Dirichlet starts.
  const int cells = 400;
  std::vector<std::pair<double, Eigen::Vector2d>> seeds;
  for (int i = 0; i <= cells; ++i)
    for (int j = 0; i + j <= cells; ++j) {
      Eigen::Vector2d x(half * i / cells, half * j / cells);
      const double v = objective(x);
      if (std::isfinite(v)) seeds.emplace_back(v, x);
    }
  std::partial_sort(seeds.begin(), seeds.begin() + std::min<std::size_t>(4, seeds.size()),
                    seeds.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  seeds.resize(std::min<std::size_t>(4, seeds.size()));
  Rng rng = make_rng(opts.seed);
  std::gamma_distribution<double> g1(1.0, 1.0);
  for (int r = 0; r < opts.restarts; ++r) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const double e0 = g1(rng), e1 = g1(rng), e2 = g1(rng);
      Eigen::Vector2d x(half * e0 / (e0 + e1 + e2), half * e1 / (e0 + e1 + e2));
      if (build(x(0), x(1)).minCoeff() >= 0.0) {
        seeds.emplace_back(objective(x), x);
        break;
      }
    }
  }

  std::vector<double> values;
  double best = -kInf;
  Eigen::Vector2d best_x = Eigen::Vector2d::Zero();
  for (const auto& [v0, x0] : seeds) {
    SimplexOptions so;
    so.initial_step = half / cells;
    SimplexResult res = nelder_mead_max(objective, x0, so);
    so.initial_step *= 0.01;
    res = nelder_mead_max(objective, res.argmax, so);
    values.push_back(res.value);
    if (res.value > best) {
      best = res.value;
      best_x = res.argmax;
    }
  }
  int agreeing = 0;
  for (double v : values)
    if (std::abs(v - best) <= opts.agreement_tol * std::max(1.0, best)) ++agreeing;
  return finish(limit, best, agreeing, build(best_x(0), best_x(1)), opts);
}

double critical_sparsity(double lo, double hi, double tol) {
  auto conditioned = [](double rho) {
    const ConditioningResult r = conditioning_threshold_symmetric3(FiniteLaw::sparse_rademacher(rho));
    return r.sup_ratio <= r.limit_ratio * (1.0 + 1e-7);
  };
  if (conditioned(lo) || !conditioned(hi))
    throw DomainError("critical_sparsity: bracket does not straddle the transition");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (conditioned(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

AssumptionReport prior_assumption_check(const SpikePrior& prior, int n, int trials,
                                        std::uint64_t seed) {
  if (n < 16) throw DomainError("prior_assumption_check needs n >= 16");
  if (trials < 1) throw DomainError("prior_assumption_check needs trials >= 1");
  AssumptionReport rep;
  rep.n = n;
  rep.trials = trials;
  for (std::size_t k = 0; k < rep.orders.size(); ++k) {
    const int q = rep.orders[k];
    const double gaussian_moment = double_factorial(q - 1);
    double c = 0.0;
    switch (prior.kind) {
      case PriorKind::spherical:
        // alpha^(2q) > 2^q (q-1)!!, with a factor 2 of slack.
        c = std::pow(2.0 * std::pow(2.0, q) * gaussian_moment, 1.0 / (2.0 * q));
        break;
      case PriorKind::iid_finite:
        c = std::pow(2.0 * prior.marginal->moment(q), 1.0 / q);
        break;
      case PriorKind::iid_gaussian:
      case PriorKind::iid_student:
        c = std::pow(2.0 * gaussian_moment, 1.0 / q);
        break;
    }
    rep.norm_constants[k] = c;
  }
  const double entry_cap = std::pow(static_cast<double>(n), -1.0 / 3.0);
  int entry_bad = 0;
  std::array<int, 4> norm_bad{};
  for (int t = 0; t < trials; ++t) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(t));
    const Eigen::VectorXd x = sample_spike(prior, n, rng);
    if (x.cwiseAbs().maxCoeff() >= entry_cap) ++entry_bad;
    for (std::size_t k = 0; k < rep.orders.size(); ++k) {
      const int q = rep.orders[k];
      const double norm = std::pow(x.cwiseAbs().array().pow(q).sum(), 1.0 / q);
      if (norm > rep.norm_constants[k] * std::pow(static_cast<double>(n), 1.0 / q - 0.5))
        ++norm_bad[k];
    }
  }
  rep.max_entry_rate = static_cast<double>(entry_bad) / trials;
  rep.passed = rep.max_entry_rate <= 0.05;
  for (std::size_t k = 0; k < rep.orders.size(); ++k) {
    rep.norm_rates[k] = static_cast<double>(norm_bad[k]) / trials;
    rep.passed = rep.passed && rep.norm_rates[k] <= 0.05;
  }
  return rep;
}

}  // namespace spiked
