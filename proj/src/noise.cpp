#include "spiked/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spiked/errors.hpp"
#include "spiked/parse.hpp"
#include "spiked/quadrature.hpp"

namespace spiked {
namespace {

double log_normal_pdf(double w, double mean, double sd) {
  const double u = (w - mean) / sd;
  return -0.5 * u * u - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

// Responsibilities r_k(w) and standardized offsets u_k = (w - m_k)/s_k.
template <class Fn>
void for_each_weighted(const std::vector<GaussianComponent>& comps, double w, Fn&& fn) {
  double top = -std::numeric_limits<double>::infinity();
  std::vector<double> logs(comps.size());
  for (std::size_t k = 0; k < comps.size(); ++k) {
    logs[k] = std::log(comps[k].weight) + log_normal_pdf(w, comps[k].mean, comps[k].stddev);
    top = std::max(top, logs[k]);
  }
  double total = 0.0;
  for (auto& l : logs) {
    l = std::exp(l - top);
    total += l;
  }
  for (std::size_t k = 0; k < comps.size(); ++k)
    fn(logs[k] / total, (w - comps[k].mean) / comps[k].stddev, comps[k].stddev);
}

}  // namespace

NoiseModel::NoiseModel(std::string id, std::vector<GaussianComponent> components)
    : id_(std::move(id)), components_(std::move(components)) {
  if (components_.empty()) throw InvalidNoise("noise needs at least one component");
  double wsum = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight > 0.0) || !(c.stddev > 0.0))
      throw InvalidNoise("noise component weights and widths must be positive");
    wsum += c.weight;
  }
  if (std::abs(wsum - 1.0) > 1e-12) throw InvalidNoise("noise weights must sum to 1");
  for (const auto& c : components_) mean_ += c.weight * c.mean;
  for (const auto& c : components_)
    variance_ += c.weight * (c.stddev * c.stddev + (c.mean - mean_) * (c.mean - mean_));
  if (std::abs(mean_) > 1e-6 || std::abs(variance_ - 1.0) > 1e-6)
    throw InvalidNoise("noise " + id_ + " must have mean 0 and variance 1");

  // Constant for |f^(l)(w)| <= C + w^2, found on a grid covering the region
  // where w^2 does not yet dominate the linear growth of the score.
  double smin = components_.front().stddev;
  double mmax = 0.0;
  for (const auto& c : components_) {
    smin = std::min(smin, c.stddev);
    mmax = std::max(mmax, std::abs(c.mean));
  }
  const double reach = 4.0 * (mmax + 1.0) / (smin * smin) + 10.0;
  double c = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    const double w = -reach + 2.0 * reach * i / 20000.0;
    const double excess = std::max({std::abs(score(*this, w)), std::abs(score_derivative(*this, w)),
                                    std::abs(score_second_derivative(*this, w))}) - w * w;
    c = std::max(c, excess);
  }
  bound_ = {std::ceil(c * 1.01 + 1.0), 2};
}

NoiseModel NoiseModel::gaussian() { return NoiseModel("gaussian", {{1.0, 0.0, 1.0}}); }

NoiseModel NoiseModel::bimodal(double mu2, double sigma2) {
  if (!(mu2 >= 0.0) || !(sigma2 > 0.0) || std::abs(mu2 + sigma2 - 1.0) > 1e-12)
    throw InvalidNoise("bimodal noise needs mu2 >= 0, sigma2 > 0, mu2 + sigma2 = 1");
  const double mu = std::sqrt(mu2);
  const double sd = std::sqrt(sigma2);
  return NoiseModel("bimodal{" + format_number(mu2) + "," + format_number(sigma2) + "}",
                    {{0.5, -mu, sd}, {0.5, mu, sd}});
}

NoiseModel NoiseModel::gauss_mixture(double a) {
  if (!(std::abs(a) < 1.0)) throw InvalidNoise("gauss_mixture needs |a| < 1");
  const double sd = std::sqrt(1.0 - a * a);
  return NoiseModel("gauss_mixture{" + format_number(a) + "}", {{0.5, -a, sd}, {0.5, a, sd}});
}

double NoiseModel::log_density(double w) const {
  double top = -std::numeric_limits<double>::infinity();
  std::vector<double> logs;
  logs.reserve(components_.size());
  for (const auto& c : components_) {
    logs.push_back(std::log(c.weight) + log_normal_pdf(w, c.mean, c.stddev));
    top = std::max(top, logs.back());
  }
  double s = 0.0;
  for (double l : logs) s += std::exp(l - top);
  return top + std::log(s);
}

double NoiseModel::density(double w) const { return std::exp(log_density(w)); }

Eigen::Vector3d NoiseModel::derivative_ratios(double w) const {
  // d^k/dw^k of phi((w-m)/s)/s is (-1)^k He_k(u) / s^k times the density.
  Eigen::Vector3d r = Eigen::Vector3d::Zero();
  for_each_weighted(components_, w, [&](double resp, double u, double s) {
    r(0) += resp * (-u / s);
    r(1) += resp * (u * u - 1.0) / (s * s);
    r(2) += resp * (-(u * u * u - 3.0 * u)) / (s * s * s);
  });
  return r;
}

double NoiseModel::support_scale() const {
  double reach = 0.0;
  for (const auto& c : components_) reach = std::max(reach, std::abs(c.mean) + 12.0 * c.stddev);
  return reach;
}

double NoiseModel::sample(Rng& rng) const {
  std::size_t k = 0;
  if (components_.size() > 1) {
    double u = uniform01(rng);
    while (k + 1 < components_.size() && u >= components_[k].weight) u -= components_[k++].weight;
  }
  return components_[k].mean + components_[k].stddev * standard_normal(rng);
}

double score(const NoiseModel& noise, double w) {
  if (!std::isfinite(noise.log_density(w)))
    throw NonPositiveDensity("density vanishes at w = " + std::to_string(w));
  return -noise.derivative_ratios(w)(0);
}

double score_derivative(const NoiseModel& noise, double w) {
  const Eigen::Vector3d r = noise.derivative_ratios(w);
  return -r(1) + r(0) * r(0);
}

double score_second_derivative(const NoiseModel& noise, double w) {
  const Eigen::Vector3d r = noise.derivative_ratios(w);
  return -r(2) + 3.0 * r(1) * r(0) - 2.0 * r(0) * r(0) * r(0);
}

Eigen::MatrixXd apply_score(const NoiseModel& noise, const Eigen::MatrixXd& m) {
  if (noise.is_gaussian()) return m;
  return m.unaryExpr([&](double w) { return -noise.derivative_ratios(w)(0); });
}

double fisher_information(const NoiseModel& noise) {
  auto integrand = [&](double w) {
    const double f = noise.derivative_ratios(w)(0);
    return noise.density(w) * f * f;
  };
  QuadratureOptions opts;
  opts.panels = 256;
  const double value = integrate_real_line(integrand, noise.support_scale(), opts);
  if (!std::isfinite(value)) throw QuadratureNonConvergence("Fisher information is not finite");
  return value;
}

double translation_fn(const NoiseModel& noise, double a, double b) {
  if (std::abs(a) > 1.0 || std::abs(b) > 1.0)
    throw DomainError("translation_fn needs |a|, |b| <= 1");
  if (a == 0.0 || b == 0.0) return 0.0;
  // E[(r_a)(r_b)] - 1 = integral of (p_a - p)(p_b - p)/p with p_a = p(. - a);
  // the centred form keeps full relative accuracy for small shifts.
  auto integrand = [&](double z) {
    const double lp = noise.log_density(z);
    const double da = std::expm1(noise.log_density(z - a) - lp);
    const double db = std::expm1(noise.log_density(z - b) - lp);
    return std::exp(lp) * da * db;
  };
  QuadratureOptions opts;
  opts.panels = 256;
  opts.abs_tol = 1e-17;
  const double excess = integrate_real_line(integrand, noise.support_scale() + 2.0, opts);
  return std::log1p(excess);
}

NoiseModel parse_noise(const std::string& config_id) {
  const ParsedId p = parse_config_id(config_id);
  if (p.name == "gaussian" && p.args.empty()) return NoiseModel::gaussian();
  if (p.name == "bimodal") {
    if (p.args.empty()) return NoiseModel::bimodal(0.95, 0.05);
    if (p.args.size() == 2) return NoiseModel::bimodal(p.args[0], p.args[1]);
  }
  if (p.name == "gauss_mixture" && p.args.size() == 1) return NoiseModel::gauss_mixture(p.args[0]);
  throw InvalidNoise("unknown noise id: " + config_id);
}

}  // namespace spiked
