#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "spiked/random.hpp"

namespace spiked {

// One Gaussian bump of a mixture density.
struct GaussianComponent {
  double weight;
  double mean;
  double stddev;
};

// |f^(l)(w)| <= constant + |w|^degree for l = 0, 1, 2, where f is the score.
struct PolynomialBound {
  double constant;
  int degree;
};

// Unit-variance, zero-mean noise density given as a finite Gaussian mixture.
// The plain Gaussian is the one-component case.
class NoiseModel {
 public:
  NoiseModel(std::string id, std::vector<GaussianComponent> components);

  static NoiseModel gaussian();
  // Rademacher(+-mu) convolved with N(0, sigma2), mu2 + sigma2 = 1.
  static NoiseModel bimodal(double mu2, double sigma2);
  // 1/2 N(-a, 1 - a^2) + 1/2 N(a, 1 - a^2).
  static NoiseModel gauss_mixture(double a);

  const std::string& id() const { return id_; }
  const std::vector<GaussianComponent>& components() const { return components_; }

  double density(double w) const;
  double log_density(double w) const;
  // p^(k)(w) / p(w) for k = 1, 2, 3, evaluated with log-sum-exp weights.
  Eigen::Vector3d derivative_ratios(double w) const;
  double mean() const { return mean_; }
  double variance() const { return variance_; }
  const PolynomialBound& polynomial_bound() const { return bound_; }
  // Half-width beyond which the density is negligible relative to its bulk.
  double support_scale() const;

  double sample(Rng& rng) const;
  bool is_gaussian() const { return components_.size() == 1; }

 private:
  std::string id_;
  std::vector<GaussianComponent> components_;
  double mean_ = 0.0;
  double variance_ = 0.0;
  PolynomialBound bound_{0.0, 2};
};

// f(w) = -p'(w)/p(w).
double score(const NoiseModel& noise, double w);
// f'(w) and f''(w).
double score_derivative(const NoiseModel& noise, double w);
double score_second_derivative(const NoiseModel& noise, double w);

// Entrywise score of a matrix.
Eigen::MatrixXd apply_score(const NoiseModel& noise, const Eigen::MatrixXd& m);

// Integral of p'^2 / p.
double fisher_information(const NoiseModel& noise);

// log E_z[p(z-a) p(z-b) / p(z)^2] for z ~ p, |a|, |b| <= 1.
double translation_fn(const NoiseModel& noise, double a, double b);

// Parses "gaussian", "bimodal{mu2,sigma2}", "gauss_mixture{a}".
NoiseModel parse_noise(const std::string& config_id);

}  // namespace spiked
