#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "spiked/groups.hpp"
#include "spiked/noise.hpp"
#include "spiked/priors.hpp"

namespace spiked {

enum class ThresholdMethod { closed_form, subgaussian, conditioning, rate_function, upper_bound, noise_conditioned };
std::string to_string(ThresholdMethod m);

struct ThresholdReport {
  std::string name;
  double value = 0.0;
  ThresholdMethod method = ThresholdMethod::closed_form;
  std::map<std::string, double> diagnostics;
  Eigen::VectorXd maximizer;
};

enum class MomentEstimator { exact, series, monte_carlo };
std::string to_string(MomentEstimator e);

struct SecondMomentValue {
  double value = 1.0;  // +infinity when the moment diverges
  int n = 0;
  MomentEstimator estimator = MomentEstimator::exact;
  double std_error = 0.0;
  bool finite() const;
};

struct MomentOptions {
  long trials = 100000;
  std::uint64_t seed = 11;
  bool force_monte_carlo = false;
};

// E exp((n lambda^2 / 2) <x, x'>^2); exact over the overlap lattice for
// finite iid laws, Monte Carlo otherwise.
SecondMomentValue second_moment_gwig(const SpikePrior& prior, double lambda, int n,
                                     const MomentOptions& opts = {});
// 1F1(1/2; n/2; lambda^2 n / 2) by Kummer series.
SecondMomentValue second_moment_spherical_exact(int n, double lambda);
// (1 - lambda^2)^(-1/2), infinite for lambda >= 1.
double second_moment_spherical_limit(double lambda);
// Confluent hypergeometric 1F1(a; b; z) for z >= 0 by compensated series.
double kummer_series(double a, double b, double z);

// Smallest type II error beta with (1-beta)^2/alpha + beta^2/(1-alpha) <= M, alpha in [0, 1].
double hyptest_tradeoff(double moment, double alpha);
// E_Q (dP/dQ)^2 for P = Bern(1 - beta), Q = Bern(alpha), summed over outcomes.
double bernoulli_chi2_moment(double alpha, double beta);

struct NongaussianBounds {
  double lower = 0.0;  // lambda* / sqrt(F)
  double upper = 0.0;  // 1 / sqrt(F)
  double fisher = 1.0;
  bool tight() const { return lower == upper; }
};
NongaussianBounds nongaussian_bounds(const NoiseModel& noise, double lambda_star);

// E (1 - beta^2 <x, x'>^2)^(-N/2), N = round(n/gamma).
SecondMomentValue second_moment_wishart(const SpikePrior& prior, double beta, double gamma, int n,
                                        const MomentOptions& opts = {});

using RateFunction = std::function<double(double)>;

struct WishartRegion {
  bool contiguous = false;      // all three sufficient conditions hold
  bool moment_unbounded = false;  // some converse trigger fires
  double margin = 0.0;          // min over the grid of f(t) + log(1 - beta^2 t)/(2 gamma)
  double worst_t = 0.0;
  double slope_at_zero = 0.0;   // limit of the margin over t as t -> 0
  std::vector<std::string> reasons;
};
WishartRegion wishart_contiguity_region(const RateFunction& rate, double lambda_star, double gamma,
                                        double beta);

// Largest |beta| with beta^2 < 1 - exp(-gamma lambda*^2).
double wigner_wishart_simple_bound(double lambda_star, double gamma);

// b + log(1 - b) < -2 gamma log c with b = -beta, the exhaustive-test condition.
bool wishart_mle_condition(double beta, double gamma, double log_c);
// Smallest gamma for which some beta in (-sqrt(gamma), 0) satisfies the condition.
double wishart_mle_critical_gamma(double log_c);

// Maximizer of the exponent in c, stable for small t.
double optimal_exponent_c(double t, double beta);

struct NoiseConditionedCheck {
  bool satisfied = false;
  bool side_condition = false;  // beta^2 / gamma < lambda*^2
  double margin = 0.0;
  double worst_t = 0.0;
  double curvature_at_zero = 0.0;  // margin / t^2 as t -> 0
};
// gamma f(t^2) against the conditioned exponent on a grid of t in (0, 1).
NoiseConditionedCheck wishart_noise_conditioned_check(const RateFunction& rate, double lambda_star,
                                                      double gamma, double beta);
double noise_conditioned_exponent(double t, double beta);

// sqrt(2(L-1) log(L-1) / (L(L-2))), with value 1 at L = 2.
double toh_threshold(int order);
// sqrt(4 log L / (L-1)).
double toh_upper_threshold(int order);

struct MatrixOptReport {
  double numeric_sup = 0.0;
  double closed_form = 0.0;
  int argmax_k = 0;
  double argmax_x = 0.0;
  bool ck_decreasing = false;
};
// (L-2k) / (k (L-k) log((L-k)/k)) for real k in [1, L/2).
double block_constant(double order, double k);
MatrixOptReport matrix_opt_verify(int order);

struct SynchOptions {
  int restarts = 20;
  std::uint64_t seed = 99;
  int circle_nodes = 2048;
};
ThresholdReport synch_subgaussian_threshold(const GroupSpec& group,
                                            const std::vector<RepresentationSpec>& reps,
                                            const SynchOptions& opts = {});
// 1 / sqrt(sum beta d^2).
double synch_general_bound(const std::vector<RepresentationSpec>& reps);
double synch_conditioning_threshold_allfreq(int order);
// sum lambda^2 beta d^2 > 4 log L.
bool synch_upper_condition(const std::vector<double>& lambdas, const GroupSpec& group,
                           const std::vector<RepresentationSpec>& reps);

}  // namespace spiked
