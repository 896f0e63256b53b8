#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spiked/groups.hpp"
#include "spiked/models.hpp"
#include "spiked/noise.hpp"
#include "spiked/priors.hpp"

namespace spiked {

struct DetectionOutcome {
  double statistic = 0.0;
  double threshold = 0.0;
  bool spiked = false;
  Eigen::VectorXd witness;                  // top eigenvector or minimizing vector
  std::vector<GroupElement> group_witness;  // maximizing assignment
  std::optional<double> correlation;        // squared cosine with the planted spike
  std::string note;
};

// Largest eigenvalue against 2 + n^(-1/3) (or the given threshold).
DetectionOutcome pca_detect(const SampleBundle& bundle, std::optional<double> threshold = {});

double pretransformed_threshold(double fisher, int n);
// Top eigenvalue of f(sqrt(n) Y) / sqrt(n), f the noise score, zero diagonal.
DetectionOutcome pretransformed_pca(const SampleBundle& bundle, const NoiseModel& noise,
                                    std::optional<double> threshold = {});

// Number of edges u < v with Y_uv = g_u g_v^-1.
double toh_statistic(const Eigen::MatrixXi& observation, const GroupSpec& group,
                     const std::vector<GroupElement>& assignment);
double toh_asymptotic_threshold(int n, int order, double p);
DetectionOutcome toh_exhaustive_test(const SampleBundle& bundle, const GroupSpec& group,
                                     std::optional<double> threshold = {});

// sum_rho lambda_rho beta d Tr(V^* Y_rho V), trace taken over the base algebra.
double gsynch_statistic(const SampleBundle& bundle, const std::vector<double>& lambdas,
                        const std::vector<GroupElement>& assignment);
double gsynch_asymptotic_threshold(int n, const std::vector<double>& lambdas,
                                   const std::vector<RepresentationSpec>& reps);
DetectionOutcome gsynch_exhaustive_test(const SampleBundle& bundle, const GroupSpec& group,
                                        const std::vector<double>& lambdas,
                                        std::optional<double> threshold = {});

// min over x in (support/sqrt(n))^n, modulo sign, of (1/n) x^T Y x; spiked
// when below (1 + beta + eps)/gamma.
DetectionOutcome wishart_min_quadratic_test(const SampleBundle& bundle, const FiniteLaw& support,
                                            double beta, double gamma, double eps,
                                            std::optional<double> threshold = {});

// Null quantile of a statistic: `level` quantile for upper-tail tests, the
// (1 - level) quantile for lower-tail tests.
double calibrate_threshold(const std::function<double(std::uint64_t)>& null_statistic, int draws,
                           double level, std::uint64_t seed, bool upper_tail = true);

struct PowerPoint {
  double parameter = 0.0;
  int trials = 0;
  double type_one = 0.0;  // false alarms under the null
  double type_two = 0.0;  // misses under the planted model
  double threshold = 0.0;
};

// Runs `detect(seed, planted)` for `trials` planted and null draws.
PowerPoint power_point(const std::function<DetectionOutcome(std::uint64_t, bool)>& detect,
                       double parameter, int trials, std::uint64_t seed);

}  // namespace spiked
