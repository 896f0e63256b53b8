#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spiked/random.hpp"

namespace spiked {

// Finite distribution on the real line with strictly positive masses.
struct FiniteLaw {
  std::vector<double> values;
  std::vector<double> probs;

  static FiniteLaw rademacher();
  // sqrt(1/rho) times a variable that is 0 w.p. 1-rho and +-1 w.p. rho/2.
  static FiniteLaw sparse_rademacher(double rho);
  // Validates sum 1, mean 0, variance 1 to 1e-10 and drops null atoms.
  static FiniteLaw custom(std::vector<double> values, std::vector<double> probs);

  std::size_t size() const { return values.size(); }
  double moment(int q) const;
  double max_abs() const;
  // log E exp(t X), stable near t = 0 and for large |t|.
  double log_mgf(double t) const;
};

// Law of the product of two independent draws (atoms merged).
FiniteLaw product_law(const FiniteLaw& law);

enum class PriorKind { spherical, iid_finite, iid_gaussian, iid_student };

// Distribution of the hidden unit-scale vector x in R^n.
struct SpikePrior {
  PriorKind kind = PriorKind::spherical;
  std::string id = "spherical";
  std::optional<FiniteLaw> marginal;
  double student_dof = 0.0;
  std::optional<double> log_c;
  std::optional<double> lambda_star;

  static SpikePrior spherical();
  static SpikePrior iid(FiniteLaw law, std::string id);
  static SpikePrior iid_rademacher();
  static SpikePrior sparse_rademacher(double rho);
  static SpikePrior iid_gaussian();
  // Unit-variance Student t marginal with the given degrees of freedom (> 2).
  static SpikePrior iid_student(double dof);
};

SpikePrior parse_prior(const std::string& config_id);

Eigen::VectorXd sample_spike(const SpikePrior& prior, int n, Rng& rng);
Eigen::VectorXd sample_spike(const SpikePrior& prior, int n, std::uint64_t seed);

// sup over t != 0 of (2/t^2) log E exp(t pi pi'); exactly 1 when the search
// never rises above 1 + 1e-9.
double subgaussian_proxy(const FiniteLaw& law);
double subgaussian_proxy(const SpikePrior& prior);

// Large-deviation rate of <x, x'>^2 >= t; +infinity beyond the support.
double rate_function(const FiniteLaw& law, double t);
// log 2 - H((1 + sqrt t)/2).
double rademacher_rate(double t);

struct ConditioningOptions {
  int restarts = 20;
  std::uint64_t seed = 20240611;
  double exclusion_radius = 1e-6;
  double agreement_tol = 1e-4;
};

struct ConditioningResult {
  double lambda_star = 1.0;
  double sup_ratio = 1.0;    // sup of <a, b>^2 / (2 D(a, pi pi^T))
  double limit_ratio = 1.0;  // value of the ratio as a -> pi pi^T
  Eigen::MatrixXd coupling;  // maximizer, empty when the limit wins
};

ConditioningResult conditioning_threshold(const FiniteLaw& law,
                                          const ConditioningOptions& opts = {});
// Same search restricted to couplings of a law on {-v, 0, v} that are
// invariant under joint sign flip and transpose (two free coordinates).
ConditioningResult conditioning_threshold_symmetric3(const FiniteLaw& law,
                                                     const ConditioningOptions& opts = {});

// Smallest sparsity with conditioning threshold equal to 1, by bisection.
double critical_sparsity(double lo, double hi, double tol = 5e-4);

struct AssumptionReport {
  int n = 0;
  int trials = 0;
  double max_entry_rate = 0.0;            // max_i |x_i| >= n^(-1/3)
  std::array<int, 4> orders{2, 4, 6, 8};
  std::array<double, 4> norm_constants{};  // alpha_q
  std::array<double, 4> norm_rates{};      // ||x||_q > alpha_q n^(1/q - 1/2)
  bool passed = false;
};

AssumptionReport prior_assumption_check(const SpikePrior& prior, int n, int trials,
                                        std::uint64_t seed = 7);

}  // namespace spiked
