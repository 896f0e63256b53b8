#include <doctest.h>

#include <cmath>
#include <limits>

#include "spiked/errors.hpp"
#include "spiked/thresholds.hpp"

using namespace spiked;

namespace {

double log_choose(int n, int k) { return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0); }

// E g(<x, x'>) for iid Rademacher/sqrt(n) spikes: the overlap is (n - 2k)/n
// with k ~ Binomial(n, 1/2).
template <class F>
double binomial_overlap_mean(int n, F&& g) {
  double total = 0.0;
  for (int k = 0; k <= n; ++k) total += std::exp(log_choose(n, k) - n * std::log(2.0)) * g((n - 2.0 * k) / n);
  return total;
}

RateFunction rademacher() {
  return [](double t) { return rademacher_rate(t); };
}

}  // namespace

TEST_SUITE("thresholds") {
  TEST_CASE("second moment is 1 without a signal") {
    CHECK(second_moment_gwig(SpikePrior::iid_rademacher(), 0.0, 30).value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(second_moment_gwig(SpikePrior::spherical(), 0.0, 30).value == 1.0);
    CHECK(second_moment_spherical_exact(40, 0.0).value == 1.0);
    CHECK(second_moment_wishart(SpikePrior::iid_rademacher(), 0.0, 0.5, 20).value == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("Rademacher Wigner second moment: lattice, binomial oracle and Monte Carlo") {
    const int n = 20;
    const double lambda = 0.5;
    const double oracle = binomial_overlap_mean(n, [&](double o) { return std::exp(0.5 * n * lambda * lambda * o * o); });
    const SecondMomentValue exact = second_moment_gwig(SpikePrior::iid_rademacher(), lambda, n);
    CHECK(exact.estimator == MomentEstimator::exact);
    CHECK(exact.value == doctest::Approx(oracle).epsilon(1e-12));
    MomentOptions opts;
    opts.trials = 200000;
    opts.force_monte_carlo = true;
    const SecondMomentValue mc = second_moment_gwig(SpikePrior::iid_rademacher(), lambda, n, opts);
    CHECK(mc.estimator == MomentEstimator::monte_carlo);
    CHECK(std::abs(mc.value - oracle) <= 3.0 * mc.std_error);
  }

  TEST_CASE("spherical exact moment agrees with Monte Carlo at n = 50") {
    const SecondMomentValue exact = second_moment_spherical_exact(50, 0.6);
    CHECK(exact.value == doctest::Approx(1.244764891859).epsilon(1e-10));
    MomentOptions opts;
    opts.trials = 200000;
    const SecondMomentValue mc = second_moment_gwig(SpikePrior::spherical(), 0.6, 50, opts);
    CHECK(std::abs(mc.value - exact.value) <= 3.0 * mc.std_error);
    CHECK(second_moment_spherical_limit(0.6) == 1.25);
    CHECK(std::isinf(second_moment_spherical_limit(1.0)));
  }

  TEST_CASE("Kummer series against closed forms") {
    CHECK(kummer_series(0.7, 0.7, 3.0) == doctest::Approx(std::exp(3.0)).epsilon(1e-12));
    for (double z : {0.5, 4.0, 30.0}) CHECK(kummer_series(1.0, 2.0, z) == doctest::Approx(std::expm1(z) / z).epsilon(1e-12));
    CHECK(kummer_series(0.5, 3.0, 0.0) == 1.0);
    CHECK_THROWS_AS(second_moment_spherical_exact(500, 1000.0), SeriesDivergence);
  }

  TEST_CASE("finite-n spherical moments at lambda = 0.9 increase toward the limit") {
    const double m10 = second_moment_spherical_exact(10, 0.9).value;
    const double m25 = second_moment_spherical_exact(25, 0.9).value;
    const double m75 = second_moment_spherical_exact(75, 0.9).value;
    const double lim = second_moment_spherical_limit(0.9);
    CHECK(m10 == doctest::Approx(1.78024).epsilon(1e-5));
    CHECK(m10 < m25);
    CHECK(m25 < m75);
    CHECK(m75 < lim);
    CHECK(lim == doctest::Approx(1.0 / std::sqrt(0.19)).epsilon(1e-14));
  }

  TEST_CASE("second moments dominate 1 up to Monte Carlo error") {
    MomentOptions opts;
    opts.trials = 20000;
    for (const auto& prior : {SpikePrior::spherical(), SpikePrior::iid_gaussian(), SpikePrior::sparse_rademacher(0.3),
                              SpikePrior::iid_student(5.0)}) {
      for (double lambda : {0.1, 0.4, 0.7}) {
        opts.force_monte_carlo = true;
        const SecondMomentValue v = second_moment_gwig(prior, lambda, 40, opts);
        CHECK(v.value >= 1.0 - 3.0 * v.std_error);
        const SecondMomentValue w = second_moment_wishart(prior, lambda, 0.5, 40, opts);
        CHECK(w.value >= 1.0 - 3.0 * w.std_error);
      }
    }
    for (double lambda : {0.2, 0.6, 0.9}) CHECK(second_moment_gwig(SpikePrior::iid_rademacher(), lambda, 24).value >= 1.0);
  }

  TEST_CASE("Wishart second moment: sign symmetry and binomial oracle") {
    const int n = 20;
    const double gamma = 0.5, beta = 0.4;
    const double cols = std::round(n / gamma);
    const double oracle = binomial_overlap_mean(n, [&](double o) { return std::pow(1.0 - beta * beta * o * o, -cols / 2.0); });
    const SecondMomentValue exact = second_moment_wishart(SpikePrior::iid_rademacher(), beta, gamma, n);
    CHECK(exact.value == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(second_moment_wishart(SpikePrior::iid_rademacher(), -beta, gamma, n).value == exact.value);
    MomentOptions opts;
    opts.trials = 200000;
    opts.force_monte_carlo = true;
    const SecondMomentValue mc = second_moment_wishart(SpikePrior::iid_rademacher(), beta, gamma, n, opts);
    CHECK(std::abs(mc.value - oracle) <= 3.0 * mc.std_error);
    const SecondMomentValue sp = second_moment_wishart(SpikePrior::spherical(), 0.5, gamma, 30, opts);
    const SecondMomentValue sm = second_moment_wishart(SpikePrior::spherical(), -0.5, gamma, 30, opts);
    CHECK(sp.value == sm.value);
  }

  TEST_CASE("Wishart moment is infinite when beta^2 <x,x'>^2 reaches 1") {
    CHECK_FALSE(second_moment_wishart(SpikePrior::iid_rademacher(), 1.0, 0.5, 10).finite());
  }

  TEST_CASE("hypothesis-testing tradeoff") {
    for (double a : {0.0, 0.05, 0.3, 0.9, 1.0}) CHECK(hyptest_tradeoff(1.0, a) == doctest::Approx(1.0 - a).epsilon(1e-15));
    const double m = bernoulli_chi2_moment(0.2, 0.3);
    CHECK(m == doctest::Approx(0.7 * 0.7 / 0.2 + 0.3 * 0.3 / 0.8).epsilon(1e-15));
    CHECK(std::abs(hyptest_tradeoff(m, 0.2) - 0.3) <= 1e-12);
    const double b = hyptest_tradeoff(1.25, 0.05);
    CHECK((1 - b) * (1 - b) / 0.05 + b * b / 0.95 == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(b < 0.95);
    CHECK(hyptest_tradeoff(std::numeric_limits<double>::infinity(), 0.1) == 0.0);
    CHECK_THROWS_AS(hyptest_tradeoff(0.5, 0.1), DomainError);
    CHECK_THROWS_AS(hyptest_tradeoff(2.0, 1.5), DomainError);
  }

  TEST_CASE("tradeoff is nonincreasing in the moment and in alpha") {
    for (double a = 0.0; a <= 1.0; a += 0.01) {
      double prev = 2.0;
      for (double m = 1.0; m <= 5.0; m += 0.05) {
        const double b = hyptest_tradeoff(m, a);
        CHECK(b <= prev + 1e-15);
        prev = b;
      }
    }
    for (double m = 1.0; m <= 5.0; m += 0.25) {
      double prev = 2.0;
      for (double a = 0.0; a <= 1.0; a += 0.01) {
        const double b = hyptest_tradeoff(m, a);
        CHECK(b <= prev + 1e-15);
        prev = b;
      }
    }
  }

  TEST_CASE("non-Gaussian bounds") {
    const NongaussianBounds g = nongaussian_bounds(NoiseModel::gaussian(), 1.0);
    CHECK(g.lower == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(g.tight());
    const NoiseModel bimodal = NoiseModel::bimodal(0.95, 0.05);
    const NongaussianBounds bb = nongaussian_bounds(bimodal, 1.0);
    CHECK(bb.tight());
    CHECK(bb.upper == doctest::Approx(1.0 / std::sqrt(fisher_information(bimodal))).epsilon(1e-12));
    CHECK(nongaussian_bounds(bimodal, 0.5).lower == doctest::Approx(0.5 * bb.upper).epsilon(1e-12));

    // A two-point Gaussian mixture with Fisher information 4, found by bisection.
    double lo = 0.1, hi = 0.99;
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (lo + hi);
      (fisher_information(NoiseModel::gauss_mixture(mid)) < 4.0 ? lo : hi) = mid;
    }
    const NongaussianBounds four = nongaussian_bounds(NoiseModel::gauss_mixture(0.5 * (lo + hi)), 1.0);
    CHECK(four.fisher == doctest::Approx(4.0).epsilon(1e-8));
    CHECK(four.lower == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(four.upper == doctest::Approx(0.5).epsilon(1e-8));
  }

  TEST_CASE("Wigner-to-Wishart simple bound") {
    CHECK(wigner_wishart_simple_bound(1.0, 2.0 * std::log(2.0)) == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-14));
    CHECK(wigner_wishart_simple_bound(1.0, 1e-8) / std::sqrt(1e-8) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(wigner_wishart_simple_bound(0.0, 0.7) == 0.0);
  }

  TEST_CASE("exhaustive-test critical gamma for the Rademacher prior") {
    const double g = wishart_mle_critical_gamma(std::log(2.0));
    CHECK(g > 0.697);
    CHECK(g < 0.698);
    // Dense (gamma, b) grid oracle for the same boundary.
    double first = 1.0;
    for (double gamma = 0.69; gamma <= 0.71; gamma += 2e-5) {
      bool ok = false;
      for (double b = 1e-4; b < std::sqrt(gamma) && !ok; b += 1e-4)
        ok = b + std::log1p(-b) < -2.0 * gamma * std::log(2.0);
      if (ok) {
        first = gamma;
        break;
      }
    }
    CHECK(std::abs(g - first) <= 2e-4);
    bool feasible = false;
    for (double b = 0.01; b < 1.0; b += 0.01) feasible = feasible || wishart_mle_condition(-b, 1.0, std::log(2.0));
    CHECK(feasible);
    CHECK_FALSE(wishart_mle_condition(0.3, 1.0, std::log(2.0)));
  }

  TEST_CASE("optimal c satisfies its defining identity") {
    for (double beta : {-0.5, 0.0, 0.3, 0.7, 2.0}) {
      for (double t = 1e-4; t < 1.0; t += 1e-3) {
        const double c = optimal_exponent_c(t, beta);
        const double b = 1.0 + beta;
        CHECK(std::abs(c * (1 - t * t) - t * (b * b - c * c)) <= 1e-10);
      }
    }
  }

  TEST_CASE("noise-conditioned check") {
    for (double t = 0.01; t < 1.0; t += 0.01) CHECK(noise_conditioned_exponent(t, 0.0) == 0.0);
    const NoiseConditionedCheck zero = wishart_noise_conditioned_check(rademacher(), 1.0, 0.6, 0.0);
    CHECK(zero.margin == 0.6 * rademacher_rate(zero.worst_t * zero.worst_t));
    CHECK(zero.margin > 0.0);
    const NoiseConditionedCheck pass = wishart_noise_conditioned_check(rademacher(), 1.0, 0.6, 0.7);
    CHECK(pass.satisfied);
    CHECK(pass.margin > 0.0);
    const NoiseConditionedCheck side = wishart_noise_conditioned_check(rademacher(), 1.0, 0.6, 0.8);
    CHECK_FALSE(side.side_condition);
    CHECK_FALSE(side.satisfied);
    CHECK_THROWS_AS(wishart_noise_conditioned_check(rademacher(), 1.0, 0.6, -1.5), InvalidBeta);
  }

  TEST_CASE("Rademacher Wishart region at gamma = 1/3") {
    const double gamma = 1.0 / 3.0;
    for (int i = 0; i < 50; ++i) {
      const double beta = std::sqrt(gamma) * i / 50.0;
      const WishartRegion r = wishart_contiguity_region(rademacher(), 1.0, gamma, beta);
      CHECK(r.contiguous);
      CHECK(r.margin > 0.0);
      CHECK_FALSE(r.moment_unbounded);
    }
    const WishartRegion big = wishart_contiguity_region(rademacher(), 1.0, gamma, 1.1);
    CHECK(big.moment_unbounded);
    CHECK_FALSE(big.contiguous);
  }

  TEST_CASE("rate inequality fails just below the spectral bound at gamma = 1/2") {
    const double gamma = 0.5;
    const WishartRegion r = wishart_contiguity_region(rademacher(), 1.0, gamma, std::sqrt(gamma) - 0.001);
    CHECK_FALSE(r.contiguous);
    CHECK(r.moment_unbounded);
    CHECK(r.margin < 0.0);
    CHECK(r.worst_t > 0.0);
    CHECK(r.worst_t < 1.0);
    CHECK(rademacher_rate(r.worst_t) + std::log1p(-r.worst_t * std::pow(std::sqrt(gamma) - 0.001, 2)) / (2 * gamma) < 0.0);
  }

  TEST_CASE("truth-or-Haar thresholds") {
    const int ls[] = {2, 3, 4, 5, 6, 10, 100};
    const double table[] = {1.0, 0.961, 0.908, 0.860, 0.819, 0.703, 0.305};
    for (int i = 0; i < 7; ++i) CHECK(std::abs(toh_threshold(ls[i]) - table[i]) <= 5e-4);
    for (int L = 3; L <= 2000; ++L) CHECK(toh_threshold(L) < 1.0);
    CHECK(toh_threshold(1000000) < 0.01);
    CHECK(toh_upper_threshold(11) == doctest::Approx(0.9794).epsilon(1e-4));
    CHECK(toh_upper_threshold(11) < 1.0);
    CHECK(toh_upper_threshold(10) > 1.0);
    CHECK(toh_upper_threshold(2) == doctest::Approx(std::sqrt(4 * std::log(2.0))).epsilon(1e-14));
    CHECK(std::abs(toh_upper_threshold(1000000) / toh_threshold(1000000) - std::sqrt(2.0)) <= 1e-3);
    for (int L : {10000, 20000, 100000, 1000000}) CHECK(toh_upper_threshold(L) < toh_threshold(L) * std::sqrt(2.0) * 1.01);
    CHECK_THROWS_AS(toh_threshold(1), DomainError);
  }

  TEST_CASE("matrix optimization against the closed form") {
    for (int L = 3; L <= 12; ++L) {
      const MatrixOptReport r = matrix_opt_verify(L);
      const double closed = L * (L - 2.0) / (2.0 * (L - 1.0) * std::log(L - 1.0));
      CHECK(r.closed_form == doctest::Approx(closed).epsilon(1e-14));
      CHECK(std::abs(r.numeric_sup - closed) <= 1e-6);
      CHECK(r.argmax_k == 1);
      CHECK(r.ck_decreasing);
    }
    const MatrixOptReport five = matrix_opt_verify(5);
    CHECK(std::abs(five.argmax_x - 0.8) <= 1e-6);
    CHECK(matrix_opt_verify(3).closed_form == doctest::Approx(3.0 / (4.0 * std::log(2.0))).epsilon(1e-14));
    for (double k = 1.0; k + 1e-3 < 4.0; k += 1e-3) CHECK(block_constant(8, k + 1e-3) < block_constant(8, k));
  }

  TEST_CASE("sub-Gaussian synchronization thresholds") {
    const GroupSpec u1 = GroupSpec::circle();
    const ThresholdReport one = synch_subgaussian_threshold(u1, select_frequencies(u1, {"k1"}));
    CHECK(std::abs(one.value - 1.0) <= 1e-4);
    const ThresholdReport two = synch_subgaussian_threshold(u1, select_frequencies(u1, {"k1", "k2"}));
    CHECK(std::abs(two.value - 0.9371) <= 1e-3);
    REQUIRE(two.maximizer.size() == 4);
    const double expect[] = {0.720, 0.0, 0.559, 0.0};
    for (int i = 0; i < 4; ++i) CHECK(std::abs(std::abs(two.maximizer(i)) - expect[i]) <= 5e-3);
    const GroupSpec z3 = GroupSpec::cyclic(3);
    const ThresholdReport three = synch_subgaussian_threshold(z3, all_frequencies(z3));
    CHECK(std::abs(three.value - 0.961) <= 1e-3);
    CHECK(std::abs(synch_conditioning_threshold_allfreq(3) - three.value) <= 2e-3);
    CHECK(synch_conditioning_threshold_allfreq(2) == 1.0);
    CHECK(std::abs(synch_conditioning_threshold_allfreq(6) - 0.819) <= 5e-4);
  }

  TEST_CASE("general Hoeffding bound is dominated by the sub-Gaussian threshold") {
    const GroupSpec u1 = GroupSpec::circle();
    CHECK(synch_general_bound(select_frequencies(u1, {"k1", "k2"})) == doctest::Approx(0.5));
    CHECK(synch_general_bound(all_frequencies(GroupSpec::cyclic(2))) == doctest::Approx(1.0));
    for (const auto& g : {GroupSpec::cyclic(2), GroupSpec::cyclic(4), GroupSpec::cyclic(5), GroupSpec::symmetric3()}) {
      const auto reps = all_frequencies(g);
      CHECK(synch_subgaussian_threshold(g, reps).value >= synch_general_bound(reps) - 1e-6);
    }
  }

  TEST_CASE("sum of beta d^2 over all frequencies is L - 1") {
    std::vector<GroupSpec> groups;
    for (int L = 2; L <= 12; ++L) groups.push_back(GroupSpec::cyclic(L));
    groups.push_back(GroupSpec::symmetric3());
    groups.push_back(GroupSpec::quaternion8());
    for (const auto& g : groups) {
      double total = 0.0;
      for (const auto& r : all_frequencies(g)) total += r.beta() * r.dim * r.dim;
      CHECK(total == g.order() - 1);
    }
  }

  TEST_CASE("upper condition for exhaustive synchronization") {
    const GroupSpec z2 = GroupSpec::cyclic(2);
    const auto r2 = all_frequencies(z2);
    CHECK(synch_upper_condition({1.7}, z2, r2));
    CHECK_FALSE(synch_upper_condition({1.6}, z2, r2));
    CHECK_FALSE(synch_upper_condition({0.0}, z2, r2));
    const GroupSpec z5 = GroupSpec::cyclic(5);
    const auto r5 = all_frequencies(z5);
    const double edge = toh_upper_threshold(5);
    CHECK(synch_upper_condition(std::vector<double>(r5.size(), edge * (1 + 1e-9)), z5, r5));
    CHECK_FALSE(synch_upper_condition(std::vector<double>(r5.size(), edge * (1 - 1e-9)), z5, r5));
  }
}
