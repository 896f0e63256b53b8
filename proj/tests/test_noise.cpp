#include <doctest.h>

#include <cmath>
#include <numbers>

#include "spiked/errors.hpp"
#include "spiked/noise.hpp"
#include "spiked/quadrature.hpp"

using namespace spiked;

namespace {

// Independent Fisher information of 1/2 N(-m, s^2) + 1/2 N(m, s^2): the score
// is (w - m tanh(m w / s^2)) / s^2, integrated on a fixed trapezoid grid.
double mixture_fisher_oracle(double m, double s) {
  const double s2 = s * s;
  const double h = 1e-4;
  double total = 0.0;
  for (double w = -m - 14 * s; w <= m + 14 * s; w += h) {
    const double p = 0.5 * (std::exp(-(w - m) * (w - m) / (2 * s2)) + std::exp(-(w + m) * (w + m) / (2 * s2))) /
                     std::sqrt(2 * std::numbers::pi * s2);
    const double f = (w - m * std::tanh(m * w / s2)) / s2;
    total += p * f * f * h;
  }
  return total;
}

}  // namespace

TEST_SUITE("noise") {
  TEST_CASE("registered noises are zero-mean and unit-variance") {
    for (const auto& noise : {NoiseModel::gaussian(), NoiseModel::bimodal(0.95, 0.05), NoiseModel::gauss_mixture(0.5)}) {
      CHECK(noise.mean() == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(noise.variance() == doctest::Approx(1.0).epsilon(1e-12));
      auto mass = [&](double w) { return noise.density(w); };
      CHECK(integrate_real_line(mass, noise.support_scale()) == doctest::Approx(1.0).epsilon(1e-10));
    }
  }

  TEST_CASE("constructor rejects non-standardized mixtures") {
    CHECK_THROWS_AS(NoiseModel("shifted", {{1.0, 0.5, 1.0}}), InvalidNoise);
    CHECK_THROWS_AS(NoiseModel("wide", {{1.0, 0.0, 2.0}}), InvalidNoise);
    CHECK_THROWS_AS(NoiseModel::bimodal(0.9, 0.2), InvalidNoise);
    CHECK_THROWS_AS(parse_noise("laplace"), InvalidNoise);
  }

  TEST_CASE("parse_noise ids") {
    CHECK(parse_noise("gaussian").is_gaussian());
    CHECK(parse_noise("bimodal{0.95,0.05}").id() == "bimodal{0.95,0.05}");
    CHECK(parse_noise("bimodal").id() == "bimodal{0.95,0.05}");
    CHECK(parse_noise("gauss_mixture{0.5}").components().size() == 2);
  }

  TEST_CASE("Gaussian score is the identity") {
    const NoiseModel g = NoiseModel::gaussian();
    for (double w : {-7.5, -1.25, 0.0, 0.3, 2.0, 11.0}) CHECK(score(g, w) == w);
    CHECK(score_derivative(g, 0.7) == doctest::Approx(1.0));
    CHECK(score_second_derivative(g, 0.7) == doctest::Approx(0.0));
  }

  TEST_CASE("score matches a finite difference of log p") {
    for (const auto& noise : {NoiseModel::gaussian(), NoiseModel::bimodal(0.95, 0.05), NoiseModel::gauss_mixture(0.6)}) {
      for (double w = -3.0; w <= 3.0; w += 0.125) {
        const double h = 1e-5;
        const double fd = -(noise.log_density(w + h) - noise.log_density(w - h)) / (2 * h);
        CHECK(std::abs(score(noise, w) - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
        const double fd2 = (score(noise, w + h) - score(noise, w - h)) / (2 * h);
        CHECK(std::abs(score_derivative(noise, w) - fd2) <= 1e-5 * std::max(1.0, std::abs(fd2)));
        const double fd3 = (score_derivative(noise, w + h) - score_derivative(noise, w - h)) / (2 * h);
        CHECK(std::abs(score_second_derivative(noise, w) - fd3) <= 1e-4 * std::max(1.0, std::abs(fd3)));
      }
    }
  }

  TEST_CASE("score and its derivatives obey the polynomial bound") {
    for (const auto& noise : {NoiseModel::bimodal(0.95, 0.05), NoiseModel::gauss_mixture(0.8)}) {
      const PolynomialBound b = noise.polynomial_bound();
      for (double w = -40.0; w <= 40.0; w += 0.01) {
        const double cap = b.constant + std::pow(std::abs(w), b.degree);
        CHECK(std::abs(score(noise, w)) <= cap);
        CHECK(std::abs(score_derivative(noise, w)) <= cap);
        CHECK(std::abs(score_second_derivative(noise, w)) <= cap);
      }
    }
  }

  TEST_CASE("Fisher information of the canonical bimodal noise") {
    const double f = fisher_information(NoiseModel::bimodal(0.95, 0.05));
    CHECK(f == doctest::Approx(mixture_fisher_oracle(std::sqrt(0.95), std::sqrt(0.05))).epsilon(1e-8));
    CHECK(f == doctest::Approx(19.992283367436).epsilon(1e-10));
  }

  TEST_CASE("Fisher information is at least 1 with equality only for the Gaussian") {
    CHECK(std::abs(fisher_information(NoiseModel::gaussian()) - 1.0) <= 1e-6);
    for (double a : {0.2, 0.5, 0.8, 0.95}) {
      const double f = fisher_information(NoiseModel::gauss_mixture(a));
      CHECK(f > 1.0 + 1e-6);
      CHECK(f == doctest::Approx(mixture_fisher_oracle(a, std::sqrt(1 - a * a))).epsilon(1e-7));
    }
  }

  TEST_CASE("Gaussian translation function is ab") {
    const NoiseModel g = NoiseModel::gaussian();
    CHECK(translation_fn(g, 0.4, -0.2) == doctest::Approx(-0.08).epsilon(1e-10));
    CHECK(translation_fn(g, 0.7, 0.9) == doctest::Approx(0.63).epsilon(1e-10));
  }

  TEST_CASE("translation function vanishes on the axes") {
    for (const auto& noise : {NoiseModel::gaussian(), NoiseModel::bimodal(0.95, 0.05), NoiseModel::gauss_mixture(0.3)}) {
      for (double a : {-1.0, -0.3, 0.01, 0.8}) {
        CHECK(std::abs(translation_fn(noise, a, 0.0)) <= 1e-8);
        CHECK(std::abs(translation_fn(noise, 0.0, a)) <= 1e-8);
      }
    }
  }

  TEST_CASE("translation function is even for symmetric noise") {
    for (const auto& noise : {NoiseModel::bimodal(0.95, 0.05), NoiseModel::gauss_mixture(0.6)}) {
      for (auto [a, b] : {std::pair{0.3, -0.7}, {0.05, 0.02}, {-0.9, -0.4}, {1.0, 0.5}}) {
        CHECK(std::abs(translation_fn(noise, -a, -b) - translation_fn(noise, a, b)) <= 1e-8);
      }
    }
  }

  TEST_CASE("mixed partial of tau at the origin is the Fisher information") {
    const NoiseModel noise = NoiseModel::bimodal(0.95, 0.05);
    const double h = 1e-3;
    const double mixed = (translation_fn(noise, h, h) - translation_fn(noise, h, -h) - translation_fn(noise, -h, h) +
                          translation_fn(noise, -h, -h)) /
                         (4 * h * h);
    CHECK(mixed == doctest::Approx(fisher_information(noise)).epsilon(1e-3));
  }

  TEST_CASE("translation function domain is clipped to the unit box") {
    CHECK_THROWS_AS(translation_fn(NoiseModel::gaussian(), 1.5, 0.1), DomainError);
    CHECK_THROWS_AS(translation_fn(NoiseModel::gaussian(), 0.1, -1.01), DomainError);
  }

  TEST_CASE("sampling reproduces the first two moments") {
    const NoiseModel noise = NoiseModel::bimodal(0.95, 0.05);
    Rng rng = make_rng(5);
    const int m = 200000;
    double s1 = 0, s2 = 0;
    for (int i = 0; i < m; ++i) {
      const double w = noise.sample(rng);
      s1 += w;
      s2 += w * w;
    }
    CHECK(std::abs(s1 / m) <= 3.0 / std::sqrt(m));
    // Var(W^2) = E W^4 - 1 for the mixture.
    const double mu2 = 0.95, s = 0.05;
    const double m4 = mu2 * mu2 + 6 * mu2 * s + 3 * s * s;
    CHECK(std::abs(s2 / m - 1.0) <= 3.0 * std::sqrt((m4 - 1.0) / m));
  }
}
