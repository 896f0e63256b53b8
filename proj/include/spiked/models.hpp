#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spiked/groups.hpp"
#include "spiked/noise.hpp"
#include "spiked/priors.hpp"

namespace spiked {

// One draw from a planted model plus everything needed to reproduce it.
struct SampleBundle {
  std::string model;
  std::map<std::string, double> params;
  std::uint64_t seed = 0;
  int n = 0;

  Eigen::VectorXd spike;                   // empty when unspiked or group-valued
  std::vector<GroupElement> assignment;    // planted group elements
  Eigen::MatrixXd matrix;                  // Wigner / Wishart Gram observation
  Eigen::MatrixXd samples;                 // Wishart columns, n x N
  Eigen::MatrixXi group_matrix;            // truth-or-Haar observation
  std::vector<Eigen::MatrixXcd> channels;  // one Hermitian block matrix per frequency
  std::vector<RepresentationSpec> reps;
};

// lambda x x^T + W/sqrt(n), W from the GOE (off-diagonal N(0,1), diagonal N(0,2)).
SampleBundle sample_gaussian_wigner(double lambda, const SpikePrior& prior, int n,
                                    std::uint64_t seed);

// Off-diagonal lambda x_i x_j + W_ij/sqrt(n) with W_ij from the noise, zero diagonal.
SampleBundle sample_wigner(double lambda, const SpikePrior& prior, const NoiseModel& noise,
                           int n, std::uint64_t seed);

// N = round(n/gamma) columns z + (sqrt(1+beta) - 1) <z, xhat> xhat, z ~ N(0, I).
SampleBundle sample_wishart(double beta, double gamma, const SpikePrior& prior, int n,
                            std::uint64_t seed);

// Edge (u,v) carries g_u g_v^-1 with probability p = p_scaled/sqrt(n), else Haar.
SampleBundle sample_toh(double p_scaled, const GroupSpec& group, int n, std::uint64_t seed);

// Per frequency: (lambda/n) X X^* + W/sqrt(n d), W from the matching Gaussian ensemble.
SampleBundle sample_gsynch(const std::vector<double>& lambdas, const GroupSpec& group,
                           const std::vector<RepresentationSpec>& reps, int n, std::uint64_t seed);

// Hermitian m x m matrix over R, C or H with off-diagonal components of
// variance 1/beta and diagonal N(0, 2/beta). Quaternionic output is 2m x 2m.
Eigen::MatrixXcd sample_gaussian_ensemble(RepType type, int m, Rng& rng);
Eigen::MatrixXcd sample_gaussian_ensemble(RepType type, int m, std::uint64_t seed);
Eigen::MatrixXd sample_goe(int m, Rng& rng);

// Stacked representation matrices rho(g_1), ..., rho(g_n) (n d_C x d_C).
Eigen::MatrixXcd stacked_representation(const RepresentationSpec& rep,
                                        const std::vector<GroupElement>& assignment);

}  // namespace spiked
