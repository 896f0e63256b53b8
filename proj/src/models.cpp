#include "spiked/models.hpp"

#include <cmath>

#include "spiked/errors.hpp"

namespace spiked {

Eigen::MatrixXd sample_goe(int m, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd w(m, m);
  for (int j = 0; j < m; ++j) {
    w(j, j) = std::sqrt(2.0) * normal(rng);
    for (int i = j + 1; i < m; ++i) w(j, i) = w(i, j) = normal(rng);
  }
  return w;
}

Eigen::MatrixXcd sample_gaussian_ensemble(RepType type, int m, Rng& rng) {
  if (m < 1) throw DomainError("ensemble size must be positive");
  const int beta = beta_of(type);
  const double sd = std::sqrt(1.0 / beta);
  const double diag_sd = std::sqrt(2.0 / beta);
  if (type == RepType::quaternionic) {
    Eigen::MatrixXcd w(2 * m, 2 * m);
    for (int j = 0; j < m; ++j) {
      w.block<2, 2>(2 * j, 2 * j) = quaternion_block(diag_sd * standard_normal(rng), 0, 0, 0);
      for (int i = j + 1; i < m; ++i) {
        const double a = sd * standard_normal(rng), b = sd * standard_normal(rng);
        const double c = sd * standard_normal(rng), d = sd * standard_normal(rng);
        const Eigen::Matrix2cd q = quaternion_block(a, b, c, d);
        w.block<2, 2>(2 * i, 2 * j) = q;
        w.block<2, 2>(2 * j, 2 * i) = q.adjoint();
      }
    }
    return w;
  }
  Eigen::MatrixXcd w(m, m);
  for (int j = 0; j < m; ++j) {
    w(j, j) = diag_sd * standard_normal(rng);
    for (int i = j + 1; i < m; ++i) {
      const double re = sd * standard_normal(rng);
      const double im = type == RepType::complex ? sd * standard_normal(rng) : 0.0;
      w(i, j) = cplx(re, im);
      w(j, i) = cplx(re, -im);
    }
  }
  return w;
}

Eigen::MatrixXcd sample_gaussian_ensemble(RepType type, int m, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return sample_gaussian_ensemble(type, m, rng);
}

SampleBundle sample_gaussian_wigner(double lambda, const SpikePrior& prior, int n,
                                    std::uint64_t seed) {
  if (n < 1) throw DomainError("n must be positive");
  Rng rng = make_rng(seed);
  SampleBundle b;
  b.model = "gaussian_wigner";
  b.params = {{"lambda", lambda}};
  b.seed = seed;
  b.n = n;
  b.spike = sample_spike(prior, n, rng);
  b.matrix = sample_goe(n, rng) / std::sqrt(static_cast<double>(n));
  const Eigen::VectorXd scaled = lambda * b.spike;
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i) {
      const double s = scaled(i) * b.spike(j);
      b.matrix(i, j) += s;
      if (i != j) b.matrix(j, i) += s;
    }
  return b;
}

SampleBundle sample_wigner(double lambda, const SpikePrior& prior, const NoiseModel& noise,
                           int n, std::uint64_t seed) {
  if (n < 1) throw DomainError("n must be positive");
  Rng rng = make_rng(seed);
  SampleBundle b;
  b.model = "wigner";
  b.params = {{"lambda", lambda}};
  b.seed = seed;
  b.n = n;
  b.spike = sample_spike(prior, n, rng);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  b.matrix.resize(n, n);
  for (int j = 0; j < n; ++j) {
    b.matrix(j, j) = 0.0;
    for (int i = j + 1; i < n; ++i)
      b.matrix(i, j) = b.matrix(j, i) = lambda * b.spike(i) * b.spike(j) + noise.sample(rng) * scale;
  }
  return b;
}

SampleBundle sample_wishart(double beta, double gamma, const SpikePrior& prior, int n,
                            std::uint64_t seed) {
  if (beta < -1.0) throw InvalidBeta("Wishart spike strength must be >= -1");
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  const long cols = std::lround(n / gamma);
  if (cols < 1) throw DomainError("gamma too large for n: no samples");
  Rng rng = make_rng(seed);
  SampleBundle b;
  b.model = "wishart";
  b.params = {{"beta", beta}, {"gamma", gamma}, {"samples", static_cast<double>(cols)}};
  b.seed = seed;
  b.n = n;
  b.spike = sample_spike(prior, n, rng);
  b.samples.resize(n, cols);
  for (long c = 0; c < cols; ++c)
    for (int i = 0; i < n; ++i) b.samples(i, c) = standard_normal(rng);
  const double norm = b.spike.norm();
  if (norm > 0.0 && beta != 0.0) {
    const Eigen::VectorXd dir = b.spike / norm;
    const Eigen::RowVectorXd proj = dir.transpose() * b.samples;
    b.samples.noalias() += (std::sqrt(1.0 + beta) - 1.0) * dir * proj;
  }
  b.matrix = b.samples * b.samples.transpose();
  return b;
}

SampleBundle sample_toh(double p_scaled, const GroupSpec& group, int n, std::uint64_t seed) {
  if (group.is_circle()) throw InvalidGroup("truth-or-Haar needs a finite group");
  if (n < 2) throw DomainError("n must be at least 2");
  const double p = p_scaled / std::sqrt(static_cast<double>(n));
  if (p < 0.0 || p > 1.0) throw InvalidProbability("p_scaled/sqrt(n) must lie in [0, 1]");
  Rng rng = make_rng(seed);
  SampleBundle b;
  b.model = "toh";
  b.params = {{"p_scaled", p_scaled}, {"p", p}};
  b.seed = seed;
  b.n = n;
  b.assignment.resize(n);
  for (auto& g : b.assignment) g = group.uniform(rng);
  b.group_matrix.resize(n, n);
  const int e = group.identity().index;
  for (int u = 0; u < n; ++u) {
    b.group_matrix(u, u) = e;
    for (int v = u + 1; v < n; ++v) {
      const bool truth = uniform01(rng) < p;
      const GroupElement y = truth ? group.multiply(b.assignment[u], group.inverse(b.assignment[v]))
                                   : group.uniform(rng);
      b.group_matrix(u, v) = y.index;
      b.group_matrix(v, u) = group.inverse(y).index;
    }
  }
  return b;
}

Eigen::MatrixXcd stacked_representation(const RepresentationSpec& rep,
                                        const std::vector<GroupElement>& assignment) {
  const int dc = rep.complex_dim();
  Eigen::MatrixXcd x(static_cast<Eigen::Index>(assignment.size()) * dc, dc);
  for (std::size_t u = 0; u < assignment.size(); ++u)
    x.block(static_cast<Eigen::Index>(u) * dc, 0, dc, dc) = rep.matrix(assignment[u]);
  return x;
}

SampleBundle sample_gsynch(const std::vector<double>& lambdas, const GroupSpec& group,
                           const std::vector<RepresentationSpec>& reps, int n, std::uint64_t seed) {
  if (reps.empty()) throw TrivialRepresentation("at least one nontrivial frequency is required");
  if (lambdas.size() != reps.size()) throw ConfigError("one lambda per frequency is required");
  if (n < 1) throw DomainError("n must be positive");
  Rng rng = make_rng(seed);
  SampleBundle b;
  b.model = "gsynch";
  b.seed = seed;
  b.n = n;
  b.reps = reps;
  for (std::size_t k = 0; k < reps.size(); ++k) b.params["lambda_" + reps[k].id] = lambdas[k];
  b.assignment.resize(n);
  for (auto& g : b.assignment) g = group.uniform(rng);
  for (std::size_t k = 0; k < reps.size(); ++k) {
    const auto& rep = reps[k];
    const Eigen::MatrixXcd x = stacked_representation(rep, b.assignment);
    Eigen::MatrixXcd y = sample_gaussian_ensemble(rep.type, n * rep.dim, rng) /
                         std::sqrt(static_cast<double>(n) * rep.dim);
    y.noalias() += (lambdas[k] / n) * x * x.adjoint();
    b.channels.push_back(0.5 * (y + y.adjoint()));
  }
  return b;
}

}  // namespace spiked
