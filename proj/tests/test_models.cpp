#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "spiked/errors.hpp"
#include "spiked/groups.hpp"
#include "spiked/models.hpp"

using namespace spiked;

namespace {

double semicircle_cdf(double x) {
  if (x <= -2.0) return 0.0;
  if (x >= 2.0) return 1.0;
  return 0.5 + x * std::sqrt(4.0 - x * x) / (4.0 * std::numbers::pi) + std::asin(x / 2.0) / std::numbers::pi;
}

double top_eigenvalue(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

double top_eigenvalue(const Eigen::MatrixXcd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(m, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

std::vector<GroupSpec> finite_groups() {
  return {GroupSpec::cyclic(2), GroupSpec::cyclic(3), GroupSpec::cyclic(5), GroupSpec::cyclic(12),
          GroupSpec::symmetric3(), GroupSpec::quaternion8()};
}

std::vector<GroupElement> elements(const GroupSpec& g) {
  std::vector<GroupElement> out;
  for (int i = 0; i < g.order(); ++i) out.push_back(g.element(i));
  return out;
}

// Running sums of the first four powers.
struct Moments {
  double s[5] = {0, 0, 0, 0, 0};
  double s2[5] = {0, 0, 0, 0, 0};
  long count = 0;
  void add(double v) {
    double p = 1.0;
    for (int k = 1; k <= 4; ++k) {
      p *= v;
      s[k] += p;
      s2[k] += p * p;
    }
    ++count;
  }
  double mean(int k) const { return s[k] / count; }
  double var(int k) const { return s2[k] / count - mean(k) * mean(k); }
};

}  // namespace

TEST_SUITE("models") {
  TEST_CASE("group axioms hold for the catalogue") {
    Rng rng = make_rng(4);
    for (const auto& g : finite_groups()) {
      for (const auto& a : elements(g)) CHECK(g.multiply(a, g.inverse(a)) == g.identity());
      for (int i = 0; i < 100; ++i) {
        const auto a = g.uniform(rng), b = g.uniform(rng), c = g.uniform(rng);
        CHECK(g.multiply(g.multiply(a, b), c) == g.multiply(a, g.multiply(b, c)));
      }
    }
    const GroupSpec u = GroupSpec::circle();
    for (int i = 0; i < 100; ++i) {
      const auto a = u.uniform(rng);
      const auto e = u.multiply(a, u.inverse(a));
      CHECK(std::min(e.angle, 2 * std::numbers::pi - e.angle) <= 1e-12);
    }
  }

  TEST_CASE("group ids parse") {
    CHECK(parse_group("zl:3").order() == 3);
    CHECK(parse_group("Z5").order() == 5);
    CHECK(parse_group("Z{7}").order() == 7);
    CHECK(parse_group("S3").order() == 6);
    CHECK(parse_group("Q8").order() == 8);
    CHECK(parse_group("U1").is_circle());
    CHECK_THROWS_AS(parse_group("zl:x"), InvalidGroup);
    CHECK_THROWS_AS(parse_group("SO3"), InvalidGroup);
    CHECK_THROWS_AS(GroupSpec::cyclic(257), InvalidGroup);
  }

  TEST_CASE("multiplication tables load from file") {
    const auto dir = std::filesystem::temp_directory_path() / "spiked_models_test";
    std::filesystem::create_directories(dir);
    const auto good = dir / "z4.txt";
    std::ofstream(good) << "4\n0 1 2 3\n1 2 3 0\n2 3 0 1\n3 0 1 2\n";
    const GroupSpec g = parse_group("table:" + good.string());
    CHECK(g.order() == 4);
    CHECK(g.inverse(g.element(1)) == g.element(3));
    const auto bad = dir / "bad.txt";
    std::ofstream(bad) << "3\n0 1 2\n1 1 0\n2 0 1\n";
    CHECK_THROWS_AS(GroupSpec::from_table_file(bad.string()), InvalidGroup);
    const auto nonassoc = dir / "nonassoc.txt";
    // A Latin square with identity 0 that is not associative.
    std::ofstream(nonassoc) << "5\n0 1 2 3 4\n1 0 3 4 2\n2 4 0 1 3\n3 2 4 0 1\n4 3 1 2 0\n";
    CHECK_THROWS_AS(GroupSpec::from_table_file(nonassoc.string()), InvalidGroup);
  }

  TEST_CASE("representations are unitary homomorphisms") {
    for (const auto& g : finite_groups()) {
      for (const auto& rep : all_frequencies(g)) {
        for (const auto& a : elements(g)) {
          const Eigen::MatrixXcd ra = rep.matrix(a);
          const int dc = rep.complex_dim();
          CHECK((ra * ra.adjoint() - Eigen::MatrixXcd::Identity(dc, dc)).norm() <= 1e-10);
          CHECK(std::abs(ra.squaredNorm() - dc) <= 1e-10);
          for (const auto& b : elements(g))
            CHECK((ra * rep.matrix(b) - rep.matrix(g.multiply(a, b))).norm() <= 1e-10);
        }
      }
    }
    const GroupSpec u = GroupSpec::circle();
    Rng rng = make_rng(8);
    for (int k : {1, 2, 5}) {
      const RepresentationSpec rep = circle_frequency(k);
      for (int i = 0; i < 50; ++i) {
        const auto a = u.uniform(rng), b = u.uniform(rng);
        CHECK((rep.matrix(a) * rep.matrix(b) - rep.matrix(u.multiply(a, b))).norm() <= 1e-10);
      }
    }
  }

  TEST_CASE("quaternionic frequency uses 2x2 complex blocks") {
    const GroupSpec q8 = GroupSpec::quaternion8();
    const auto reps = all_frequencies(q8);
    const auto it = std::find_if(reps.begin(), reps.end(), [](const auto& r) { return r.type == RepType::quaternionic; });
    REQUIRE(it != reps.end());
    for (const auto& a : elements(q8)) {
      const Eigen::MatrixXcd m = it->matrix(a);
      CHECK(m.rows() == 2);
      CHECK(std::abs(m.squaredNorm() - 2.0 * it->dim) <= 1e-12);
      CHECK(m(1, 1) == std::conj(m(0, 0)));
      CHECK(m(1, 0) == -std::conj(m(0, 1)));
    }
    const Eigen::Matrix2cd blk = quaternion_block(1, 2, 3, 4);
    CHECK(blk(0, 0) == cplx(1, 2));
    CHECK(blk(0, 1) == cplx(3, 4));
    CHECK(blk(1, 0) == cplx(-3, 4));
    CHECK(blk(1, 1) == cplx(1, -2));
  }

  TEST_CASE("frequency catalogue ordering and the trivial representation") {
    const auto z6 = all_frequencies(GroupSpec::cyclic(6));
    REQUIRE(z6.size() == 3);
    CHECK(z6[0].type == RepType::real);
    CHECK(z6[0].id == "k3");
    CHECK(z6[1].id == "k1");
    CHECK(z6[2].id == "k2");
    CHECK_THROWS_AS(cyclic_frequency(4, 4), TrivialRepresentation);
    CHECK(select_frequencies(GroupSpec::cyclic(3), {"1"})[0].id == "k1");
    CHECK(select_frequencies(GroupSpec::circle(), {"k1", "2"})[1].id == "k2");
  }

  TEST_CASE("unspiked GOE entry moments at n = 200") {
    const int n = 200, draws = 10000;
    double s1 = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < draws; ++i) {
      const SampleBundle b = sample_gaussian_wigner(0.0, SpikePrior::spherical(), n, mix_seed(31, i));
      const double v = std::sqrt(static_cast<double>(n)) * b.matrix(0, 1);
      s1 += v;
      s2 += v * v;
      s4 += v * v * v * v;
    }
    CHECK(std::abs(s1 / draws) <= 3.0 / std::sqrt(draws));
    CHECK(std::abs(s2 / draws - 1.0) <= 3.0 * std::sqrt(2.0 / draws));
  }

  TEST_CASE("unspiked GOE spectrum follows the semicircle") {
    const SampleBundle b = sample_gaussian_wigner(0.0, SpikePrior::spherical(), 1000, 5);
    Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(b.matrix, Eigen::EigenvaluesOnly).eigenvalues();
    double ks = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      const double f = semicircle_cdf(ev(i));
      ks = std::max({ks, std::abs(f - static_cast<double>(i) / ev.size()), std::abs(f - (i + 1.0) / ev.size())});
    }
    CHECK(ks <= 0.05);
  }

  TEST_CASE("spiked GOE top eigenvalue at n = 2000") {
    const SampleBundle b = sample_gaussian_wigner(1.5, SpikePrior::spherical(), 2000, 12);
    CHECK(std::abs(top_eigenvalue(b.matrix) - 13.0 / 6.0) <= 0.05);
  }

  TEST_CASE("Wigner samplers are symmetric and seed-deterministic") {
    const SampleBundle a = sample_wigner(0.7, SpikePrior::iid_rademacher(), NoiseModel::bimodal(0.95, 0.05), 60, 77);
    const SampleBundle b = sample_wigner(0.7, SpikePrior::iid_rademacher(), NoiseModel::bimodal(0.95, 0.05), 60, 77);
    CHECK(a.matrix == b.matrix);
    CHECK(a.spike == b.spike);
    CHECK(a.matrix == a.matrix.transpose());
    CHECK(a.matrix.diagonal().isZero(0.0));
    const SampleBundle g = sample_gaussian_wigner(0.7, SpikePrior::spherical(), 60, 77);
    CHECK(g.matrix == g.matrix.transpose());
    CHECK(g.matrix == sample_gaussian_wigner(0.7, SpikePrior::spherical(), 60, 77).matrix);
    const SampleBundle w = sample_wishart(0.5, 0.5, SpikePrior::spherical(), 30, 2);
    CHECK(w.matrix == sample_wishart(0.5, 0.5, SpikePrior::spherical(), 30, 2).matrix);
  }

  TEST_CASE("Gaussian-noise Wigner matches the GOE off the diagonal") {
    const int n = 100, draws = 4000;
    const NoiseModel gaussian = NoiseModel::gaussian();
    double s2 = 0;
    for (int i = 0; i < draws; ++i) {
      const SampleBundle b = sample_wigner(0.0, SpikePrior::spherical(), gaussian, n, mix_seed(3, i));
      CHECK(b.matrix(4, 4) == 0.0);
      s2 += n * b.matrix(2, 9) * b.matrix(2, 9);
    }
    CHECK(std::abs(s2 / draws - 1.0) <= 3.0 * std::sqrt(2.0 / draws));
  }

  TEST_CASE("bimodal Wigner at lambda = 0.9 shows no outlier") {
    const SampleBundle b = sample_wigner(0.9, SpikePrior::iid_rademacher(), NoiseModel::bimodal(0.95, 0.05), 1200, 19);
    CHECK(std::abs(top_eigenvalue(b.matrix) - 2.0) <= 0.1);
  }

  TEST_CASE("unspiked Wigner edge is universal") {
    for (const auto& noise : {NoiseModel::bimodal(0.95, 0.05), NoiseModel::gauss_mixture(0.6), NoiseModel::gaussian()}) {
      const SampleBundle b = sample_wigner(0.0, SpikePrior::spherical(), noise, 800, 23);
      CHECK(std::abs(top_eigenvalue(b.matrix) - 2.0) <= 0.15);
    }
  }

  TEST_CASE("white Wishart diagonal mean") {
    const int n = 20, draws = 2000;
    const double gamma = 0.5;
    double s = 0;
    long cols = 0;
    for (int i = 0; i < draws; ++i) {
      const SampleBundle b = sample_wishart(0.0, gamma, SpikePrior::spherical(), n, mix_seed(41, i));
      cols = b.samples.cols();
      s += b.matrix(0, 0) / cols;
    }
    CHECK(cols == 40);
    // Y_11 / N has variance 2/N.
    CHECK(std::abs(s / draws - 1.0) <= 3.0 * std::sqrt(2.0 / cols / draws));
  }

  TEST_CASE("Wishart spike direction carries variance 1 + beta") {
    const int n = 100, trials = 100;
    const double gamma = 0.5, beta = 0.8;
    double sum = 0;
    long cols = 0;
    for (int i = 0; i < trials; ++i) {
      const SampleBundle b = sample_wishart(beta, gamma, SpikePrior::spherical(), n, mix_seed(43, i));
      cols = b.samples.cols();
      const Eigen::VectorXd xh = b.spike.normalized();
      sum += xh.dot(b.matrix * xh) / cols;
    }
    const double se = (1 + beta) * std::sqrt(2.0 / cols) / std::sqrt(trials);
    CHECK(std::abs(sum / trials - (1 + beta)) <= 3.0 * se);
  }

  TEST_CASE("Wishart top eigenvalue separates above sqrt(gamma)") {
    const int n = 500;
    const double gamma = 0.25, beta = 0.8;
    const double edge = (1 + std::sqrt(gamma)) * (1 + std::sqrt(gamma));
    const SampleBundle s = sample_wishart(beta, gamma, SpikePrior::iid_rademacher(), n, 47);
    const SampleBundle z = sample_wishart(0.0, gamma, SpikePrior::iid_rademacher(), n, 47);
    const double top_s = top_eigenvalue(s.matrix) / s.samples.cols();
    const double top_z = top_eigenvalue(z.matrix) / z.samples.cols();
    CHECK(top_s > edge + 0.05);
    CHECK(top_z < edge + 0.05);
    CHECK(top_s - top_z > 0.05);
  }

  TEST_CASE("Wishart rejects beta below -1") {
    CHECK_THROWS_AS(sample_wishart(-1.2, 0.5, SpikePrior::spherical(), 10, 1), InvalidBeta);
    CHECK_NOTHROW(sample_wishart(-1.0, 0.5, SpikePrior::spherical(), 10, 1));
  }

  TEST_CASE("truth-or-Haar structure") {
    const GroupSpec g = GroupSpec::symmetric3();
    const SampleBundle b = sample_toh(2.0, g, 30, 6);
    for (int u = 0; u < 30; ++u) {
      CHECK(b.group_matrix(u, u) == g.identity().index);
      for (int v = 0; v < 30; ++v)
        CHECK(g.multiply(g.element(b.group_matrix(u, v)), g.element(b.group_matrix(v, u))) == g.identity());
    }
    CHECK_THROWS_AS(sample_toh(5.0, g, 16, 1), InvalidProbability);
    CHECK_THROWS_AS(sample_toh(1.0, GroupSpec::circle(), 16, 1), InvalidGroup);
  }

  TEST_CASE("unspiked truth-or-Haar entries are uniform") {
    const GroupSpec g = GroupSpec::cyclic(3);
    std::array<long, 3> counts{};
    long total = 0;
    for (int s = 0; s < 9; ++s) {
      const SampleBundle b = sample_toh(0.0, g, 50, mix_seed(51, s));
      for (int u = 0; u < 50; ++u)
        for (int v = u + 1; v < 50; ++v) {
          ++counts[b.group_matrix(u, v)];
          ++total;
        }
    }
    CHECK(total >= 10000);
    double chi2 = 0;
    for (long c : counts) chi2 += (c - total / 3.0) * (c - total / 3.0) / (total / 3.0);
    CHECK(chi2 < 9.2103);  // 99% quantile of chi-square with 2 degrees of freedom
  }

  TEST_CASE("planted assignment satisfies Binomial(N, p') edges") {
    const GroupSpec g = GroupSpec::cyclic(4);
    const int n = 40, trials = 200;
    const double p = 3.0 / std::sqrt(n);
    const double pp = p + (1 - p) / 4;
    const int edges = n * (n - 1) / 2;
    double sum = 0;
    for (int t = 0; t < trials; ++t) {
      const SampleBundle b = sample_toh(3.0, g, n, mix_seed(53, t));
      for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) {
          const auto truth = g.multiply(b.assignment[u], g.inverse(b.assignment[v]));
          sum += b.group_matrix(u, v) == truth.index;
        }
    }
    const double se = std::sqrt(edges * pp * (1 - pp) / trials);
    CHECK(std::abs(sum / trials - edges * pp) <= 3.0 * se);
  }

  TEST_CASE("Z/2 truth-or-Haar separates spectrally above p = 1") {
    const int n = 400;
    auto top = [&](double p_scaled) {
      const SampleBundle b = sample_toh(p_scaled, GroupSpec::cyclic(2), n, 59);
      Eigen::MatrixXd m = (1.0 - 2.0 * b.group_matrix.cast<double>().array()).matrix();
      m.diagonal().setZero();
      return top_eigenvalue(m) / std::sqrt(static_cast<double>(n));
    };
    const double spiked = top(2.0), null = top(0.0);
    CHECK(spiked > 2.3);
    CHECK(null < 2.15);
  }

  TEST_CASE("gsynch observations are Hermitian") {
    for (const auto& g : {GroupSpec::cyclic(5), GroupSpec::symmetric3(), GroupSpec::quaternion8()}) {
      const auto reps = all_frequencies(g);
      const SampleBundle b = sample_gsynch(std::vector<double>(reps.size(), 1.2), g, reps, 12, 61);
      REQUIRE(b.channels.size() == reps.size());
      for (std::size_t k = 0; k < reps.size(); ++k) {
        CHECK(b.channels[k].rows() == 12 * reps[k].complex_dim());
        CHECK((b.channels[k] - b.channels[k].adjoint()).norm() == 0.0);
      }
    }
    CHECK_THROWS_AS(sample_gsynch({}, GroupSpec::cyclic(3), {}, 5, 1), TrivialRepresentation);
  }

  TEST_CASE("unspiked U(1) synchronization has a GUE edge") {
    const SampleBundle b = sample_gsynch({0.0}, GroupSpec::circle(), {circle_frequency(1)}, 300, 67);
    CHECK(std::abs(top_eigenvalue(b.channels[0]) - 2.0) <= 0.15);
  }

  TEST_CASE("Z/2 synchronization coincides with the Rademacher Gaussian Wigner model") {
    const int n = 4, draws = 100000;
    const GroupSpec z2 = GroupSpec::cyclic(2);
    const auto reps = all_frequencies(z2);
    Moments a, b, da, db;
    for (int i = 0; i < draws; ++i) {
      const SampleBundle s = sample_gsynch({1.5}, z2, reps, n, mix_seed(71, i));
      const SampleBundle w = sample_gaussian_wigner(1.5, SpikePrior::iid_rademacher(), n, mix_seed(73, i));
      a.add(s.channels[0](0, 1).real());
      b.add(w.matrix(0, 1));
      da.add(s.channels[0](2, 2).real());
      db.add(w.matrix(2, 2));
    }
    for (int k = 1; k <= 4; ++k) {
      CHECK(std::abs(a.mean(k) - b.mean(k)) <= 4.0 * std::sqrt((a.var(k) + b.var(k)) / draws));
      CHECK(std::abs(da.mean(k) - db.mean(k)) <= 4.0 * std::sqrt((da.var(k) + db.var(k)) / draws));
    }
  }

  TEST_CASE("Gaussian ensembles have the stated component variances") {
    const int draws = 100000;
    double real11 = 0, c_abs = 0, c_re = 0, c_im = 0, c_cross = 0;
    for (int i = 0; i < draws; ++i) {
      const Eigen::MatrixXcd r = sample_gaussian_ensemble(RepType::real, 2, mix_seed(79, i));
      real11 += std::norm(r(0, 0));
      CHECK(r(0, 1).imag() == 0.0);
      const Eigen::MatrixXcd c = sample_gaussian_ensemble(RepType::complex, 2, mix_seed(83, i));
      c_abs += std::norm(c(0, 1));
      c_re += c(0, 1).real() * c(0, 1).real();
      c_im += c(0, 1).imag() * c(0, 1).imag();
      c_cross += c(0, 1).real() * c(0, 1).imag();
    }
    CHECK(std::abs(real11 / draws - 2.0) <= 3.0 * 2.0 * std::sqrt(2.0 / draws));
    CHECK(std::abs(c_abs / draws - 1.0) <= 3.0 * std::sqrt(1.0 / draws));
    CHECK(std::abs(c_re / draws - 0.5) <= 3.0 * 0.5 * std::sqrt(2.0 / draws));
    CHECK(std::abs(c_im / draws - 0.5) <= 3.0 * 0.5 * std::sqrt(2.0 / draws));
    CHECK(std::abs(c_cross / draws) <= 3.0 * 0.5 / std::sqrt(draws));
  }

  TEST_CASE("quaternionic ensemble keeps the block structure") {
    const Eigen::MatrixXcd q = sample_gaussian_ensemble(RepType::quaternionic, 5, 89);
    REQUIRE(q.rows() == 10);
    CHECK((q - q.adjoint()).norm() == 0.0);
    for (int u = 0; u < 5; ++u)
      for (int v = 0; v < 5; ++v) {
        const Eigen::Matrix2cd blk = q.block<2, 2>(2 * u, 2 * v);
        CHECK(blk(1, 1) == std::conj(blk(0, 0)));
        CHECK(blk(1, 0) == -std::conj(blk(0, 1)));
      }
  }
}
