#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <type_traits>

#include "spiked/errors.hpp"
#include "spiked/random.hpp"

namespace spiked {

enum class Extreme { largest, smallest };

template <class Scalar>
struct Eigenpair {
  double value = 0.0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> vector;
  int matvecs = 0;
  bool dense = false;
};

struct EigenOptions {
  double rel_tol = 1e-10;
  int max_matvecs = 2000;
  int krylov_dim = 120;
  int dense_below = 64;    // always dense for tiny problems
  int dense_fallback = 512;
  std::uint64_t seed = 0x5eed;
};

namespace detail {

template <class Scalar>
Scalar random_entry(Rng& rng) {
  if constexpr (std::is_same_v<Scalar, std::complex<double>>)
    return {standard_normal(rng), standard_normal(rng)};
  else
    return standard_normal(rng);
}

template <class Scalar>
Eigenpair<Scalar> dense_extreme(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& m,
                                Extreme which) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> es(m);
  if (es.info() != Eigen::Success) throw NonConvergence("dense eigensolver failed");
  const Eigen::Index k = which == Extreme::largest ? m.rows() - 1 : 0;
  Eigenpair<Scalar> out;
  out.value = es.eigenvalues()(k);
  out.vector = es.eigenvectors().col(k);
  out.dense = true;
  return out;
}

}  // namespace detail

// Extreme eigenpair of a Hermitian matrix: restarted Lanczos with full
// reorthogonalization, falling back to a dense solve for m <= 512.
template <class Derived>
Eigenpair<typename Derived::Scalar> extreme_eigenpair(const Eigen::MatrixBase<Derived>& mat,
                                                      Extreme which,
                                                      const EigenOptions& opts = {}) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Mat m = which == Extreme::largest ? Mat(mat) : Mat(-mat);
  const Eigen::Index size = m.rows();
  if (size == 0 || m.cols() != size) throw DomainError("extreme_eigenpair needs a square matrix");

  auto flip = [&](Eigenpair<Scalar> p) {
    if (which == Extreme::smallest) p.value = -p.value;
    return p;
  };
  if (size <= opts.dense_below) return flip(detail::dense_extreme<Scalar>(m, Extreme::largest));

  Rng rng = make_rng(opts.seed);
  Vec start(size);
  for (Eigen::Index i = 0; i < size; ++i) start(i) = detail::random_entry<Scalar>(rng);
  start.normalize();

  const int kmax = static_cast<int>(std::min<Eigen::Index>(opts.krylov_dim, size));
  int matvecs = 0;
  while (matvecs < opts.max_matvecs) {
    Mat basis(size, kmax + 1);
    Eigen::VectorXd alpha(kmax), beta(kmax);
    basis.col(0) = start;
    int steps = 0;
    for (int j = 0; j < kmax && matvecs < opts.max_matvecs; ++j) {
      Vec w = m * basis.col(j);
      ++matvecs;
      alpha(j) = std::real(basis.col(j).dot(w));
      for (int pass = 0; pass < 2; ++pass)
        w.noalias() -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).adjoint() * w);
      beta(j) = w.norm();
      steps = j + 1;

      const bool check = steps % 10 == 0 || steps == kmax || beta(j) < 1e-14;
      if (check) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
        tri.computeFromTridiagonal(alpha.head(steps), beta.head(steps - 1), Eigen::ComputeEigenvectors);
        const double theta = tri.eigenvalues()(steps - 1);
        const double scale = std::max(std::abs(tri.eigenvalues()(0)), std::abs(theta));
        const double residual = beta(j) * std::abs(tri.eigenvectors()(steps - 1, steps - 1));
        const Eigen::VectorXd s = tri.eigenvectors().col(steps - 1);
        if (residual <= opts.rel_tol * scale || beta(j) < 1e-14 * std::max(1.0, scale)) {
          Eigenpair<Scalar> out;
          out.vector = (basis.leftCols(steps) * s.cast<Scalar>()).normalized();
          out.value = std::real(out.vector.dot(m * out.vector));
          out.matvecs = matvecs + 1;
          return flip(out);
        }
        if (steps == kmax) {
          start = (basis.leftCols(steps) * s.cast<Scalar>()).normalized();
          break;
        }
      }
      basis.col(j + 1) = w / beta(j);
    }
  }
  if (size <= opts.dense_fallback) return flip(detail::dense_extreme<Scalar>(m, Extreme::largest));
  throw NonConvergence("Lanczos did not converge within the iteration cap");
}

}  // namespace spiked
