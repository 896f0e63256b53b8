#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "spiked/random.hpp"

namespace spiked {

using cplx = std::complex<double>;

// A group element: an index into a finite multiplication table, or an angle
// for U(1).
struct GroupElement {
  int index = 0;
  double angle = 0.0;
  friend bool operator==(const GroupElement&, const GroupElement&) = default;
};

class GroupSpec {
 public:
  // table(a, b) = index of a*b; row 0 need not be the identity.
  GroupSpec(std::string id, Eigen::MatrixXi table);
  static GroupSpec cyclic(int order);
  static GroupSpec symmetric3();
  static GroupSpec quaternion8();
  static GroupSpec circle();
  // First line L, then L lines of L 0-based indices.
  static GroupSpec from_table_file(const std::string& path);

  const std::string& id() const { return id_; }
  bool is_circle() const { return circle_; }
  int order() const { return order_; }  // 0 for U(1)
  GroupElement identity() const;
  GroupElement multiply(const GroupElement& a, const GroupElement& b) const;
  GroupElement inverse(const GroupElement& a) const;
  GroupElement uniform(Rng& rng) const;
  GroupElement element(int index) const { return {index, 0.0}; }
  const Eigen::MatrixXi& table() const { return table_; }

 private:
  GroupSpec() = default;
  std::string id_;
  bool circle_ = false;
  int order_ = 0;
  int identity_ = 0;
  Eigen::MatrixXi table_;
  std::vector<int> inverse_;
};

GroupSpec parse_group(const std::string& config_id);

enum class RepType { real = 1, complex = 2, quaternionic = 4 };

int beta_of(RepType t);
std::string to_string(RepType t);

// Irreducible unitary representation. Quaternionic representations of
// quaternionic dimension d are stored as 2d x 2d complex matrices, each
// quaternion a+bi+cj+dk embedded as [[a+bi, c+di], [-c+di, a-bi]].
struct RepresentationSpec {
  std::string id;
  RepType type = RepType::real;
  int dim = 1;  // over R, C or H
  std::function<Eigen::MatrixXcd(const GroupElement&)> matrix;

  int beta() const { return beta_of(type); }
  int complex_dim() const { return type == RepType::quaternionic ? 2 * dim : dim; }
};

// Nontrivial irreducible representations, one per conjugate pair, ordered by
// (type, dim, id). Catalogue: cyclic, S3, Q8; U(1) needs explicit frequencies.
std::vector<RepresentationSpec> all_frequencies(const GroupSpec& group);
RepresentationSpec circle_frequency(int k);
RepresentationSpec cyclic_frequency(int order, int k);
// Picks representations by id ("k1", "sign", ...) or, for U(1), "k<integer>".
std::vector<RepresentationSpec> select_frequencies(const GroupSpec& group,
                                                   const std::vector<std::string>& ids);

// Sum of beta d^2 over the list.
double frequency_weight(const std::vector<RepresentationSpec>& reps);

// Real coordinates of sqrt(beta d) rho(h), of length beta d^2.
Eigen::VectorXd real_coordinates(const RepresentationSpec& rep, const GroupElement& h);

// Quaternion a+bi+cj+dk as a 2x2 complex block.
Eigen::Matrix2cd quaternion_block(double a, double b, double c, double d);

}  // namespace spiked
