#include "spiked/groups.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "spiked/errors.hpp"
#include "spiked/parse.hpp"

namespace spiked {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const cplx kI{0.0, 1.0};

// S3 elements as permutations of {0,1,2}; index order below.
const std::array<std::array<int, 3>, 6> kS3 = {{{0, 1, 2}, {1, 2, 0}, {2, 0, 1},
                                                {0, 2, 1}, {2, 1, 0}, {1, 0, 2}}};

int s3_index(const std::array<int, 3>& p) {
  return static_cast<int>(std::find(kS3.begin(), kS3.end(), p) - kS3.begin());
}

// Q8 elements as unit quaternions (a, b, c, d): 1, i, j, k, -1, -i, -j, -k.
std::array<double, 4> q8_quat(int g) {
  std::array<double, 4> q{0, 0, 0, 0};
  q[g % 4] = g < 4 ? 1.0 : -1.0;
  return q;
}

std::array<double, 4> quat_mul(const std::array<double, 4>& p, const std::array<double, 4>& q) {
  return {p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3],
          p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2],
          p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1],
          p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0]};
}

int q8_index(const std::array<double, 4>& q) {
  for (int k = 0; k < 4; ++k)
    if (std::abs(q[k]) > 0.5) return q[k] > 0 ? k : k + 4;
  return 0;
}

Eigen::MatrixXcd scalar(cplx z) {
  Eigen::MatrixXcd m(1, 1);
  m(0, 0) = z;
  return m;
}

}  // namespace

GroupSpec::GroupSpec(std::string id, Eigen::MatrixXi table)
    : id_(std::move(id)), order_(static_cast<int>(table.rows())), table_(std::move(table)) {
  const int L = order_;
  if (L < 2 || table_.cols() != L) throw InvalidGroup("multiplication table must be square, L >= 2");
  if (table_.minCoeff() < 0 || table_.maxCoeff() >= L) throw InvalidGroup("table entry out of range");
  identity_ = -1;
  for (int e = 0; e < L && identity_ < 0; ++e) {
    bool ok = true;
    for (int g = 0; g < L && ok; ++g) ok = table_(e, g) == g && table_(g, e) == g;
    if (ok) identity_ = e;
  }
  if (identity_ < 0) throw InvalidGroup("table has no identity");
  inverse_.assign(L, -1);
  for (int g = 0; g < L; ++g)
    for (int h = 0; h < L; ++h)
      if (table_(g, h) == identity_ && table_(h, g) == identity_) inverse_[g] = h;
  if (std::count(inverse_.begin(), inverse_.end(), -1) > 0) throw InvalidGroup("element without inverse");
  for (int a = 0; a < L; ++a)
    for (int b = 0; b < L; ++b)
      for (int c = 0; c < L; ++c)
        if (table_(table_(a, b), c) != table_(a, table_(b, c)))
          throw InvalidGroup("table is not associative");
}

GroupSpec GroupSpec::cyclic(int order) {
  if (order < 2 || order > 256) throw InvalidGroup("cyclic group order must be in [2, 256]");
  Eigen::MatrixXi t(order, order);
  for (int a = 0; a < order; ++a)
    for (int b = 0; b < order; ++b) t(a, b) = (a + b) % order;
  return GroupSpec("Z" + std::to_string(order), std::move(t));
}

GroupSpec GroupSpec::symmetric3() {
  Eigen::MatrixXi t(6, 6);
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) {
      std::array<int, 3> p{};
      for (int i = 0; i < 3; ++i) p[i] = kS3[a][kS3[b][i]];
      t(a, b) = s3_index(p);
    }
  return GroupSpec("S3", std::move(t));
}

GroupSpec GroupSpec::quaternion8() {
  Eigen::MatrixXi t(8, 8);
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b) t(a, b) = q8_index(quat_mul(q8_quat(a), q8_quat(b)));
  return GroupSpec("Q8", std::move(t));
}

GroupSpec GroupSpec::circle() {
  GroupSpec g;
  g.id_ = "U1";
  g.circle_ = true;
  return g;
}

GroupSpec GroupSpec::from_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open group table " + path);
  int L = 0;
  if (!(in >> L) || L < 2 || L > 256) throw InvalidGroup("bad group order in " + path);
  Eigen::MatrixXi t(L, L);
  for (int a = 0; a < L; ++a)
    for (int b = 0; b < L; ++b)
      if (!(in >> t(a, b))) throw InvalidGroup("truncated group table in " + path);
  return GroupSpec("table:" + path, std::move(t));
}

GroupSpec parse_group(const std::string& config_id) {
  if (config_id.rfind("zl:", 0) == 0) {
    try {
      std::size_t used = 0;
      const int order = std::stoi(config_id.substr(3), &used);
      if (used + 3 == config_id.size()) return GroupSpec::cyclic(order);
    } catch (const std::logic_error&) {
    }
    throw InvalidGroup("unknown group id: " + config_id);
  }
  if (config_id.rfind("table:", 0) == 0) return GroupSpec::from_table_file(config_id.substr(6));
  const ParsedId p = parse_config_id(config_id);
  if (p.name == "U1" || p.name == "u1") return GroupSpec::circle();
  if (p.name == "S3" || p.name == "s3") return GroupSpec::symmetric3();
  if (p.name == "Q8" || p.name == "q8") return GroupSpec::quaternion8();
  if (p.name == "Z" && p.args.size() == 1) return GroupSpec::cyclic(static_cast<int>(p.args[0]));
  if (p.name.size() > 1 && p.name[0] == 'Z' && p.args.empty()) {
    try {
      return GroupSpec::cyclic(std::stoi(p.name.substr(1)));
    } catch (const std::logic_error&) {
    }
  }
  throw InvalidGroup("unknown group id: " + config_id);
}

GroupElement GroupSpec::identity() const { return {identity_, 0.0}; }

GroupElement GroupSpec::multiply(const GroupElement& a, const GroupElement& b) const {
  if (circle_) return {0, std::fmod(a.angle + b.angle + 2.0 * kTwoPi, kTwoPi)};
  return {table_(a.index, b.index), 0.0};
}

GroupElement GroupSpec::inverse(const GroupElement& a) const {
  if (circle_) return {0, std::fmod(kTwoPi - a.angle, kTwoPi)};
  return {inverse_[a.index], 0.0};
}

GroupElement GroupSpec::uniform(Rng& rng) const {
  if (circle_) return {0, kTwoPi * uniform01(rng)};
  return {std::uniform_int_distribution<int>(0, order_ - 1)(rng), 0.0};
}

int beta_of(RepType t) { return static_cast<int>(t); }

std::string to_string(RepType t) {
  switch (t) {
    case RepType::real: return "real";
    case RepType::complex: return "complex";
    case RepType::quaternionic: return "quaternionic";
  }
  return "?";
}

Eigen::Matrix2cd quaternion_block(double a, double b, double c, double d) {
  Eigen::Matrix2cd m;
  m << cplx(a, b), cplx(c, d), cplx(-c, d), cplx(a, -b);
  return m;
}

RepresentationSpec circle_frequency(int k) {
  if (k == 0) throw TrivialRepresentation("frequency 0 of U(1) is trivial");
  return {"k" + std::to_string(k), RepType::complex, 1,
          [k](const GroupElement& g) { return scalar(std::exp(kI * (k * g.angle))); }};
}

RepresentationSpec cyclic_frequency(int order, int k) {
  k = ((k % order) + order) % order;
  if (k == 0) throw TrivialRepresentation("frequency 0 of Z/L is trivial");
  const RepType type = 2 * k == order ? RepType::real : RepType::complex;
  return {"k" + std::to_string(k), type, 1, [order, k](const GroupElement& g) {
            return scalar(std::exp(kI * (kTwoPi * k * g.index / order)));
          }};
}

std::vector<RepresentationSpec> all_frequencies(const GroupSpec& group) {
  if (group.is_circle()) throw DomainError("U(1) has infinitely many frequencies; list them");
  std::vector<RepresentationSpec> reps;
  if (group.id()[0] == 'Z') {
    const int L = group.order();
    for (int k = 1; 2 * k <= L; ++k) reps.push_back(cyclic_frequency(L, k));
  } else if (group.id() == "S3") {
    reps.push_back({"sign", RepType::real, 1, [](const GroupElement& g) {
                      return scalar(g.index < 3 ? 1.0 : -1.0);
                    }});
    reps.push_back({"standard", RepType::real, 2, [](const GroupElement& g) {
                      // Permutation matrix restricted to the plane orthogonal to (1,1,1).
                      Eigen::Matrix<double, 3, 2> basis;
                      basis << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(6.0),
                               -1.0 / std::sqrt(2.0), 1.0 / std::sqrt(6.0),
                               0.0, -2.0 / std::sqrt(6.0);
                      Eigen::Matrix3d perm = Eigen::Matrix3d::Zero();
                      for (int i = 0; i < 3; ++i) perm(kS3[g.index][i], i) = 1.0;
                      const Eigen::Matrix2d m = basis.transpose() * perm * basis;
                      return Eigen::MatrixXcd(m.cast<cplx>());
                    }});
  } else if (group.id() == "Q8") {
    // Three sign characters (kernel {+-1, +-i}, {+-1, +-j}, {+-1, +-k}) and
    // the defining quaternionic representation.
    for (int axis = 1; axis <= 3; ++axis)
      reps.push_back({"sign" + std::to_string(axis), RepType::real, 1, [axis](const GroupElement& g) {
                        const int part = g.index % 4;
                        return scalar(part == 0 || part == axis ? 1.0 : -1.0);
                      }});
    reps.push_back({"defining", RepType::quaternionic, 1, [](const GroupElement& g) {
                      const auto q = q8_quat(g.index);
                      return Eigen::MatrixXcd(quaternion_block(q[0], q[1], q[2], q[3]));
                    }});
  } else {
    throw DomainError("no representation catalogue for group " + group.id());
  }
  std::stable_sort(reps.begin(), reps.end(), [](const auto& a, const auto& b) {
    return std::tie(a.type, a.dim, a.id) < std::tie(b.type, b.dim, b.id);
  });
  return reps;
}

std::vector<RepresentationSpec> select_frequencies(const GroupSpec& group,
                                                   const std::vector<std::string>& ids) {
  // "3" and "k3" both name frequency 3.
  auto frequency_number = [](const std::string& id) -> std::optional<int> {
    const std::string digits = !id.empty() && id[0] == 'k' ? id.substr(1) : id;
    if (digits.empty() || digits.size() > 9 ||
        !std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); }))
      return std::nullopt;
    return std::stoi(digits);
  };
  std::vector<RepresentationSpec> out;
  if (group.is_circle()) {
    for (const auto& id : ids) {
      const auto k = frequency_number(id);
      if (!k) throw ConfigError("U(1) frequencies are written k<int>");
      out.push_back(circle_frequency(*k));
    }
    return out;
  }
  const auto all = all_frequencies(group);
  for (const auto& id : ids) {
    const auto it = std::find_if(all.begin(), all.end(), [&](const auto& r) { return r.id == id; });
    if (it != all.end()) {
      out.push_back(*it);
      continue;
    }
    const auto k = frequency_number(id);
    if (group.id()[0] == 'Z' && k) {
      out.push_back(cyclic_frequency(group.order(), *k));
      continue;
    }
    throw ConfigError("unknown frequency " + id + " for group " + group.id());
  }
  return out;
}

double frequency_weight(const std::vector<RepresentationSpec>& reps) {
  double total = 0.0;
  for (const auto& r : reps) total += r.beta() * r.dim * r.dim;
  return total;
}

Eigen::VectorXd real_coordinates(const RepresentationSpec& rep, const GroupElement& h) {
  const Eigen::MatrixXcd m = rep.matrix(h);
  const int d = rep.dim;
  const int beta = rep.beta();
  Eigen::VectorXd z(beta * d * d);
  int k = 0;
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) {
      switch (rep.type) {
        case RepType::real:
          z(k++) = m(i, j).real();
          break;
        case RepType::complex:
          z(k++) = m(i, j).real();
          z(k++) = m(i, j).imag();
          break;
        case RepType::quaternionic: {
          // Top row of the 2x2 block holds (a + bi, c + di).
          const cplx top_left = m(2 * i, 2 * j);
          const cplx top_right = m(2 * i, 2 * j + 1);
          z(k++) = top_left.real();
          z(k++) = top_left.imag();
          z(k++) = top_right.real();
          z(k++) = top_right.imag();
          break;
        }
      }
    }
  return std::sqrt(static_cast<double>(beta * d)) * z;
}

}  // namespace spiked
