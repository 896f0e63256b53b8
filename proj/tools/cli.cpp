#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "csv.hpp"
#include "json.hpp"
#include "spiked/detect.hpp"
#include "spiked/errors.hpp"
#include "spiked/groups.hpp"
#include "spiked/models.hpp"
#include "spiked/noise.hpp"
#include "spiked/parse.hpp"
#include "spiked/priors.hpp"
#include "spiked/thresholds.hpp"
#include "svg.hpp"

namespace spiked::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::uint64_t kCalibrationStream = 0xCA1B;

// Model parameters shared by sample, detect and power.
struct ModelSpec {
  std::string model = "gaussian_wigner";
  int n = 200;
  double lambda = 1.5;
  std::string prior = "spherical";
  std::string noise = "gaussian";
  double beta = -0.75;
  double gamma = 0.8;
  double p = 3.0;
  std::string group = "Z2";
  std::vector<std::string> freqs;
  std::vector<double> lambdas;
  std::string detector;
  double eps = 0.05;
};

// Parsed objects behind a ModelSpec.
struct Resolved {
  ModelSpec spec;
  SpikePrior prior;
  std::optional<NoiseModel> noise;
  std::optional<GroupSpec> group;
  std::vector<RepresentationSpec> reps;
  std::vector<double> lambdas;
};

void add_model_options(CLI::App* app, ModelSpec& m) {
  app->add_option("--model", m.model, "gaussian_wigner | wigner | wishart | toh | gsynch")
      ->check(CLI::IsMember({"gaussian_wigner", "wigner", "wishart", "toh", "gsynch"}));
  app->add_option("--n", m.n, "dimension")->check(CLI::Range(2, 1 << 20));
  app->add_option("--lambda", m.lambda, "signal strength (Wigner models, every gsynch channel)");
  app->add_option("--prior", m.prior, "spike prior id");
  app->add_option("--noise", m.noise, "noise id (wigner model)");
  app->add_option("--beta", m.beta, "Wishart spike strength");
  app->add_option("--gamma", m.gamma, "Wishart aspect ratio n/N");
  app->add_option("--p", m.p, "truth-or-Haar scaled probability p*sqrt(n)");
  app->add_option("--group", m.group, "group id: Z2, zl:3, S3, Q8, U1, table:<path>");
  app->add_option("--freqs", m.freqs, "representation ids (default: all)")->delimiter(',');
  app->add_option("--lambdas", m.lambdas, "per-frequency signal strengths")->delimiter(',');
  app->add_option("--detector", m.detector, "pca | pretransformed | toh | gsynch | minquad")
      ->check(CLI::IsMember({"", "pca", "pretransformed", "toh", "gsynch", "minquad"}));
  app->add_option("--eps", m.eps, "min-quadratic slack");
}

std::string default_detector(const std::string& model) {
  if (model == "wishart") return "minquad";
  if (model == "toh") return "toh";
  if (model == "gsynch") return "gsynch";
  return "pca";
}

Resolved resolve(const ModelSpec& m) {
  Resolved r{m, parse_prior(m.prior), {}, {}, {}, {}};
  if (r.spec.detector.empty()) r.spec.detector = default_detector(m.model);
  if (m.model == "wigner" || r.spec.detector == "pretransformed") r.noise = parse_noise(m.noise);
  if (m.model == "toh" || m.model == "gsynch") r.group = parse_group(m.group);
  if (m.model == "gsynch") {
    r.reps = m.freqs.empty() ? all_frequencies(*r.group) : select_frequencies(*r.group, m.freqs);
    if (!m.lambdas.empty() && m.lambdas.size() != r.reps.size())
      throw ConfigError("--lambdas needs one value per frequency");
    r.lambdas = m.lambdas.empty() ? std::vector<double>(r.reps.size(), m.lambda) : m.lambdas;
  }
  const std::string& d = r.spec.detector;
  const bool matrix_model = m.model == "gaussian_wigner" || m.model == "wigner";
  if ((d == "pca" || d == "pretransformed") && !matrix_model && m.model != "wishart")
    throw ConfigError(d + " needs a matrix-valued model");
  if (d == "toh" && m.model != "toh") throw ConfigError("toh detector needs the toh model");
  if (d == "gsynch" && m.model != "gsynch") throw ConfigError("gsynch detector needs the gsynch model");
  if (d == "minquad" && m.model != "wishart") throw ConfigError("minquad detector needs the wishart model");
  return r;
}

// Scales the signal parameter of the model; used for the null (0) and power grids.
Resolved with_signal(Resolved r, double value) {
  if (r.spec.model == "wishart") r.spec.beta = value;
  else if (r.spec.model == "toh") r.spec.p = value;
  else if (r.spec.model == "gsynch") {
    for (double& l : r.lambdas) l = value;
    r.spec.lambda = value;
  } else r.spec.lambda = value;
  return r;
}

double signal_of(const Resolved& r) {
  if (r.spec.model == "wishart") return r.spec.beta;
  if (r.spec.model == "toh") return r.spec.p;
  return r.spec.lambda;
}

SampleBundle draw(const Resolved& r, std::uint64_t seed, bool planted) {
  const ModelSpec& m = r.spec;
  if (m.model == "gaussian_wigner") return sample_gaussian_wigner(planted ? m.lambda : 0.0, r.prior, m.n, seed);
  if (m.model == "wigner") return sample_wigner(planted ? m.lambda : 0.0, r.prior, *r.noise, m.n, seed);
  if (m.model == "wishart") return sample_wishart(planted ? m.beta : 0.0, m.gamma, r.prior, m.n, seed);
  if (m.model == "toh") return sample_toh(planted ? m.p : 0.0, *r.group, m.n, seed);
  std::vector<double> lambdas = r.lambdas;
  if (!planted) std::fill(lambdas.begin(), lambdas.end(), 0.0);
  return sample_gsynch(lambdas, *r.group, r.reps, m.n, seed);
}

DetectionOutcome run_detector(const Resolved& r, const SampleBundle& b, std::optional<double> threshold) {
  const std::string& d = r.spec.detector;
  if (d == "pca") return pca_detect(b, threshold);
  if (d == "pretransformed") return pretransformed_pca(b, *r.noise, threshold);
  if (d == "toh") return toh_exhaustive_test(b, *r.group, threshold);
  if (d == "gsynch") return gsynch_exhaustive_test(b, *r.group, r.lambdas, threshold);
  if (!r.prior.marginal) throw ConfigError("minquad needs a finite iid prior");
  return wishart_min_quadratic_test(b, *r.prior.marginal, r.spec.beta, r.spec.gamma, r.spec.eps, threshold);
}

double calibrated_threshold(const Resolved& r, int draws, double level, std::uint64_t seed) {
  auto null_stat = [&](std::uint64_t s) { return run_detector(r, draw(r, s, false), std::nullopt).statistic; };
  return calibrate_threshold(null_stat, draws, level, mix_seed(seed, kCalibrationStream),
                             r.spec.detector != "minquad");
}

json params_json(const Resolved& r, std::uint64_t seed) {
  const ModelSpec& m = r.spec;
  json p;
  p["n"] = m.n;
  p["seed"] = seed;
  p["detector"] = m.detector;
  if (m.model == "gaussian_wigner" || m.model == "wigner") {
    p["lambda"] = m.lambda;
    p["prior"] = m.prior;
  }
  if (m.model == "wigner" || m.detector == "pretransformed") p["noise"] = m.noise;
  if (m.model == "wishart") {
    p["beta"] = m.beta;
    p["gamma"] = m.gamma;
    p["prior"] = m.prior;
    p["eps"] = m.eps;
  }
  if (m.model == "toh") p["p"] = m.p;
  if (m.model == "toh" || m.model == "gsynch") p["group"] = r.group->id();
  if (m.model == "gsynch") {
    std::vector<std::string> ids;
    for (const auto& rep : r.reps) ids.push_back(rep.id);
    p["freqs"] = ids;
    p["lambdas"] = r.lambdas;
  }
  return p;
}

// key=value lines of every option except output location, sorted.
std::string canonical_config(const CLI::App* sub) {
  std::vector<std::string> lines;
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_name();
    if (name == "--help" || name == "--out" || name == "--config" || name.empty()) continue;
    std::string value;
    const auto& results = opt->results();
    if (results.empty()) {
      value = opt->get_default_str();
    } else {
      for (std::size_t i = 0; i < results.size(); ++i) value += (i ? "," : "") + results[i];
    }
    lines.push_back(name + "=" + value);
  }
  std::sort(lines.begin(), lines.end());
  std::string path;
  for (const CLI::App* a = sub; a != nullptr && a->get_parent() != nullptr; a = a->get_parent())
    path = a->get_name() + (path.empty() ? "" : " " + path);
  std::string out = "command=" + path + "\n";
  for (const auto& l : lines) out += l + "\n";
  return out;
}

struct Output {
  std::string dir = ".";
  bool svg = true;
  std::uint64_t seed = 1;

  fs::path path(const std::string& name) const {
    fs::create_directories(dir);
    return fs::path(dir) / name;
  }
};

std::string num(double x) { return format_number(x); }

void write_real_matrix(const Eigen::MatrixXd& m, const std::string& config, std::uint64_t seed,
                       const fs::path& path) {
  std::vector<std::string> cols;
  for (Eigen::Index j = 0; j < m.cols(); ++j) cols.push_back("c" + std::to_string(j));
  CsvTable t(cols, config, seed);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<std::string> row;
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(num(m(i, j)));
    t.add_row(std::move(row));
  }
  t.write(path.string());
}

Eigen::MatrixXd read_real_matrix(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read bundle " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool header = true;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::logic_error&) {
        throw ConfigError("bundle cell is not a real number: " + cell);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("bundle " + path + " has no rows");
  Eigen::MatrixXd m(rows.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) throw ConfigError("bundle matrix must be square");
    for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

// ---- sample ---------------------------------------------------------------

void cmd_sample(const ModelSpec& spec, const Output& o, const std::string& stem, const std::string& config,
                std::ostream& out) {
  const Resolved r = resolve(spec);
  const SampleBundle b = draw(r, o.seed, true);
  std::vector<std::string> files;
  auto emit = [&](const std::string& name) {
    files.push_back(name);
    return o.path(name);
  };
  if (b.matrix.size() > 0) write_real_matrix(b.matrix, config, o.seed, emit(stem + ".csv"));
  if (b.samples.size() > 0) write_real_matrix(b.samples, config, o.seed, emit(stem + "_samples.csv"));
  if (b.group_matrix.size() > 0) write_real_matrix(b.group_matrix.cast<double>(), config, o.seed, emit(stem + ".csv"));
  for (std::size_t k = 0; k < b.channels.size(); ++k) {
    const Eigen::MatrixXcd& c = b.channels[k];
    std::vector<std::string> cols;
    for (Eigen::Index j = 0; j < c.cols(); ++j) cols.push_back("c" + std::to_string(j));
    CsvTable t(cols, config, o.seed);
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      std::vector<std::string> row;
      for (Eigen::Index j = 0; j < c.cols(); ++j) row.push_back(num(c(i, j).real()) + "," + num(c(i, j).imag()));
      t.add_row(std::move(row));
    }
    t.write(emit(stem + "_" + b.reps[k].id + ".csv").string());
  }
  if (b.spike.size() > 0) {
    CsvTable t({"x"}, config, o.seed);
    for (Eigen::Index i = 0; i < b.spike.size(); ++i) t.add_row({num(b.spike(i))});
    t.write(emit(stem + "_truth.csv").string());
  } else if (!b.assignment.empty()) {
    CsvTable t({"index", "angle"}, config, o.seed);
    for (const auto& g : b.assignment) t.add_row({std::to_string(g.index), num(g.angle)});
    t.write(emit(stem + "_truth.csv").string());
  }
  out << json{{"model", spec.model}, {"params", params_json(r, o.seed)}, {"files", files}}.dump() << "\n";
}

// ---- detect ---------------------------------------------------------------

void cmd_detect(const ModelSpec& spec, const Output& o, const std::string& bundle_path, bool null_draw,
                std::optional<double> threshold, int calibrate, double level, std::ostream& out) {
  const Resolved r = resolve(spec);
  SampleBundle b;
  if (!bundle_path.empty()) {
    if (r.spec.detector != "pca" && r.spec.detector != "pretransformed" && r.spec.detector != "minquad")
      throw ConfigError("bundle files carry a real matrix; use pca, pretransformed or minquad");
    b.model = spec.model;
    b.matrix = read_real_matrix(bundle_path);
    b.n = static_cast<int>(b.matrix.rows());
  } else {
    b = draw(r, o.seed, !null_draw);
  }
  if (!threshold && calibrate > 0) threshold = calibrated_threshold(r, calibrate, level, o.seed);
  const DetectionOutcome d = run_detector(r, b, threshold);
  json rec;
  rec["model"] = spec.model;
  json p = params_json(r, o.seed);
  p["planted"] = bundle_path.empty() ? json(!null_draw) : json(nullptr);
  if (!bundle_path.empty()) p["bundle"] = bundle_path;
  rec["params"] = p;
  rec["statistic"] = d.statistic;
  rec["threshold"] = d.threshold;
  rec["decision"] = d.spiked ? "spiked" : "unspiked";
  rec["correlation"] = d.correlation ? json(*d.correlation) : json(nullptr);
  if (!d.note.empty()) rec["note"] = d.note;
  out << rec.dump() << "\n";
}

// ---- threshold ------------------------------------------------------------

json report_json(const ThresholdReport& r) {
  json j;
  j["name"] = r.name;
  j["value"] = r.value;
  j["method"] = to_string(r.method);
  j["diagnostics"] = r.diagnostics;
  j["maximizer"] = std::vector<double>(r.maximizer.data(), r.maximizer.data() + r.maximizer.size());
  return j;
}

void cmd_threshold_toh(int order, std::ostream& out) {
  ThresholdReport r;
  r.name = "toh{" + std::to_string(order) + "}";
  r.value = toh_threshold(order);
  r.method = ThresholdMethod::closed_form;
  r.diagnostics["L"] = order;
  r.diagnostics["upper_bound"] = toh_upper_threshold(order);
  out << report_json(r).dump() << "\n";
}

void cmd_threshold_synch(const std::string& group_id, const std::vector<std::string>& freqs, std::uint64_t seed,
                         std::ostream& out) {
  const GroupSpec g = parse_group(group_id);
  const auto reps = freqs.empty() ? all_frequencies(g) : select_frequencies(g, freqs);
  SynchOptions opts;
  opts.seed = seed;
  ThresholdReport r = synch_subgaussian_threshold(g, reps, opts);
  r.diagnostics["general_bound"] = synch_general_bound(reps);
  if (!g.is_circle() && freqs.empty() && g.id().rfind("Z", 0) == 0)
    r.diagnostics["conditioning_allfreq"] = synch_conditioning_threshold_allfreq(g.order());
  out << report_json(r).dump() << "\n";
}

RateFunction rate_for(const SpikePrior& prior) {
  if (prior.kind == PriorKind::spherical) return [](double t) { return -0.5 * std::log1p(-t); };
  if (prior.kind == PriorKind::iid_finite) {
    const FiniteLaw law = *prior.marginal;
    if (law.size() == 2) return [](double t) { return rademacher_rate(t); };
    return [law](double t) { return rate_function(law, t); };
  }
  throw ConfigError("the Wishart region needs a spherical or finite iid prior");
}

double lambda_star_of(const SpikePrior& prior) {
  if (prior.lambda_star) return *prior.lambda_star;
  if (prior.marginal) return conditioning_threshold(*prior.marginal).lambda_star;
  throw ConfigError("no conditioning threshold for prior " + prior.id);
}

void cmd_threshold_wishart(const std::string& prior_id, double gamma, double beta, int sweep, const Output& o,
                           const std::string& config, std::ostream& out) {
  const SpikePrior prior = parse_prior(prior_id);
  const RateFunction rate = rate_for(prior);
  const double ls = lambda_star_of(prior);
  const WishartRegion region = wishart_contiguity_region(rate, ls, gamma, beta);
  ThresholdReport r;
  r.name = "wishart{" + prior.id + "}";
  r.value = wigner_wishart_simple_bound(ls, gamma);
  r.method = ThresholdMethod::rate_function;
  r.diagnostics = {{"gamma", gamma},
                   {"beta", beta},
                   {"lambda_star", ls},
                   {"sqrt_gamma", std::sqrt(gamma)},
                   {"contiguous", region.contiguous ? 1.0 : 0.0},
                   {"moment_unbounded", region.moment_unbounded ? 1.0 : 0.0},
                   {"margin", region.margin},
                   {"worst_t", region.worst_t},
                   {"slope_at_zero", region.slope_at_zero}};
  if (beta >= 0.0 && beta * beta < gamma) {
    const NoiseConditionedCheck nc = wishart_noise_conditioned_check(rate, ls, gamma, beta);
    r.diagnostics["noise_conditioned"] = nc.satisfied ? 1.0 : 0.0;
    r.diagnostics["noise_conditioned_margin"] = nc.margin;
  }
  if (prior.log_c && beta < 0.0) r.diagnostics["mle_condition"] = wishart_mle_condition(beta, gamma, *prior.log_c);
  json j = report_json(r);
  j["reasons"] = region.reasons;
  if (sweep > 0) {
    CsvTable t({"beta", "margin", "worst_t", "contiguous", "moment_unbounded"}, config, o.seed);
    const double top = std::sqrt(gamma);
    for (int i = 0; i < sweep; ++i) {
      const double b = top * i / sweep;
      const WishartRegion w = wishart_contiguity_region(rate, ls, gamma, b);
      t.add_row({num(b), num(w.margin), num(w.worst_t), w.contiguous ? "1" : "0", w.moment_unbounded ? "1" : "0"});
    }
    t.write(o.path("threshold_wishart_sweep.csv").string());
    j["sweep_file"] = "threshold_wishart_sweep.csv";
  }
  out << j.dump() << "\n";
}

// ---- second-moment --------------------------------------------------------

json moment_json(const SecondMomentValue& v) {
  return json{{"n", v.n},
              {"value", v.finite() ? json(v.value) : json("inf")},
              {"finite", v.finite()},
              {"estimator", to_string(v.estimator)},
              {"std_error", v.std_error}};
}

void cmd_second_moment(const std::string& model, const std::string& prior_id, double lambda, double beta,
                       double gamma, const std::vector<int>& ns, long trials, bool monte_carlo, bool csv,
                       const Output& o, const std::string& config, std::ostream& out) {
  const SpikePrior prior = parse_prior(prior_id);
  MomentOptions opts;
  opts.trials = trials;
  opts.seed = o.seed;
  opts.force_monte_carlo = monte_carlo;
  std::vector<SecondMomentValue> values;
  for (int n : ns) {
    if (model == "wishart") {
      values.push_back(second_moment_wishart(prior, beta, gamma, n, opts));
    } else if (n == 0) {
      if (prior.kind != PriorKind::spherical) throw ConfigError("the n = inf limit is available for spherical only");
      SecondMomentValue v;
      v.value = second_moment_spherical_limit(lambda);
      v.estimator = MomentEstimator::exact;
      values.push_back(v);
    } else if (prior.kind == PriorKind::spherical && !monte_carlo) {
      values.push_back(second_moment_spherical_exact(n, lambda));
    } else {
      values.push_back(second_moment_gwig(prior, lambda, n, opts));
    }
  }
  if (csv) {
    CsvTable t({"n", "value", "estimator", "std_error"}, config, o.seed);
    for (const auto& v : values)
      t.add_row({v.n == 0 ? "inf" : std::to_string(v.n), v.finite() ? num(v.value) : "inf", to_string(v.estimator),
                 num(v.std_error)});
    t.write(o.path("second_moment.csv").string());
  }
  json j;
  j["model"] = model;
  j["prior"] = prior.id;
  if (model == "wishart") {
    j["beta"] = beta;
    j["gamma"] = gamma;
  } else {
    j["lambda"] = lambda;
  }
  json arr = json::array();
  for (const auto& v : values) arr.push_back(moment_json(v));
  j["values"] = arr;
  out << j.dump() << "\n";
}

// ---- figures and tables ---------------------------------------------------

std::vector<double> alpha_grid(int points) {
  std::vector<double> a(points);
  for (int i = 0; i < points; ++i) a[i] = static_cast<double>(i) / (points - 1);
  return a;
}

struct Curve {
  std::string key;    // first CSV column
  std::string label;  // SVG legend
  double moment;
};

void emit_hyp(const std::string& name, const std::string& key_column, const std::vector<Curve>& curves, int points,
              const Output& o, const std::string& config, const std::string& title, std::ostream& out) {
  CsvTable t({key_column, "moment", "alpha", "beta"}, config, o.seed);
  std::vector<Series> series;
  const auto alphas = alpha_grid(points);
  for (const auto& c : curves) {
    Series s{c.label, {}, {}};
    for (double a : alphas) {
      const double b = hyptest_tradeoff(c.moment, a);
      t.add_row({c.key, num(c.moment), num(a), num(b)});
      s.x.push_back(a);
      s.y.push_back(b);
    }
    series.push_back(std::move(s));
  }
  t.write(o.path(name + ".csv").string());
  json files = {name + ".csv"};
  if (o.svg) {
    write_text(o.path(name + ".svg").string(), line_plot(title, "type I error alpha", "minimal type II error beta", series));
    files.push_back(name + ".svg");
  }
  json moments = json::object();
  for (const auto& c : curves) moments[c.key] = c.moment;
  out << json{{"figure", name}, {"moments", moments}, {"files", files}}.dump() << "\n";
}

void cmd_figure_hyp1(const std::vector<double>& lambdas, int points, const Output& o, const std::string& config,
                     std::ostream& out) {
  std::vector<Curve> curves;
  for (double l : lambdas) {
    if (!(l >= 0.0 && l < 1.0)) throw DomainError("figure hyp1 needs 0 <= lambda < 1");
    curves.push_back({num(l), "lambda = " + num(l), second_moment_spherical_limit(l)});
  }
  emit_hyp("hyp1", "lambda", curves, points, o, config, "Asymptotic testing tradeoff, spherical prior", out);
}

void cmd_figure_hyp2(double lambda, const std::vector<int>& ns, int points, const Output& o, const std::string& config,
                     std::ostream& out) {
  std::vector<Curve> curves;
  for (int n : ns) {
    if (n == 0) {
      curves.push_back({"inf", "n = inf", second_moment_spherical_limit(lambda)});
    } else {
      const SecondMomentValue v = second_moment_spherical_exact(n, lambda);
      curves.push_back({std::to_string(n), "n = " + std::to_string(n), v.value});
    }
  }
  emit_hyp("hyp2", "n", curves, points, o, config, "Testing tradeoff at lambda = " + num(lambda), out);
}

Histogram histogram(const std::string& label, const Eigen::VectorXd& values, int bins) {
  const double lo = values.minCoeff();
  double hi = values.maxCoeff();
  if (!(hi > lo)) hi = lo + 1.0;
  Histogram h{label, {}, std::vector<double>(bins, 0.0)};
  for (int i = 0; i <= bins; ++i) h.edges.push_back(lo + (hi - lo) * i / bins);
  for (double v : values) {
    int k = static_cast<int>((v - lo) / (hi - lo) * bins);
    h.counts[std::clamp(k, 0, bins - 1)] += 1.0;
  }
  return h;
}

void cmd_figure_spectrum(int n, double lambda, const std::string& noise_id, const std::string& prior_id, int bins,
                         const Output& o, const std::string& config, std::ostream& out) {
  const NoiseModel noise = parse_noise(noise_id);
  const SpikePrior prior = parse_prior(prior_id);
  const SampleBundle b = sample_wigner(lambda, prior, noise, n, o.seed);
  const double root_n = std::sqrt(static_cast<double>(n));
  Eigen::MatrixXd transformed = apply_score(noise, root_n * b.matrix);
  transformed.diagonal().setZero();
  transformed /= root_n;
  const Eigen::VectorXd raw_eigs =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(b.matrix, Eigen::EigenvaluesOnly).eigenvalues();
  const Eigen::VectorXd tr_eigs =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(transformed, Eigen::EigenvaluesOnly).eigenvalues();
  const double fisher = fisher_information(noise);
  const double raw_thr = 2.0 + std::pow(static_cast<double>(n), -1.0 / 3.0);
  const double tr_thr = pretransformed_threshold(fisher, n);

  const Histogram h_raw = histogram("raw Y", raw_eigs, bins);
  const Histogram h_tr = histogram("f(sqrt(n) Y)/sqrt(n)", tr_eigs, bins);
  CsvTable hist({"panel", "bin_lo", "bin_hi", "count"}, config, o.seed);
  for (const auto* h : {&h_raw, &h_tr})
    for (int i = 0; i < bins; ++i)
      hist.add_row({h == &h_raw ? "raw" : "transformed", num(h->edges[i]), num(h->edges[i + 1]), num(h->counts[i])});
  hist.write(o.path("spectrum.csv").string());

  const double raw_top = raw_eigs(raw_eigs.size() - 1);
  const double tr_top = tr_eigs(tr_eigs.size() - 1);
  const double predicted = lambda > 0.0 ? lambda * fisher + 1.0 / lambda : 2.0 * std::sqrt(fisher);
  CsvTable verdicts({"panel", "top_eigenvalue", "threshold", "spiked", "predicted"}, config, o.seed);
  verdicts.add_row({"raw", num(raw_top), num(raw_thr), raw_top > raw_thr ? "1" : "0", ""});
  verdicts.add_row({"transformed", num(tr_top), num(tr_thr), tr_top > tr_thr ? "1" : "0", num(predicted)});
  verdicts.write(o.path("spectrum_verdicts.csv").string());
  json files = {"spectrum.csv", "spectrum_verdicts.csv"};
  if (o.svg) {
    write_text(o.path("spectrum_raw.svg").string(), histogram_plot("Spectrum before transformation", {h_raw}));
    write_text(o.path("spectrum_transformed.svg").string(), histogram_plot("Spectrum after transformation", {h_tr}));
    files.push_back("spectrum_raw.svg");
    files.push_back("spectrum_transformed.svg");
  }
  out << json{{"figure", "spectrum"},
              {"fisher", fisher},
              {"raw", {{"top", raw_top}, {"threshold", raw_thr}, {"spiked", raw_top > raw_thr}}},
              {"transformed", {{"top", tr_top}, {"threshold", tr_thr}, {"spiked", tr_top > tr_thr}, {"predicted", predicted}}},
              {"files", files}}
             .dump()
      << "\n";
}

void cmd_table_toh(const std::vector<int>& orders, const Output& o, const std::string& config, std::ostream& out) {
  CsvTable t({"L", "p_star", "upper_bound"}, config, o.seed);
  for (int L : orders) t.add_row({std::to_string(L), num(toh_threshold(L)), num(toh_upper_threshold(L))});
  t.write(o.path("table_toh.csv").string());
  out << json{{"table", "toh"}, {"rows", orders.size()}, {"files", {"table_toh.csv"}}}.dump() << "\n";
}

// ---- power ----------------------------------------------------------------

std::optional<double> auto_moment(const Resolved& r) {
  if (r.spec.model != "gaussian_wigner") return std::nullopt;
  if (r.prior.kind == PriorKind::spherical) return second_moment_spherical_exact(r.spec.n, r.spec.lambda).value;
  if (r.prior.kind == PriorKind::iid_finite && r.spec.n <= 1000) {
    const SecondMomentValue v = second_moment_gwig(r.prior, r.spec.lambda, r.spec.n);
    if (v.estimator == MomentEstimator::exact) return v.value;
  }
  return std::nullopt;
}

int cmd_power(const ModelSpec& spec, const std::vector<double>& grid, int trials, int calibrate, double level,
              bool overlay, const Output& o, const std::string& config, std::ostream& out, std::ostream& err) {
  const Resolved base = resolve(spec);
  const std::vector<double> params = grid.empty() ? std::vector<double>{signal_of(base)} : grid;
  std::optional<double> threshold;
  if (calibrate > 0) threshold = calibrated_threshold(base, calibrate, level, o.seed);
  CsvTable t({"parameter", "trials", "type_one", "type_two", "threshold", "moment", "min_type_two", "infeasible"}, config,
             o.seed);
  int violations = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Resolved r = with_signal(base, params[i]);
    auto detect = [&](std::uint64_t s, bool planted) { return run_detector(r, draw(r, s, planted), threshold); };
    const PowerPoint pt = power_point(detect, params[i], trials, mix_seed(o.seed, i));
    std::string moment_cell, bound_cell, infeasible_cell;
    if (overlay) {
      if (const auto m = auto_moment(r)) {
        // The bound falls with alpha, so compare at a 3-sigma Wilson upper limit for alpha.
        const double z2 = 9.0 / trials;
        const double a = pt.type_one;
        const double alpha_hi =
            std::min(1.0, (a + z2 / 2 + std::sqrt(z2 * a * (1 - a) + z2 * z2 / 4)) / (1 + z2));
        const double bound = hyptest_tradeoff(*m, alpha_hi);
        const double se = std::sqrt(bound * (1.0 - bound) / trials);
        const bool inside = pt.type_two < bound - 3.0 * se;
        violations += inside;
        moment_cell = std::isfinite(*m) ? num(*m) : "inf";
        bound_cell = num(bound);
        infeasible_cell = inside ? "1" : "0";
      }
    }
    t.add_row({num(pt.parameter), std::to_string(pt.trials), num(pt.type_one), num(pt.type_two), num(pt.threshold),
               moment_cell, bound_cell, infeasible_cell});
  }
  t.write(o.path("power.csv").string());
  out << json{{"power", spec.model}, {"points", params.size()}, {"violations", violations}, {"files", {"power.csv"}}}
             .dump()
      << "\n";
  if (violations > 0) {
    err << "power: " << violations << " point(s) fall inside the infeasible region\n";
    return 3;
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spiked random-matrix models: sampling, detection, thresholds and figures", "spiked"};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "key = value configuration file with [subcommand] sections");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();

  Output o;
  auto add_common = [&](CLI::App* s) {
    s->add_option("--seed", o.seed, "master seed");
    s->add_option("--out", o.dir, "output directory");
  };

  ModelSpec spec;
  std::string stem = "sample";
  auto* sample = app.add_subcommand("sample", "draw one observation and write it as CSV");
  add_model_options(sample, spec);
  add_common(sample);
  sample->add_option("--stem", stem, "file name stem");

  std::string bundle;
  bool null_draw = false;
  std::optional<double> fixed_threshold;
  int calibrate = 0;
  double level = 0.925;
  auto* detect = app.add_subcommand("detect", "run a detector and print one JSON record");
  add_model_options(detect, spec);
  add_common(detect);
  detect->add_option("--bundle", bundle, "matrix CSV written by `sample`");
  detect->add_flag("--null", null_draw, "draw from the unspiked model");
  detect->add_option("--threshold", fixed_threshold, "fixed decision threshold");
  detect->add_option("--calibrate", calibrate, "null draws for threshold calibration (0: asymptotic rule)");
  detect->add_option("--level", level, "calibration quantile")->check(CLI::Range(0.5, 1.0));

  auto* threshold = app.add_subcommand("threshold", "compute a threshold and print a JSON report");
  threshold->require_subcommand(1);
  int order = 2;
  auto* th_toh = threshold->add_subcommand("toh", "truth-or-Haar sub-Gaussian threshold");
  th_toh->add_option("--L", order, "group order")->required()->check(CLI::Range(2, 1 << 20));
  std::string group_id = "U1";
  std::vector<std::string> freqs;
  auto* th_synch = threshold->add_subcommand("synch", "synchronization sub-Gaussian threshold");
  th_synch->add_option("--group", group_id, "group id");
  th_synch->add_option("--freqs", freqs, "representation ids; plain integers mean k<integer>")->delimiter(',');
  th_synch->add_option("--seed", o.seed, "optimizer seed");
  std::string prior_id = "iid_rademacher";
  double gamma = 0.33, beta = 0.5;
  int sweep = 0;
  auto* th_wishart = threshold->add_subcommand("wishart", "Wishart contiguity region at (gamma, beta)");
  th_wishart->add_option("--prior", prior_id, "spike prior id");
  th_wishart->add_option("--gamma", gamma, "aspect ratio")->check(CLI::PositiveNumber);
  th_wishart->add_option("--beta", beta, "spike strength");
  th_wishart->add_option("--sweep", sweep, "write a CSV sweep over this many beta in [0, sqrt(gamma))");
  add_common(th_wishart);

  std::string moment_model = "gwig";
  double lambda = 0.6;
  std::vector<int> ns{50};
  long trials_long = 100000;
  bool monte_carlo = false, csv = false;
  auto* moment = app.add_subcommand("second-moment", "second moment of the likelihood ratio");
  moment->add_option("--model", moment_model, "gwig | wishart")->check(CLI::IsMember({"gwig", "wishart"}));
  moment->add_option("--prior", prior_id, "spike prior id");
  moment->add_option("--lambda", lambda, "Wigner signal strength");
  moment->add_option("--beta", beta, "Wishart spike strength");
  moment->add_option("--gamma", gamma, "Wishart aspect ratio");
  moment->add_option("--n", ns, "dimensions (0: n = inf)")->delimiter(',');
  moment->add_option("--trials", trials_long, "Monte Carlo pairs")->check(CLI::Range(1L, 1L << 40));
  moment->add_flag("--monte-carlo", monte_carlo, "force the Monte Carlo estimator");
  moment->add_flag("--csv", csv, "also write second_moment.csv");
  add_common(moment);

  auto* figure = app.add_subcommand("figure", "regenerate a figure as CSV and SVG");
  figure->require_subcommand(1);
  bool no_svg = false;
  int points = 201, bins = 60, n_spec = 1200;
  std::vector<double> hyp1_lambdas{0.99, 0.95, 0.85, 0.6, 0.2};
  auto* hyp1 = figure->add_subcommand("hyp1", "asymptotic tradeoff curves for several lambda");
  hyp1->add_option("--lambdas", hyp1_lambdas, "signal strengths")->delimiter(',');
  hyp1->add_option("--points", points, "alpha grid size")->check(CLI::Range(2, 100000));
  double hyp2_lambda = 0.9;
  std::vector<int> hyp2_ns{0, 75, 25, 10};
  auto* hyp2 = figure->add_subcommand("hyp2", "finite-n tradeoff curves at fixed lambda");
  hyp2->add_option("--lambda", hyp2_lambda, "signal strength");
  hyp2->add_option("--n", hyp2_ns, "dimensions (0: n = inf)")->delimiter(',');
  hyp2->add_option("--points", points, "alpha grid size")->check(CLI::Range(2, 100000));
  double spec_lambda = 0.9;
  std::string spec_noise = "bimodal{0.95,0.05}", spec_prior = "iid_rademacher";
  auto* spectrum = figure->add_subcommand("spectrum", "spectra before and after the entrywise transformation");
  spectrum->add_option("--n", n_spec, "dimension")->check(CLI::Range(2, 20000));
  spectrum->add_option("--lambda", spec_lambda, "signal strength");
  spectrum->add_option("--noise", spec_noise, "noise id");
  spectrum->add_option("--prior", spec_prior, "spike prior id");
  spectrum->add_option("--bins", bins, "histogram bins")->check(CLI::Range(1, 10000));
  for (auto* s : {hyp1, hyp2, spectrum}) {
    add_common(s);
    s->add_flag("--no-svg", no_svg, "skip the SVG output");
  }

  auto* table = app.add_subcommand("table", "regenerate a table as CSV");
  table->require_subcommand(1);
  std::vector<int> orders{2, 3, 4, 5, 6, 10, 100};
  auto* table_toh = table->add_subcommand("toh", "truth-or-Haar thresholds and upper bounds");
  table_toh->add_option("--L", orders, "group orders")->delimiter(',')->check(CLI::Range(2, 1 << 20));
  add_common(table_toh);

  std::vector<double> grid;
  int trials = 200;
  bool no_overlay = false;
  auto* power = app.add_subcommand("power", "Monte Carlo type I / type II errors over a parameter grid");
  add_model_options(power, spec);
  add_common(power);
  power->add_option("--grid", grid, "signal parameter values (lambda, beta or p)")->delimiter(',');
  power->add_option("--trials", trials, "planted and null draws per point")->check(CLI::PositiveNumber);
  power->add_option("--calibrate", calibrate, "null draws for threshold calibration (0: asymptotic rule)");
  power->add_option("--level", level, "calibration quantile")->check(CLI::Range(0.5, 1.0));
  power->add_flag("--no-overlay", no_overlay, "skip the infeasible-region check");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  o.svg = !no_svg;

  try {
    if (sample->parsed()) cmd_sample(spec, o, stem, canonical_config(sample), out);
    else if (detect->parsed()) cmd_detect(spec, o, bundle, null_draw, fixed_threshold, calibrate, level, out);
    else if (th_toh->parsed()) cmd_threshold_toh(order, out);
    else if (th_synch->parsed()) cmd_threshold_synch(group_id, freqs, o.seed, out);
    else if (th_wishart->parsed())
      cmd_threshold_wishart(prior_id, gamma, beta, sweep, o, canonical_config(th_wishart), out);
    else if (moment->parsed())
      cmd_second_moment(moment_model, prior_id, lambda, beta, gamma, ns, trials_long, monte_carlo, csv, o,
                        canonical_config(moment), out);
    else if (hyp1->parsed()) cmd_figure_hyp1(hyp1_lambdas, points, o, canonical_config(hyp1), out);
    else if (hyp2->parsed()) cmd_figure_hyp2(hyp2_lambda, hyp2_ns, points, o, canonical_config(hyp2), out);
    else if (spectrum->parsed())
      cmd_figure_spectrum(n_spec, spec_lambda, spec_noise, spec_prior, bins, o, canonical_config(spectrum), out);
    else if (table_toh->parsed()) cmd_table_toh(orders, o, canonical_config(table_toh), out);
    else if (power->parsed())
      return cmd_power(spec, grid, trials, calibrate, level, !no_overlay, o, canonical_config(power), out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const fs::filesystem_error& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace spiked::cli
