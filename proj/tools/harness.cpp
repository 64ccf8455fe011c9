#include "harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "qffgp/rng.hpp"

namespace qffgp::cli {

std::string fmt17(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

Table::Table(std::vector<std::string> header) : header_(std::move(header)) {}

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) {
    throw Error("Table: row width " + std::to_string(row.size()) + " does not match header " +
                std::to_string(header_.size()));
  }
  rows_.push_back(std::move(row));
}

void Table::sort_rows() { std::sort(rows_.begin(), rows_.end()); }

void Table::write(std::ostream& out) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    out << header_[i] << (i + 1 == header_.size() ? '\n' : '\t');
  }
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << row[i] << (i + 1 == row.size() ? '\n' : '\t');
    }
  }
}

void Table::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw Error("Table: cannot open '" + path + "' for writing");
  write(f);
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - lo;
  return (1.0 - frac) * v[lo] + frac * v[hi];
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= v.size();
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / (v.size() - 1));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string FeatureSpec::label() const {
  switch (kind) {
    case Kind::kExact:
      return "exact";
    case Kind::kQff:
      return "qff";
    case Kind::kRff:
      return "rff";
    case Kind::kRffBias:
      return "rffb";
  }
  return "?";
}

FeatureSpec FeatureSpec::parse(const std::string& text, const Config& cfg,
                               const std::string& section, const std::string& key) {
  FeatureSpec spec;
  if (text == "exact") {
    spec.kind = Kind::kExact;
    return spec;
  }
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    cfg.fail(section, key, "feature spec must be exact|qff:M|rff:M|rffb:M, got '" + text + "'");
  }
  const std::string kind = text.substr(0, colon);
  int count = 0;
  try {
    count = std::stoi(text.substr(colon + 1));
  } catch (const std::exception&) {
    cfg.fail(section, key, "bad feature count in '" + text + "'");
  }
  if (count < 1) cfg.fail(section, key, "feature count must be positive");
  if (kind == "qff") {
    if (count % 2 != 0) cfg.fail(section, key, "qff feature count must be even (2m layout)");
    spec.kind = Kind::kQff;
  } else if (kind == "rff") {
    if (count % 2 != 0) cfg.fail(section, key, "rff feature count must be even (cos/sin pairs)");
    spec.kind = Kind::kRff;
  } else if (kind == "rffb") {
    spec.kind = Kind::kRffBias;
  } else {
    cfg.fail(section, key, "unknown feature kind '" + kind + "'");
  }
  spec.count = count;
  return spec;
}

HyperMode HyperMode::parse(const std::string& text, const Config& cfg,
                           const std::string& section, const std::string& key) {
  HyperMode mode;
  if (text == "fit") return mode;
  if (text.rfind("fixed:", 0) != 0) {
    cfg.fail(section, key, "hyperparams must be 'fit' or 'fixed:rho=..,l=..,sigma2=..'");
  }
  mode.fit = false;
  bool have_rho = false, have_l = false, have_s2 = false;
  std::istringstream is(text.substr(6));
  std::string item;
  while (std::getline(is, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) cfg.fail(section, key, "bad assignment '" + item + "'");
    const std::string name = item.substr(0, eq);
    double value = 0.0;
    try {
      value = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      cfg.fail(section, key, "bad numeric value in '" + item + "'");
    }
    if (name == "rho") {
      mode.fixed.variance = value;
      have_rho = true;
    } else if (name == "l") {
      mode.fixed.lengthscale = value;
      have_l = true;
    } else if (name == "sigma2") {
      mode.fixed_sigma2 = value;
      have_s2 = true;
    } else {
      cfg.fail(section, key, "unknown hyperparameter '" + name + "'");
    }
  }
  if (!have_rho || !have_l || !have_s2) {
    cfg.fail(section, key, "fixed hyperparameters need rho, l and sigma2");
  }
  return mode;
}

PreparedExperiment prepare_experiment(const OdeSystem& sys, int n, const NoiseSpec& noise,
                                      std::uint64_t seed, const HyperMode& hyper_mode,
                                      const FitOptions& fit_options) {
  PreparedExperiment prep;
  prep.data = generate_dataset(sys, n, noise, seed);
  const double t0 = prep.data.times[0];
  prep.time_scale = prep.data.times[n - 1] - t0;
  prep.times_unit = (prep.data.times.array() - t0) / prep.time_scale;

  const int K = sys.state_dim;
  prep.sigma2.resize(K);
  if (hyper_mode.fit) {
    for (int k = 0; k < K; ++k) {
      const FittedHyper fit = fit_hyperparams(prep.data.y.col(k), prep.times_unit, fit_options);
      prep.hyper.push_back(fit.hyper);
      prep.sigma2[k] = fit.sigma2;
    }
  } else {
    prep.hyper.assign(K, hyper_mode.fixed);
    prep.sigma2.setConstant(hyper_mode.fixed_sigma2);
  }
  return prep;
}

DerivData build_deriv_observations(const OdeSystem& sys, const PreparedExperiment& prep,
                                   std::uint64_t seed) {
  const int n = static_cast<int>(prep.times_unit.size());
  const int K = sys.state_dim;

  // True derivatives on the unit axis: time_scale * f(x_true, theta_true).
  Eigen::MatrixXd deriv(n, K);
  Eigen::VectorXd xi(K), dxi(K);
  for (int i = 0; i < n; ++i) {
    xi = prep.data.states_true.row(i);
    sys.rhs(xi, prep.data.theta_true, dxi);
    deriv.row(i) = prep.time_scale * dxi.transpose();
  }

  DerivData out;
  SplitMix64 rng(seed ^ 0x5EED5EEDULL);
  for (int k = 0; k < K; ++k) {
    double gamma = 0.0;
    if (prep.data.noise.kind == NoiseSpec::Kind::kVariance) {
      gamma = prep.data.noise.value;
    } else {
      const Eigen::VectorXd col = deriv.col(k);
      const double var = (col.array() - col.mean()).square().sum() / n;
      gamma = var / prep.data.noise.value;
    }
    gamma = std::max(gamma, 1e-12);

    DerivObservationSet obs;
    obs.times = prep.times_unit;
    obs.y = prep.data.y.col(k);
    obs.F = deriv.col(k);
    const double sd = std::sqrt(gamma);
    for (int i = 0; i < n; ++i) obs.F[i] += sd * rng.next_normal();
    obs.sigma2 = std::max(prep.sigma2[k], 1e-12);
    obs.gamma = gamma;
    out.per_dim.push_back(std::move(obs));
  }
  return out;
}

Eigen::MatrixXd smoothed_states(const PreparedExperiment& prep, int order) {
  const int n = static_cast<int>(prep.times_unit.size());
  const int K = static_cast<int>(prep.data.y.cols());
  Eigen::MatrixXd out(n, K);
  for (int k = 0; k < K; ++k) {
    // Short lengthscales need more quadrature nodes before the feature
    // kernel is trustworthy; e/(2 l^2) is the decay threshold.
    const double l = prep.hyper[k].lengthscale;
    const int needed = static_cast<int>(std::ceil(std::exp(1.0) / (2.0 * l * l))) + 8;
    const int dim_order = std::clamp(needed, order, 320);
    const QffFeatureMap map(prep.hyper[k], dim_order);
    const int M = map.feature_dim();
    Eigen::MatrixXd phi(M, n);
    for (int j = 0; j < n; ++j) map.phi_into(prep.times_unit[j], phi.col(j));
    Eigen::MatrixXd B = Eigen::MatrixXd::Identity(M, M) * prep.sigma2[k];
    B.selfadjointView<Eigen::Lower>().rankUpdate(phi, 1.0);
    B = B.selfadjointView<Eigen::Lower>();
    const Eigen::VectorXd w = Eigen::LLT<Eigen::MatrixXd>(B).solve(phi * prep.data.y.col(k));
    out.col(k) = phi.transpose() * w;
  }
  return out;
}

std::pair<double, double> time_per_iteration(RiskEvaluator& eval, const Eigen::MatrixXd& x,
                                             const Eigen::VectorXd& theta,
                                             const Eigen::VectorXd& gamma, int reps) {
  RiskGradient grad;
  std::vector<double> ms;
  ms.reserve(reps);
  Eigen::VectorXd g = gamma;
  for (int r = 0; r < reps; ++r) {
    g = gamma * (1.0 + ((r % 2 == 0) ? 1e-9 : -1e-9));
    const auto tic = std::chrono::steady_clock::now();
    eval.value_and_grad(x, theta, g, grad);
    const auto toc = std::chrono::steady_clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(toc - tic).count());
  }
  return {median(ms), stddev(ms)};
}

}  // namespace qffgp::cli
