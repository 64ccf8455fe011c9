#ifndef QFFGP_TOOLS_HARNESS_HPP
#define QFFGP_TOOLS_HARNESS_HPP

#include <Eigen/Core>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"
#include "qffgp/dataset.hpp"
#include "qffgp/gp_deriv.hpp"
#include "qffgp/hyperfit.hpp"
#include "qffgp/risk.hpp"

namespace qffgp::cli {

std::string fmt17(double v);

/// Self-describing tab-separated table: header row, one record per row.
/// Rows are sorted before emission so worker scheduling cannot reorder them.
class Table {
 public:
  explicit Table(std::vector<std::string> header);
  void add_row(std::vector<std::string> row);
  void sort_rows();
  void write(std::ostream& out) const;
  void save(const std::string& path) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Runs fn(0..count-1) on a small worker pool. Results must go to
/// preallocated slots; the first captured exception is rethrown after join.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

double median(std::vector<double> v);
double quantile(std::vector<double> v, double q);
double stddev(const std::vector<double>& v);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Feature specification "exact" | "qff:M" | "rff:M" | "rffb:M" with M the
/// feature-vector length (even for qff: the 2m layout).
struct FeatureSpec {
  enum class Kind { kExact, kQff, kRff, kRffBias };
  Kind kind = Kind::kExact;
  int count = 0;  // feature-vector length M
  int qff_order() const { return count / 2; }
  std::string label() const;
  static FeatureSpec parse(const std::string& text, const Config& cfg,
                           const std::string& section, const std::string& key);
};

/// Hyperparameter mode: "fit" or "fixed:rho=..,l=..,sigma2=..".
struct HyperMode {
  bool fit = true;
  RbfHyperparams fixed{1.0, 0.2};
  double fixed_sigma2 = 0.1;
  static HyperMode parse(const std::string& text, const Config& cfg,
                         const std::string& section, const std::string& key);
};

/// Dataset plus the per-dimension hyperparameters used downstream.
struct PreparedExperiment {
  Dataset data;
  std::vector<RbfHyperparams> hyper;
  Eigen::VectorXd sigma2;
  Eigen::VectorXd times_unit;
  double time_scale = 1.0;
};

PreparedExperiment prepare_experiment(const OdeSystem& sys, int n, const NoiseSpec& noise,
                                      std::uint64_t seed, const HyperMode& hyper_mode,
                                      const FitOptions& fit_options = {});

/// Derivative observations for the posterior sweeps: true state derivatives
/// on the unit time axis plus noise drawn by the dataset's rule (same
/// variance for fixed-variance specs, Var(derivative)/snr for SNR specs).
struct DerivData {
  std::vector<DerivObservationSet> per_dim;  // K sets sharing the time grid
};

DerivData build_deriv_observations(const OdeSystem& sys, const PreparedExperiment& prep,
                                   std::uint64_t seed);

/// GP-regression smoothed states (per dimension, weight-space solve at the
/// given order): the cheap state initialization for the joint optimizer.
Eigen::MatrixXd smoothed_states(const PreparedExperiment& prep, int order = 64);

/// Median and stddev (ms) of the per-iteration cost: repeated risk+gradient
/// evaluations, gamma nudged per call so the gamma-dependent factorization
/// refreshes exactly as it does during learned-gamma optimization.
std::pair<double, double> time_per_iteration(RiskEvaluator& eval, const Eigen::MatrixXd& x,
                                             const Eigen::VectorXd& theta,
                                             const Eigen::VectorXd& gamma, int reps);

}  // namespace qffgp::cli

#endif  // QFFGP_TOOLS_HARNESS_HPP
