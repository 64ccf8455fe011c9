#ifndef QFFGP_DATASET_HPP
#define QFFGP_DATASET_HPP

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "qffgp/ode_system.hpp"

namespace qffgp {

/// Integrates x' = f(x, theta) from x0 with an adaptive Dormand-Prince 5(4)
/// stepper (absolute tolerance 1e-9, relative 1e-8 by default) and returns
/// the dense output sampled at the requested times (ascending, >= start
/// time). Throws IntegrationError (with the failure time) on stiff blow-up,
/// non-finite states or admissible-region violations.
Eigen::MatrixXd integrate(const OdeSystem& sys, const Eigen::VectorXd& theta,
                          const Eigen::VectorXd& x0, const Eigen::VectorXd& times,
                          double abs_tol = 1e-9, double rel_tol = 1e-8);

/// Noise specification: either a fixed variance shared by all dimensions or
/// a signal-to-noise ratio (per-dimension variance = Var_time(signal) / snr).
struct NoiseSpec {
  enum class Kind { kVariance, kSnr };
  Kind kind = Kind::kVariance;
  double value = 0.0;

  static NoiseSpec variance(double v) { return {Kind::kVariance, v}; }
  static NoiseSpec snr(double v) { return {Kind::kSnr, v}; }
  std::string to_string() const;
  static NoiseSpec parse(const std::string& text);  // "variance:0.1" | "snr:10"
};

struct Dataset {
  std::string system;
  Eigen::VectorXd theta_true;
  Eigen::VectorXd times;        // N
  Eigen::MatrixXd states_true;  // N x K
  Eigen::MatrixXd y;            // N x K noisy observations
  NoiseSpec noise;
  Eigen::VectorXd sigma2;       // realized per-dimension noise variance
  std::uint64_t seed = 0;
};

/// N equally spaced observation times on [0, t_end], ground truth from the
/// reference parameters, i.i.d. Gaussian noise from the counter-based stream.
/// Same seed, same dataset.
Dataset generate_dataset(const OdeSystem& sys, int n, const NoiseSpec& noise,
                         std::uint64_t seed);

/// Trajectory RMSE: integrate under theta_hat from the TRUE initial value,
/// sample at the observation times and return ||x~ - x_true||_2 / N (the 1/N
/// prefactor, not 1/sqrt(N), is deliberate). Integration failure propagates
/// as IntegrationError; sweep drivers report it as an infinite value.
double trajectory_rmse(const OdeSystem& sys, const Eigen::VectorXd& theta_hat,
                       const Dataset& data);

/// Column-oriented text serialization: one header row
/// (time, x_0..x_{K-1}, y_0..y_{K-1}), one tab-separated row per time point,
/// 17 significant digits so values round-trip bit-exactly.
void write_dataset_text(const Dataset& data, std::ostream& out);
Dataset read_dataset_text(std::istream& in);

/// Structured-record twin of the text format (JSON); carries the full record
/// including noise spec, seed and reference parameters. Bit-exact round trip.
void write_dataset_json(const Dataset& data, std::ostream& out);
Dataset read_dataset_json(std::istream& in);

void save_dataset_text(const Dataset& data, const std::string& path);
Dataset load_dataset_text(const std::string& path);
void save_dataset_json(const Dataset& data, const std::string& path);
Dataset load_dataset_json(const std::string& path);

}  // namespace qffgp

#endif  // QFFGP_DATASET_HPP
