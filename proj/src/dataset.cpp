#include "qffgp/dataset.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "qffgp/errors.hpp"
#include "qffgp/rng.hpp"

#include "json.hpp"

namespace qffgp {

namespace {

std::string fmt17(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::string NoiseSpec::to_string() const {
  return (kind == Kind::kVariance ? "variance:" : "snr:") + fmt17(value);
}

NoiseSpec NoiseSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw DomainError("NoiseSpec: expected 'variance:<v>' or 'snr:<v>', got '" + text + "'");
  }
  const std::string kind = text.substr(0, colon);
  double value = 0.0;
  try {
    value = std::stod(text.substr(colon + 1));
  } catch (const std::exception&) {
    throw DomainError("NoiseSpec: bad numeric value in '" + text + "'");
  }
  if (kind == "variance") {
    if (value < 0.0) throw DomainError("NoiseSpec: variance must be >= 0");
    return variance(value);
  }
  if (kind == "snr") {
    if (!(value > 0.0)) throw DomainError("NoiseSpec: snr must be > 0");
    return snr(value);
  }
  throw DomainError("NoiseSpec: unknown kind '" + kind + "'");
}

Dataset generate_dataset(const OdeSystem& sys, int n, const NoiseSpec& noise,
                         std::uint64_t seed) {
  if (n < 2) throw DomainError("generate_dataset: need at least two observations");

  Dataset d;
  d.system = sys.name;
  d.theta_true = sys.true_theta;
  d.noise = noise;
  d.seed = seed;
  d.times = Eigen::VectorXd::LinSpaced(n, 0.0, sys.t_end);
  d.states_true = integrate(sys, sys.true_theta, sys.x0, d.times);

  const int K = sys.state_dim;
  d.sigma2.resize(K);
  for (int k = 0; k < K; ++k) {
    if (noise.kind == NoiseSpec::Kind::kVariance) {
      d.sigma2[k] = noise.value;
    } else {
      const Eigen::VectorXd col = d.states_true.col(k);
      const double mean = col.mean();
      const double var = (col.array() - mean).square().sum() / n;
      d.sigma2[k] = var / noise.value;
    }
  }

  SplitMix64 rng(seed);
  d.y = d.states_true;
  for (int k = 0; k < K; ++k) {
    const double sd = std::sqrt(d.sigma2[k]);
    for (int i = 0; i < n; ++i) d.y(i, k) += sd * rng.next_normal();
  }
  return d;
}

double trajectory_rmse(const OdeSystem& sys, const Eigen::VectorXd& theta_hat,
                       const Dataset& data) {
  const Eigen::MatrixXd traj = integrate(sys, theta_hat, sys.x0, data.times);
  const double n = static_cast<double>(data.times.size());
  return (traj - data.states_true).norm() / n;
}

void write_dataset_text(const Dataset& data, std::ostream& out) {
  const Eigen::Index n = data.times.size();
  const Eigen::Index K = data.states_true.cols();
  out << "time";
  for (Eigen::Index k = 0; k < K; ++k) out << "\tx_" << k;
  for (Eigen::Index k = 0; k < K; ++k) out << "\ty_" << k;
  out << "\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    out << fmt17(data.times[i]);
    for (Eigen::Index k = 0; k < K; ++k) out << '\t' << fmt17(data.states_true(i, k));
    for (Eigen::Index k = 0; k < K; ++k) out << '\t' << fmt17(data.y(i, k));
    out << "\n";
  }
}

Dataset read_dataset_text(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw DomainError("read_dataset_text: missing header row");

  std::vector<std::string> cols;
  {
    std::istringstream hs(header);
    std::string tok;
    while (std::getline(hs, tok, '\t')) cols.push_back(tok);
  }
  if (cols.empty() || cols[0] != "time" || cols.size() % 2 == 0) {
    throw DomainError("read_dataset_text: malformed header '" + header + "'");
  }
  const Eigen::Index K = static_cast<Eigen::Index>((cols.size() - 1) / 2);

  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (std::getline(ls, tok, '\t')) row.push_back(std::stod(tok));
    if (row.size() != cols.size()) {
      throw DomainError("read_dataset_text: row with " + std::to_string(row.size()) +
                        " fields, expected " + std::to_string(cols.size()));
    }
    rows.push_back(std::move(row));
  }
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  if (n == 0) throw DomainError("read_dataset_text: no data rows");

  Dataset d;
  d.times.resize(n);
  d.states_true.resize(n, K);
  d.y.resize(n, K);
  for (Eigen::Index i = 0; i < n; ++i) {
    d.times[i] = rows[i][0];
    for (Eigen::Index k = 0; k < K; ++k) {
      d.states_true(i, k) = rows[i][1 + k];
      d.y(i, k) = rows[i][1 + K + k];
    }
  }
  return d;
}

namespace {

nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd json_to_vec(const nlohmann::json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

nlohmann::json mat_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd json_to_mat(const nlohmann::json& rows) {
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  if (n == 0) return Eigen::MatrixXd(0, 0);
  const Eigen::Index k = static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd m(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

}  // namespace

void write_dataset_json(const Dataset& data, std::ostream& out) {
  nlohmann::json j;
  j["system"] = data.system;
  j["theta_true"] = vec_to_json(data.theta_true);
  j["noise"] = data.noise.to_string();
  j["sigma2"] = vec_to_json(data.sigma2);
  j["seed"] = data.seed;
  j["times"] = vec_to_json(data.times);
  j["states_true"] = mat_to_json(data.states_true);
  j["y"] = mat_to_json(data.y);
  out << j.dump(1) << "\n";
}

Dataset read_dataset_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw DomainError(std::string("read_dataset_json: parse error: ") + e.what());
  }
  Dataset d;
  d.system = j.value("system", std::string());
  if (j.contains("theta_true")) d.theta_true = json_to_vec(j["theta_true"]);
  if (j.contains("noise")) d.noise = NoiseSpec::parse(j["noise"].get<std::string>());
  if (j.contains("sigma2")) d.sigma2 = json_to_vec(j["sigma2"]);
  d.seed = j.value("seed", std::uint64_t{0});
  d.times = json_to_vec(j.at("times"));
  d.states_true = json_to_mat(j.at("states_true"));
  d.y = json_to_mat(j.at("y"));
  return d;
}

void save_dataset_text(const Dataset& data, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw DomainError("save_dataset_text: cannot open '" + path + "' for writing");
  write_dataset_text(data, f);
}

Dataset load_dataset_text(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DomainError("load_dataset_text: cannot open '" + path + "'");
  return read_dataset_text(f);
}

void save_dataset_json(const Dataset& data, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw DomainError("save_dataset_json: cannot open '" + path + "' for writing");
  write_dataset_json(data, f);
}

Dataset load_dataset_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DomainError("load_dataset_json: cannot open '" + path + "'");
  return read_dataset_json(f);
}

}  // namespace qffgp
