#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>

#include "harness.hpp"
#include "json.hpp"
#include "qffgp/bounds.hpp"
#include "qffgp/errors.hpp"
#include "qffgp/optimize.hpp"
#include "qffgp/rng.hpp"

namespace qffgp::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kSqrtPi = 1.7724538509055160272981674833411;

std::string out_path(const GlobalOptions& opts, const std::string& file) {
  fs::create_directories(opts.out);
  return (fs::path(opts.out) / file).string();
}

std::vector<std::uint64_t> seed_list(const Config& cfg, const GlobalOptions& opts) {
  const auto raw = cfg.get_int_list("experiment", "seeds");
  std::vector<std::uint64_t> seeds;
  seeds.reserve(raw.size());
  for (long s : raw) seeds.push_back(static_cast<std::uint64_t>(s + opts.seed_offset));
  return seeds;
}

struct ExperimentSpec {
  const OdeSystem* system;
  int n;
  NoiseSpec noise;
  HyperMode hyper_mode;
  bool learn_gamma;
  FeatureSpec feature;
  std::string theta0_mode;
  std::string x0_mode;
  long max_iterations;
};

ExperimentSpec read_experiment(const Config& cfg) {
  cfg.require_keys("experiment",
                   {"system", "n", "noise", "seeds", "hyperparams", "learn_gamma", "feature",
                    "theta0", "x0", "max_iterations", "l_min", "l_max"});
  ExperimentSpec spec;
  spec.system = &lookup_system(cfg.get_string("experiment", "system"));
  spec.n = static_cast<int>(cfg.get_int("experiment", "n"));
  if (spec.n < 2) cfg.fail("experiment", "n", "n must be at least 2");
  spec.noise = NoiseSpec::parse(cfg.get_string("experiment", "noise"));
  spec.hyper_mode =
      HyperMode::parse(cfg.get_string("experiment", "hyperparams", "fit"), cfg, "experiment",
                       "hyperparams");
  spec.learn_gamma = cfg.get_bool("experiment", "learn_gamma", true);
  spec.feature = FeatureSpec::parse(cfg.get_string("experiment", "feature", "qff:80"), cfg,
                                    "experiment", "feature");
  spec.theta0_mode = cfg.get_string("experiment", "theta0", "ones");
  spec.x0_mode = cfg.get_string("experiment", "x0", "y");
  if (spec.x0_mode != "y" && spec.x0_mode != "smooth") {
    cfg.fail("experiment", "x0", "x0 must be y | smooth");
  }
  spec.max_iterations = cfg.get_int("experiment", "max_iterations", 5000);
  return spec;
}

FitOptions read_fit_options(const Config& cfg) {
  FitOptions fo;
  fo.l_min = cfg.get_double("experiment", "l_min", fo.l_min);
  fo.l_max = cfg.get_double("experiment", "l_max", fo.l_max);
  return fo;
}

Eigen::VectorXd initial_theta(const ExperimentSpec& spec, std::uint64_t seed) {
  const int P = spec.system->param_dim;
  if (spec.theta0_mode == "ones") return Eigen::VectorXd::Ones(P);
  if (spec.theta0_mode == "true") return spec.system->true_theta;
  if (spec.theta0_mode.rfind("perturbed:", 0) == 0) {
    const double frac = std::stod(spec.theta0_mode.substr(10));
    SplitMix64 rng(seed ^ 0x7777777ULL);
    Eigen::VectorXd th = spec.system->true_theta;
    for (int i = 0; i < P; ++i) th[i] *= 1.0 + frac * (2.0 * rng.next_uniform() - 1.0);
    return th;
  }
  throw ConfigError("theta0 must be ones | true | perturbed:<frac>, got '" + spec.theta0_mode +
                    "'");
}

std::unique_ptr<RiskEvaluator> make_evaluator(const FeatureSpec& feature,
                                              std::shared_ptr<const OdinProblem> problem,
                                              std::uint64_t seed) {
  const OdinProblem& p = *problem;
  switch (feature.kind) {
    case FeatureSpec::Kind::kExact:
      return std::make_unique<ExactRiskEvaluator>(std::move(problem));
    case FeatureSpec::Kind::kQff:
      return std::make_unique<FeatureRiskEvaluator>(
          std::move(problem), problem_feature_maps(p, feature.qff_order()));
    case FeatureSpec::Kind::kRff:
    case FeatureSpec::Kind::kRffBias: {
      std::vector<FeatureMatrices> mats;
      for (std::size_t k = 0; k < p.hyper.size(); ++k) {
        const auto kind = feature.kind == FeatureSpec::Kind::kRff ? RandomFeatureKind::kRff
                                                                  : RandomFeatureKind::kRffBias;
        const int samples =
            feature.kind == FeatureSpec::Kind::kRff ? feature.count / 2 : feature.count;
        const RandomFeatureMap map(kind, p.hyper[k], samples, seed * 131 + k);
        mats.push_back(rff_matrices(map, p.times_unit));
      }
      return std::make_unique<FeatureRiskEvaluator>(std::move(problem), mats);
    }
  }
  throw ConfigError("unhandled feature kind");
}

struct KernelErrs {
  double k = 0.0, d1 = 0.0, d2 = 0.0;
};

template <typename Map>
KernelErrs kernel_max_errors(const Map& map, const RbfHyperparams& h, int grid) {
  const Eigen::VectorXd phi0 = map.phi(0.0);
  const Eigen::VectorXd phi0p = map.phi_prime(0.0);
  KernelErrs e;
  for (int i = 0; i < grid; ++i) {
    const double r = static_cast<double>(i) / (grid - 1);
    const Eigen::VectorXd pr = map.phi(r);
    const Eigen::VectorXd prp = map.phi_prime(r);
    e.k = std::max(e.k, std::abs(kernel_eval(h, r) - pr.dot(phi0)));
    e.d1 = std::max(e.d1, std::abs(kernel_d1(h, r) - prp.dot(phi0)));
    e.d2 = std::max(e.d2, std::abs(kernel_d2(h, r) - prp.dot(phi0p)));
  }
  return e;
}

}  // namespace

void cmd_gen_data(const Config& cfg, const GlobalOptions& opts) {
  cfg.require_keys("experiment", {"system", "n", "noise", "seeds"});
  const OdeSystem& sys = lookup_system(cfg.get_string("experiment", "system"));
  const int n = static_cast<int>(cfg.get_int("experiment", "n"));
  if (n < 2) cfg.fail("experiment", "n", "n must be at least 2");
  const NoiseSpec noise = NoiseSpec::parse(cfg.get_string("experiment", "noise"));
  const auto seeds = seed_list(cfg, opts);

  std::vector<Dataset> sets(seeds.size());
  parallel_for(static_cast<int>(seeds.size()), opts.workers,
               [&](int i) { sets[i] = generate_dataset(sys, n, noise, seeds[i]); });

  nlohmann::json manifest;
  manifest["config_hash"] = config_hash(cfg);
  manifest["system"] = sys.name;
  manifest["n"] = n;
  manifest["noise"] = noise.to_string();
  manifest["theta_true"] = std::vector<double>(sys.true_theta.data(),
                                               sys.true_theta.data() + sys.true_theta.size());
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    std::ostringstream base;
    base << sys.name << "_n" << n << "_seed" << seeds[i];
    save_dataset_text(sets[i], out_path(opts, base.str() + ".tsv"));
    save_dataset_json(sets[i], out_path(opts, base.str() + ".json"));
    nlohmann::json entry;
    entry["seed"] = seeds[i];
    entry["text"] = base.str() + ".tsv";
    entry["record"] = base.str() + ".json";
    entry["sigma2"] =
        std::vector<double>(sets[i].sigma2.data(), sets[i].sigma2.data() + sets[i].sigma2.size());
    files.push_back(entry);
  }
  manifest["datasets"] = files;
  std::ofstream mf(out_path(opts, "manifest.json"));
  mf << manifest.dump(1) << "\n";
}

void cmd_kernel_sweep(const Config& cfg, const GlobalOptions& opts) {
  cfg.require_keys("kernel", {"l_values", "m_ladder", "grid", "rff_samples", "kinds"});
  const auto l_values = cfg.get_double_list("kernel", "l_values");
  const auto m_ladder = cfg.get_int_list("kernel", "m_ladder");
  const int grid = static_cast<int>(cfg.get_int("kernel", "grid", 1001));
  if (grid < 2) cfg.fail("kernel", "grid", "grid must be >= 2");
  const int rff_samples = static_cast<int>(cfg.get_int("kernel", "rff_samples", 100));
  std::vector<std::string> kinds;
  {
    std::istringstream is(cfg.get_string("kernel", "kinds", "qff,rff,rffb"));
    std::string tok;
    while (std::getline(is, tok, ',')) kinds.push_back(tok);
  }

  struct Task {
    double l;
    int m;
    std::string kind;
  };
  std::vector<Task> tasks;
  for (double l : l_values) {
    for (long m : m_ladder) {
      for (const auto& kind : kinds) tasks.push_back({l, static_cast<int>(m), kind});
    }
  }

  const std::string hash = config_hash(cfg);
  Table table({"kind", "l", "m", "err_k_med", "err_k_q125", "err_k_q875", "err_d1_med",
               "err_d1_q125", "err_d1_q875", "err_d2_med", "err_d2_q125", "err_d2_q875",
               "bound_k", "bound_d1", "bound_d2", "config_hash"});
  std::vector<std::vector<std::string>> rows(tasks.size());

  parallel_for(static_cast<int>(tasks.size()), opts.workers, [&](int ti) {
    const Task& task = tasks[ti];
    const RbfHyperparams h{kSqrtPi, task.l};  // the bound's normalization
    std::vector<std::string> row{task.kind, fmt17(task.l), std::to_string(task.m)};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (task.kind == "qff") {
      const KernelErrs e = kernel_max_errors(QffFeatureMap(h, task.m), h, grid);
      for (double v : {e.k, e.k, e.k, e.d1, e.d1, e.d1, e.d2, e.d2, e.d2}) row.push_back(fmt17(v));
      if (task.m >= 4) {
        const ErrorBudget b = theorem2_budget(task.m, task.l);
        row.push_back(fmt17(b.em));
        row.push_back(fmt17(b.d1_bound));
        row.push_back(fmt17(b.d2_bound));
      } else {
        for (int i = 0; i < 3; ++i) row.push_back(fmt17(nan));
      }
    } else {
      std::vector<double> ek, e1, e2;
      for (int s = 0; s < rff_samples; ++s) {
        const std::uint64_t seed = static_cast<std::uint64_t>(opts.seed_offset + s);
        const KernelErrs e =
            task.kind == "rff"
                ? kernel_max_errors(RandomFeatureMap(RandomFeatureKind::kRff, h, task.m, seed), h,
                                    grid)
                : kernel_max_errors(
                      RandomFeatureMap(RandomFeatureKind::kRffBias, h, 2 * task.m, seed), h, grid);
        ek.push_back(e.k);
        e1.push_back(e.d1);
        e2.push_back(e.d2);
      }
      for (auto* v : {&ek, &e1, &e2}) {
        row.push_back(fmt17(median(*v)));
        row.push_back(fmt17(quantile(*v, 0.125)));
        row.push_back(fmt17(quantile(*v, 0.875)));
      }
      for (int i = 0; i < 3; ++i) row.push_back(fmt17(nan));
    }
    row.push_back(hash);
    rows[ti] = std::move(row);
  });

  for (auto& row : rows) table.add_row(std::move(row));
  table.sort_rows();
  table.save(out_path(opts, "kernel_sweep.tsv"));
}

void cmd_posterior_sweep(const Config& cfg, const GlobalOptions& opts) {
  const ExperimentSpec spec = read_experiment(cfg);
  cfg.require_keys("posterior", {"feature_counts", "taus", "kinds"});
  if (spec.n > 2000) {
    cfg.fail("experiment", "n", "posterior sweep needs the exact 2Nx2N reference; n <= 2000");
  }
  const auto feature_counts = cfg.get_int_list("posterior", "feature_counts");
  std::vector<double> taus{0.8};
  if (cfg.has("posterior", "taus")) taus = cfg.get_double_list("posterior", "taus");
  std::vector<std::string> kinds{"qff", "rff", "rffb"};
  if (cfg.has("posterior", "kinds")) {
    kinds.clear();
    std::istringstream is(cfg.get_string("posterior", "kinds"));
    std::string tok;
    while (std::getline(is, tok, ',')) kinds.push_back(tok);
  }
  if (opts.exact &&
      std::find(kinds.begin(), kinds.end(), std::string("exact")) == kinds.end()) {
    kinds.push_back("exact");
  }
  const auto seeds = seed_list(cfg, opts);
  const int K = spec.system->state_dim;
  const FitOptions fit_options = read_fit_options(cfg);

  // errs[seed][kind][count][tau][dim] -> 4 absolute gaps
  struct Gap {
    double mu, sigma, mup, sigmap;
  };
  using PerSeed = std::map<std::string, std::map<long, std::vector<std::vector<Gap>>>>;
  std::vector<PerSeed> results(seeds.size());

  parallel_for(static_cast<int>(seeds.size()), opts.workers, [&](int si) {
    const PreparedExperiment prep =
        prepare_experiment(*spec.system, spec.n, spec.noise, seeds[si], spec.hyper_mode,
                           fit_options);
    const DerivData dd = build_deriv_observations(*spec.system, prep, seeds[si]);

    std::vector<std::vector<PosteriorQuery>> reference(K);
    for (int k = 0; k < K; ++k) {
      const ExactGpDeriv exact(dd.per_dim[k], prep.hyper[k]);
      for (double tau : taus) reference[k].push_back(exact.query(tau));
    }

    PerSeed& mine = results[si];
    for (const std::string& kind : kinds) {
      for (long count : feature_counts) {
        auto& grid = mine[kind][count];
        grid.assign(taus.size(), std::vector<Gap>(K));
        for (int k = 0; k < K; ++k) {
          std::unique_ptr<FeatureGpDeriv> fgp;
          if (kind == "qff") {
            fgp = std::make_unique<FeatureGpDeriv>(
                dd.per_dim[k], QffFeatureMap(prep.hyper[k], static_cast<int>(count / 2)));
          } else if (kind == "rff") {
            fgp = std::make_unique<FeatureGpDeriv>(
                dd.per_dim[k], RandomFeatureMap(RandomFeatureKind::kRff, prep.hyper[k],
                                                static_cast<int>(count / 2),
                                                seeds[si] * 131 + static_cast<std::uint64_t>(k)));
          } else if (kind == "rffb") {
            fgp = std::make_unique<FeatureGpDeriv>(
                dd.per_dim[k], RandomFeatureMap(RandomFeatureKind::kRffBias, prep.hyper[k],
                                                static_cast<int>(count),
                                                seeds[si] * 131 + static_cast<std::uint64_t>(k)));
          }
          for (std::size_t t = 0; t < taus.size(); ++t) {
            const PosteriorQuery& ref = reference[k][t];
            PosteriorQuery q;
            if (kind == "exact") {
              q = ref;  // self-comparison: zero error by construction
            } else {
              q = fgp->query(taus[t]);
            }
            grid[t][k] = {std::abs(q.mu - ref.mu), std::abs(q.sigma - ref.sigma),
                          std::abs(q.mu_prime - ref.mu_prime),
                          std::abs(q.sigma_prime - ref.sigma_prime)};
          }
        }
      }
    }
  });

  const std::string hash = config_hash(cfg);
  Table table({"kind", "m_features", "tau", "dim", "e_mu_med", "e_mu_q125", "e_mu_q875",
               "e_sigma_med", "e_sigma_q125", "e_sigma_q875", "e_mup_med", "e_mup_q125",
               "e_mup_q875", "e_sigmap_med", "e_sigmap_q125", "e_sigmap_q875", "config_hash"});
  for (const std::string& kind : kinds) {
    for (long count : feature_counts) {
      for (std::size_t t = 0; t < taus.size(); ++t) {
        for (int k = 0; k < K; ++k) {
          std::vector<double> mu, sg, mp, sp;
          for (const PerSeed& per : results) {
            const Gap& g = per.at(kind).at(count)[t][k];
            mu.push_back(g.mu);
            sg.push_back(g.sigma);
            mp.push_back(g.mup);
            sp.push_back(g.sigmap);
          }
          std::vector<std::string> row{kind, std::to_string(count), fmt17(taus[t]),
                                       std::to_string(k)};
          for (auto* v : {&mu, &sg, &mp, &sp}) {
            row.push_back(fmt17(median(*v)));
            row.push_back(fmt17(quantile(*v, 0.125)));
            row.push_back(fmt17(quantile(*v, 0.875)));
          }
          row.push_back(hash);
          table.add_row(std::move(row));
        }
      }
    }
  }
  table.sort_rows();
  table.save(out_path(opts, "posterior_sweep.tsv"));
}

void cmd_odin_run(const Config& cfg, const GlobalOptions& opts) {
  ExperimentSpec spec = read_experiment(cfg);
  if (opts.exact) spec.feature.kind = FeatureSpec::Kind::kExact;
  if (spec.feature.kind == FeatureSpec::Kind::kExact && spec.n > 2000) {
    cfg.fail("experiment", "n", "dense reference runs are capped at n <= 2000");
  }
  const auto seeds = seed_list(cfg, opts);
  const int P = spec.system->param_dim;
  const FitOptions fit_options = read_fit_options(cfg);

  struct SeedResult {
    bool failed = false;
    std::string message;
    Eigen::VectorXd theta;
    double trmse = std::numeric_limits<double>::infinity();
    double risk_final = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    bool converged = false;
    double iter_ms_med = 0.0, iter_ms_std = 0.0;
    std::vector<double> trace;
  };
  std::vector<SeedResult> results(seeds.size());

  parallel_for(static_cast<int>(seeds.size()), opts.workers, [&](int si) {
    SeedResult& res = results[si];
    try {
      const PreparedExperiment prep =
          prepare_experiment(*spec.system, spec.n, spec.noise, seeds[si], spec.hyper_mode,
                             fit_options);
      OdinProblem problem =
          make_problem(*spec.system, prep.data, prep.hyper, prep.sigma2, spec.learn_gamma);
      auto shared = std::make_shared<const OdinProblem>(problem);
      auto eval = make_evaluator(spec.feature, shared, seeds[si]);

      OptimizeOptions oo;
      oo.max_iterations = static_cast<int>(spec.max_iterations);
      const Eigen::MatrixXd x0 =
          spec.x0_mode == "smooth" ? smoothed_states(prep) : prep.data.y;
      const OptimizeResult opt = optimize(*eval, x0, initial_theta(spec, seeds[si]), oo);

      res.theta = opt.theta;
      res.risk_final = opt.trace.back();
      res.iterations = opt.iterations;
      res.converged = opt.converged;
      res.trace = opt.trace;
      const auto [ms_med, ms_std] =
          time_per_iteration(*eval, opt.x, opt.theta, opt.gamma, 15);
      res.iter_ms_med = ms_med;
      res.iter_ms_std = ms_std;
      try {
        res.trmse = trajectory_rmse(*spec.system, opt.theta, prep.data);
      } catch (const IntegrationError& e) {
        res.trmse = std::numeric_limits<double>::infinity();
        res.message = e.what();
      }
    } catch (const Error& e) {
      // Per-seed failures are recorded; the run continues.
      res.failed = true;
      res.message = e.what();
      res.theta = Eigen::VectorXd::Constant(P, std::numeric_limits<double>::quiet_NaN());
    }
  });

  const std::string hash = config_hash(cfg);
  std::vector<std::string> header{"seed",   "kind",      "m_features", "converged",
                                  "iters",  "risk_final", "trmse",      "iter_ms_med",
                                  "iter_ms_std"};
  for (int j = 0; j < P; ++j) header.push_back("theta_" + std::to_string(j));
  header.push_back("error");
  header.push_back("config_hash");
  Table seed_table(header);

  std::vector<double> trmse_ok, ms_ok;
  for (std::size_t si = 0; si < seeds.size(); ++si) {
    const SeedResult& res = results[si];
    std::vector<std::string> row{std::to_string(seeds[si]),
                                 spec.feature.label(),
                                 std::to_string(spec.feature.count),
                                 res.failed ? "-" : (res.converged ? "yes" : "no"),
                                 std::to_string(res.iterations),
                                 fmt17(res.risk_final),
                                 fmt17(res.trmse),
                                 fmt17(res.iter_ms_med),
                                 fmt17(res.iter_ms_std)};
    for (int j = 0; j < P; ++j) row.push_back(res.failed ? "nan" : fmt17(res.theta[j]));
    row.push_back(res.message.empty() ? "-" : res.message);
    row.push_back(hash);
    seed_table.add_row(std::move(row));
    if (!res.failed) {
      trmse_ok.push_back(res.trmse);
      ms_ok.push_back(res.iter_ms_med);
    }
    if (!res.failed) {
      Table trace({"iteration", "risk"});
      for (std::size_t i = 0; i < res.trace.size(); ++i) {
        trace.add_row({std::to_string(i), fmt17(res.trace[i])});
      }
      std::ostringstream name;
      name << "odin_trace_" << spec.feature.label() << spec.feature.count << "_seed" << seeds[si]
           << ".tsv";
      trace.save(out_path(opts, name.str()));
    }
  }
  seed_table.sort_rows();
  seed_table.save(out_path(opts, "odin_seeds.tsv"));

  Table summary({"kind", "m_features", "n", "seeds_ok", "trmse_median", "trmse_q20", "trmse_q80",
                 "iter_ms_median", "iter_ms_std", "config_hash"});
  summary.add_row({spec.feature.label(), std::to_string(spec.feature.count),
                   std::to_string(spec.n), std::to_string(trmse_ok.size()),
                   fmt17(median(trmse_ok)), fmt17(quantile(trmse_ok, 0.2)),
                   fmt17(quantile(trmse_ok, 0.8)), fmt17(median(ms_ok)), fmt17(stddev(ms_ok)),
                   hash});
  summary.save(out_path(opts, "odin_summary.tsv"));
}

void cmd_bench(const Config& cfg, const GlobalOptions& opts) {
  cfg.require_keys("bench",
                   {"mode", "ladder", "n", "feature", "kinds", "reps", "system", "noise"});
  const std::string mode = cfg.get_string("bench", "mode");
  if (mode != "features" && mode != "observations") {
    cfg.fail("bench", "mode", "mode must be features|observations");
  }
  const auto ladder = cfg.get_int_list("bench", "ladder");
  if (ladder.size() < 3) cfg.fail("bench", "ladder", "ladder needs at least 3 points");
  const int reps = static_cast<int>(cfg.get_int("bench", "reps", 15));
  const OdeSystem& sys = lookup_system(cfg.get_string("bench", "system", "lv"));
  const NoiseSpec noise = NoiseSpec::parse(cfg.get_string("bench", "noise", "variance:0.1"));
  const FeatureSpec base_feature = FeatureSpec::parse(
      cfg.get_string("bench", "feature", "qff:80"), cfg, "bench", "feature");
  std::vector<std::string> kinds{"feature"};
  if (cfg.has("bench", "kinds")) {
    kinds.clear();
    std::istringstream is(cfg.get_string("bench", "kinds"));
    std::string tok;
    while (std::getline(is, tok, ',')) kinds.push_back(tok);
  }
  if (opts.exact && std::find(kinds.begin(), kinds.end(), "exact") == kinds.end()) {
    kinds.push_back("exact");
  }
  const int fixed_n = static_cast<int>(cfg.get_int("bench", "n", 1000));

  const std::string hash = config_hash(cfg);
  Table table({"mode", "kind", "point", "n", "m_features", "iter_ms_med", "iter_ms_std",
               "config_hash"});
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;

  for (long point : ladder) {
    const int n = mode == "observations" ? static_cast<int>(point) : fixed_n;
    const int m_count = mode == "features" ? static_cast<int>(point) : base_feature.count;

    const PreparedExperiment prep = prepare_experiment(sys, n, noise, 0, HyperMode{}, {});
    OdinProblem problem = make_problem(sys, prep.data, prep.hyper, prep.sigma2, true);
    auto shared = std::make_shared<const OdinProblem>(problem);

    for (const std::string& kind : kinds) {
      if (kind == "exact" && n > 2000) {
        throw ConfigError("bench: dense reference runs are capped at n <= 2000");
      }
      FeatureSpec fs = base_feature;
      fs.count = m_count;
      if (kind == "exact") fs.kind = FeatureSpec::Kind::kExact;
      auto eval = make_evaluator(fs, shared, 0);
      const auto [ms_med, ms_std] =
          time_per_iteration(*eval, prep.data.y, sys.true_theta, problem.gamma, reps);
      table.add_row({mode, kind, std::to_string(point), std::to_string(n),
                     std::to_string(kind == "exact" ? 0 : m_count), fmt17(ms_med),
                     fmt17(ms_std), hash});
      series[kind].first.push_back(static_cast<double>(point));
      series[kind].second.push_back(ms_med);
    }
  }
  table.save(out_path(opts, "bench_" + mode + ".tsv"));

  Table summary({"mode", "kind", "points", "loglog_slope", "config_hash"});
  for (const auto& [kind, xy] : series) {
    summary.add_row({mode, kind, std::to_string(xy.first.size()),
                     fmt17(loglog_slope(xy.first, xy.second)), hash});
  }
  summary.sort_rows();
  summary.save(out_path(opts, "bench_" + mode + "_summary.tsv"));
}

}  // namespace qffgp::cli
