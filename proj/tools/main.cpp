#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "harness.hpp"
#include "qffgp/bounds.hpp"
#include "qffgp/errors.hpp"

namespace {

using qffgp::cli::Config;
using qffgp::cli::ConfigError;
using qffgp::cli::fmt17;
using qffgp::cli::GlobalOptions;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

void print_kv(const std::string& key, const std::string& value) {
  std::cout << key << "\t" << value << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadrature Fourier feature GP regression with derivatives and ODE parameter "
               "inference: experiment harness"};
  app.require_subcommand(1);

  std::string config_path;
  GlobalOptions opts;
  app.add_option("--config", config_path, "Experiment configuration file");
  app.add_option("--out", opts.out, "Output directory (default: current)");
  app.add_option("--seed-offset", opts.seed_offset, "Offset added to every configured seed");
  app.add_option("--workers", opts.workers, "Worker threads for seeds and sweep points")
      ->check(CLI::PositiveNumber);
  app.add_flag("--exact", opts.exact, "Force the dense reference path where applicable");

  auto* gen = app.add_subcommand("gen-data", "Generate noisy benchmark datasets");
  auto* kernel = app.add_subcommand("kernel-sweep", "Max kernel-approximation error sweep");
  auto* posterior =
      app.add_subcommand("posterior-sweep", "Posterior approximation error sweep");
  auto* odin = app.add_subcommand("odin-run", "ODE parameter inference runs");
  auto* bench = app.add_subcommand("bench", "Per-iteration runtime scaling");

  auto* bounds = app.add_subcommand("bounds", "Error-bound and minimum-order queries");
  bounds->require_subcommand(1);
  int b_m = 0, b_n = 0;
  double b_l = 0.0, b_rho = 1.0, b_c = 1.0, b_R = 1.0, b_tol = 0.5, b_lambda = 1e-6,
         b_gamma = 0.1, b_eps = 0.1;
  auto* b_em = bounds->add_subcommand("em", "Master error term E_m");
  b_em->add_option("--m", b_m)->required();
  b_em->add_option("--l", b_l)->required();
  auto* b_budget = bounds->add_subcommand("budget", "Kernel and derivative error budget");
  b_budget->add_option("--m", b_m)->required();
  b_budget->add_option("--l", b_l)->required();
  auto* b_gprd = bounds->add_subcommand("min-order-gprd", "Minimum order for posterior error");
  b_gprd->add_option("--l", b_l)->required();
  b_gprd->add_option("--rho", b_rho)->required();
  b_gprd->add_option("--n", b_n)->required();
  b_gprd->add_option("--c", b_c)->required();
  b_gprd->add_option("--R", b_R)->required();
  b_gprd->add_option("--C", b_tol)->required();
  auto* b_risk = bounds->add_subcommand("min-order-risk", "Minimum order for relative risk error");
  b_risk->add_option("--l", b_l)->required();
  b_risk->add_option("--rho", b_rho)->required();
  b_risk->add_option("--lambda", b_lambda)->required();
  b_risk->add_option("--gamma", b_gamma)->required();
  b_risk->add_option("--n", b_n)->required();
  b_risk->add_option("--eps", b_eps)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (bounds->parsed()) {
      if (b_em->parsed()) {
        print_kv("m", std::to_string(b_m));
        print_kv("l", fmt17(b_l));
        print_kv("e_m", fmt17(qffgp::e_m(b_m, b_l)));
      } else if (b_budget->parsed()) {
        const qffgp::ErrorBudget b = qffgp::theorem2_budget(b_m, b_l);
        print_kv("m", std::to_string(b_m));
        print_kv("l", fmt17(b_l));
        print_kv("e_m", fmt17(b.em));
        print_kv("d1_bound", fmt17(b.d1_bound));
        print_kv("d2_bound", fmt17(b.d2_bound));
      } else if (b_gprd->parsed()) {
        const int m = qffgp::min_order_gprd(b_l, b_rho, b_n, b_c, b_R, b_tol);
        print_kv("min_order", std::to_string(m));
      } else if (b_risk->parsed()) {
        const int m = qffgp::min_order_risk(b_l, b_rho, b_lambda, b_gamma, b_n, b_eps);
        print_kv("min_order", std::to_string(m));
      }
      return kExitOk;
    }

    if (config_path.empty()) {
      throw ConfigError("this subcommand requires --config <file>");
    }
    const Config cfg = Config::parse_file(config_path);

    if (gen->parsed()) {
      qffgp::cli::cmd_gen_data(cfg, opts);
    } else if (kernel->parsed()) {
      qffgp::cli::cmd_kernel_sweep(cfg, opts);
    } else if (posterior->parsed()) {
      qffgp::cli::cmd_posterior_sweep(cfg, opts);
    } else if (odin->parsed()) {
      qffgp::cli::cmd_odin_run(cfg, opts);
    } else if (bench->parsed()) {
      qffgp::cli::cmd_bench(cfg, opts);
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const qffgp::DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const qffgp::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const qffgp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
