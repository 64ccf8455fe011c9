#ifndef QFFGP_TOOLS_COMMANDS_HPP
#define QFFGP_TOOLS_COMMANDS_HPP

#include <string>

#include "config.hpp"

namespace qffgp::cli {

struct GlobalOptions {
  std::string out = ".";
  long seed_offset = 0;
  int workers = 2;
  bool exact = false;  // force the dense reference path where applicable
};

void cmd_gen_data(const Config& cfg, const GlobalOptions& opts);
void cmd_kernel_sweep(const Config& cfg, const GlobalOptions& opts);
void cmd_posterior_sweep(const Config& cfg, const GlobalOptions& opts);
void cmd_odin_run(const Config& cfg, const GlobalOptions& opts);
void cmd_bench(const Config& cfg, const GlobalOptions& opts);

}  // namespace qffgp::cli

#endif  // QFFGP_TOOLS_COMMANDS_HPP
