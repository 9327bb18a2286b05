#pragma once

#include <string>
#include <vector>

#include "qmeasure/config.hpp"

namespace qm {

// Subcommand bodies. Each writes its artifacts under out_dir and returns
// a process exit status; failures print a message naming the offending
// input to stderr.

int cmd_train(const RunConfig& cfg, const std::string& out_dir);
int cmd_dp_baseline(const RunConfig& cfg, const std::string& out_dir);
int cmd_evaluate(const RunConfig& cfg, const std::string& out_dir,
                 const std::string& checkpoint_path, const std::string& table_path);
int cmd_diagnostics(const RunConfig& cfg, const std::string& out_dir);
int cmd_xi_sweep(const RunConfig& cfg, const std::string& out_dir,
                 const std::vector<double>& sigma_override);

}  // namespace qm
