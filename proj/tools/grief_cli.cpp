#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "grief/commands.hpp"

namespace {

// Records which keys were set by flags so config-file values do not
// override them.
struct FlagTracker {
  std::vector<std::string> set;
  void note(const CLI::App& cmd, const char* flag, const char* key) {
    if (cmd.count(flag) > 0) set.push_back(key);
  }
};

void add_common_flags(CLI::App& cmd, grief::CliOptions& opts, std::string& config_path,
                      std::string& mbar_spec) {
  cmd.add_option("--config", config_path, "JSON config file; flags override its keys");
  cmd.add_option("--seed", opts.seed, "global random seed");
  cmd.add_option("--data", [&opts](const std::vector<std::string>& v) {
    opts.data = v.back();
    return true;
  }, "input CSV");
  cmd.add_option("--target", [&opts](const std::vector<std::string>& v) {
    opts.target = v.back();
    return true;
  }, "target column (name with header, else index)");
  cmd.add_option("--test-data", [&opts](const std::vector<std::string>& v) {
    opts.test_data = v.back();
    return true;
  }, "held-out CSV for an RMSE report");
  cmd.add_flag("--no-header", [&opts](std::int64_t) { opts.header = false; },
               "treat the first CSV row as data");
  cmd.add_option("--mbar", mbar_spec, "grid points per dimension: one value or comma list");
  cmd.add_option("--p", [&opts](const std::vector<std::string>& v) {
    opts.p = std::stoi(v.back());
    return true;
  }, "number of basis functions");
  cmd.add_option("--mode", opts.mode, "grief2 (hyperparameter optimization) or grief1 (weight sampling)");
  cmd.add_flag("--tie-lengthscales", opts.tie_lengthscales, "share one lengthscale over dimensions");
  cmd.add_option("--iters", opts.iters, "MCMC iterations");
  cmd.add_option("--burn", opts.burn, "burn-in iterations");
  cmd.add_option("--thin", opts.thin, "thinning stride");
  cmd.add_option("--step-size", opts.step_size, "initial MALA step size");
  cmd.add_option("--model", [&opts](const std::vector<std::string>& v) {
    opts.model = v.back();
    return true;
  }, "model file");
  cmd.add_option("--out", [&opts](const std::vector<std::string>& v) {
    opts.out = v.back();
    return true;
  }, "output path");
  cmd.add_option("--n", [&opts](const std::vector<std::string>& v) {
    opts.n = std::stoi(v.back());
    return true;
  }, "study size");
  cmd.add_option("--d", [&opts](const std::vector<std::string>& v) {
    opts.d = std::stoi(v.back());
    return true;
  }, "study dimension");
  cmd.add_option("--p-sweep", [&opts](const std::vector<std::string>& v) {
    opts.p_sweep.clear();
    std::stringstream ss(v.back());
    std::string tok;
    while (std::getline(ss, tok, ',')) opts.p_sweep.push_back(std::stoi(tok));
    return true;
  }, "comma-separated basis sizes for the reconstruction sweep");
  cmd.add_option("--tol", [&opts](const std::vector<std::string>& v) {
    opts.tol = std::stod(v.back());
    return true;
  }, "solver tolerance");
  cmd.add_option("--study-seeds", [&opts](const std::vector<std::string>& v) {
    opts.study_seeds = std::stoi(v.back());
    return true;
  }, "number of repeated study seeds");
}

std::vector<int> parse_mbar(const std::string& spec) {
  std::vector<int> mbar;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) mbar.push_back(std::stoi(tok));
  return mbar;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian process regression with grid-structured eigenfunction bases"};
  app.require_subcommand(1);

  grief::CliOptions opts;
  std::string config_path;
  std::string mbar_spec;

  CLI::App* train = app.add_subcommand("train", "fit hyperparameters and write a model");
  CLI::App* sample = app.add_subcommand("sample", "MCMC over weights and noise of a trained model");
  CLI::App* predict = app.add_subcommand("predict", "predict mean/variance for new points");
  CLI::App* reconstruct = app.add_subcommand("reconstruct", "covariance reconstruction error sweep");
  CLI::App* precondition = app.add_subcommand("precondition", "paired CG iteration-count study");
  for (CLI::App* cmd : {train, sample, predict, reconstruct, precondition})
    add_common_flags(*cmd, opts, config_path, mbar_spec);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? grief::kExitOk : grief::kExitUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  std::vector<std::string> flag_keys;
  const auto note = [&](const char* flag, const char* key) {
    if (active->count(flag) > 0) flag_keys.push_back(key);
  };
  note("--seed", "seed");
  note("--data", "data");
  note("--target", "target");
  note("--test-data", "test_data");
  note("--no-header", "header");
  note("--mbar", "mbar");
  note("--p", "p");
  note("--mode", "mode");
  note("--tie-lengthscales", "tie_lengthscales");
  note("--iters", "iters");
  note("--burn", "burn");
  note("--thin", "thin");
  note("--step-size", "step_size");
  note("--model", "model");
  note("--out", "out");
  note("--n", "n");
  note("--d", "d");
  note("--p-sweep", "p_sweep");
  note("--tol", "tol");
  note("--study-seeds", "study_seeds");

  if (!mbar_spec.empty()) {
    try {
      opts.mbar = parse_mbar(mbar_spec);
    } catch (const std::exception&) {
      std::cerr << "error: cannot parse --mbar value '" << mbar_spec << "'\n";
      return grief::kExitUsage;
    }
  }
  if (!config_path.empty()) {
    try {
      grief::apply_config_file(opts, config_path, flag_keys);
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << "\n";
      return grief::kExitUsage;
    }
  }

  if (active == train) return grief::cmd_train(opts);
  if (active == sample) return grief::cmd_sample(opts);
  if (active == predict) return grief::cmd_predict(opts);
  if (active == reconstruct) return grief::cmd_reconstruct(opts);
  return grief::cmd_precondition(opts);
}
