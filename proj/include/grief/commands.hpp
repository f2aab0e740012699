#ifndef GRIEF_COMMANDS_HPP
#define GRIEF_COMMANDS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace grief {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

// Options merged from the JSON config file and command-line flags; flags win.
struct CliOptions {
  std::optional<std::string> config_path;
  std::uint64_t seed = 0;

  std::optional<std::string> data;
  std::optional<std::string> target;
  bool header = true;
  std::optional<std::string> test_data;

  std::vector<int> mbar;       // one entry broadcast over dimensions
  std::optional<int> p;
  std::string mode = "grief2";  // grief2 | grief1
  bool tie_lengthscales = false;

  int iters = 10000;
  int burn = 1000;
  int thin = 50;
  double step_size = 0.1;

  std::optional<std::string> model;  // input model for sample/predict
  std::optional<std::string> out;

  // reconstruct / precondition harness knobs
  std::optional<int> n;
  std::optional<int> d;
  std::vector<int> p_sweep;
  std::optional<double> tol;
  std::optional<int> study_seeds;
};

// Loads JSON config values into opts; keys already set by flags are listed
// in `overridden` and keep their flag value.
void apply_config_file(CliOptions& opts, const std::string& path,
                       const std::vector<std::string>& overridden);

int cmd_train(const CliOptions& opts);
int cmd_sample(const CliOptions& opts);
int cmd_predict(const CliOptions& opts);
int cmd_reconstruct(const CliOptions& opts);
int cmd_precondition(const CliOptions& opts);

}  // namespace grief

#endif
