#include "grief/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "grief/dataset.hpp"
#include "grief/errors.hpp"
#include "grief/inference.hpp"
#include "grief/model_io.hpp"
#include "grief/study.hpp"

namespace grief {

namespace {

using nlohmann::json;

bool overridden(const std::vector<std::string>& flags, const std::string& key) {
  return std::find(flags.begin(), flags.end(), key) != flags.end();
}

int usage_error(const std::vector<std::string>& problems) {
  for (const auto& p : problems) std::cerr << "error: " << p << "\n";
  return kExitUsage;
}

// Default basis size: n rounded down to a power of ten, capped at 1000 and
// floored at 1.
int default_p_for(int n) {
  const int pow10 = static_cast<int>(std::pow(10.0, std::floor(std::log10(static_cast<double>(n)))));
  return std::max(1, std::min(1000, pow10));
}

std::vector<int> broadcast_mbar(const std::vector<int>& mbar, int d) {
  if (static_cast<int>(mbar.size()) == d) return mbar;
  if (mbar.size() == 1) return std::vector<int>(static_cast<size_t>(d), mbar[0]);
  throw std::invalid_argument("mbar must have one entry or one per feature dimension");
}

int clamp_p_to_grid(int p, const std::vector<int>& mbar) {
  double log_m = 0.0;
  for (int m : mbar) log_m += std::log(static_cast<double>(m));
  // only clamp when the grid is small enough for the comparison to matter
  if (log_m < std::log(1e15)) {
    double m = 1.0;
    for (int mm : mbar) m *= static_cast<double>(mm);
    return std::min(p, static_cast<int>(m));
  }
  return p;
}

double rmse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

template <typename Fn>
int run_guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace

void apply_config_file(CliOptions& opts, const std::string& path,
                       const std::vector<std::string>& flags) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw std::invalid_argument("invalid JSON config: " + std::string(e.what()));
  }

  const auto set_str = [&](const char* key, std::optional<std::string>& slot) {
    if (cfg.contains(key) && !overridden(flags, key)) slot = cfg.at(key).get<std::string>();
  };
  set_str("data", opts.data);
  set_str("target", opts.target);
  set_str("test_data", opts.test_data);
  set_str("model", opts.model);
  set_str("out", opts.out);
  if (cfg.contains("seed") && !overridden(flags, "seed")) opts.seed = cfg.at("seed").get<std::uint64_t>();
  if (cfg.contains("header") && !overridden(flags, "header")) opts.header = cfg.at("header").get<bool>();
  if (cfg.contains("mode") && !overridden(flags, "mode")) opts.mode = cfg.at("mode").get<std::string>();
  if (cfg.contains("tie_lengthscales") && !overridden(flags, "tie_lengthscales"))
    opts.tie_lengthscales = cfg.at("tie_lengthscales").get<bool>();
  if (cfg.contains("mbar") && !overridden(flags, "mbar")) {
    if (cfg.at("mbar").is_array())
      opts.mbar = cfg.at("mbar").get<std::vector<int>>();
    else
      opts.mbar = {cfg.at("mbar").get<int>()};
  }
  if (cfg.contains("p") && !overridden(flags, "p")) opts.p = cfg.at("p").get<int>();
  if (cfg.contains("iters") && !overridden(flags, "iters")) opts.iters = cfg.at("iters").get<int>();
  if (cfg.contains("burn") && !overridden(flags, "burn")) opts.burn = cfg.at("burn").get<int>();
  if (cfg.contains("thin") && !overridden(flags, "thin")) opts.thin = cfg.at("thin").get<int>();
  if (cfg.contains("step_size") && !overridden(flags, "step_size"))
    opts.step_size = cfg.at("step_size").get<double>();
  if (cfg.contains("n") && !overridden(flags, "n")) opts.n = cfg.at("n").get<int>();
  if (cfg.contains("d") && !overridden(flags, "d")) opts.d = cfg.at("d").get<int>();
  if (cfg.contains("p_sweep") && !overridden(flags, "p_sweep"))
    opts.p_sweep = cfg.at("p_sweep").get<std::vector<int>>();
  if (cfg.contains("tol") && !overridden(flags, "tol")) opts.tol = cfg.at("tol").get<double>();
  if (cfg.contains("study_seeds") && !overridden(flags, "study_seeds"))
    opts.study_seeds = cfg.at("study_seeds").get<int>();
}

int cmd_train(const CliOptions& opts) {
  std::vector<std::string> problems;
  if (!opts.data) problems.push_back("train: --data is required");
  if (!opts.target) problems.push_back("train: --target is required");
  if (!opts.out) problems.push_back("train: --out is required");
  if (opts.mode != "grief1" && opts.mode != "grief2")
    problems.push_back("train: --mode must be grief1 or grief2");
  if (opts.mbar.empty()) problems.push_back("train: --mbar is required");
  for (int m : opts.mbar)
    if (m < 2) problems.push_back("train: mbar entries must be at least 2");
  if (opts.p && *opts.p < 1) problems.push_back("train: p must be positive");
  if (!problems.empty()) return usage_error(problems);

  return run_guarded([&]() {
    const Dataset ds = ingest_csv(*opts.data, *opts.target, opts.header);
    const int n = static_cast<int>(ds.x.rows());
    const int d = static_cast<int>(ds.x.cols());
    if (ds.skipped_rows > 0)
      std::cerr << "note: skipped " << ds.skipped_rows << " rows with missing values\n";
    for (int c : ds.standardizer.constant_cols)
      std::cerr << "warning: feature column " << c << " is constant\n";

    const std::vector<int> mbar = broadcast_mbar(opts.mbar, d);
    int p = opts.p ? *opts.p : (opts.mode == "grief1" ? 1000 : default_p_for(n));
    p = clamp_p_to_grid(p, mbar);

    std::cout << "initializing hyperparameters on " << std::min(n, 1000) << " points\n";
    const InitHypers init = init_hypers(ds.x, ds.y, opts.seed);

    ModelArtifact art;
    art.mode = opts.mode;
    art.n_train = n;
    art.standardizer = ds.standardizer;

    if (opts.mode == "grief2") {
      Type2Config cfg;
      cfg.mbar = mbar;
      cfg.p = p;
      cfg.tie_lengthscales = opts.tie_lengthscales;
      cfg.seed = opts.seed + 1;
      const Type2Result result = optimize_type2(ds.x, ds.y, init, cfg);
      if (result.report.budget_exhausted)
        std::cerr << "note: optimizer budget exhausted, returning best so far\n";
      art.lengthscales = result.lengthscales;
      art.gamma = result.gamma;
      art.sigma2 = result.sigma2;
      std::cout << "optimized lml: " << result.lml << "\n";
    } else {
      art.lengthscales = init.lengthscales;
      art.gamma = init.gamma;
      art.sigma2 = init.sigma2;
    }

    const ProductKernel kern = make_se_ard(art.lengthscales, art.gamma);
    const GridInducing grid = build_grid(ds.x, mbar);
    const KronEig eig = decompose(grid, kern);
    const GriefBasis basis = build_phi(ds.x, grid, kern, eig, p);

    art.grid = grid;
    art.selection = basis.selection;
    art.dims = basis.dims;

    if (opts.mode == "grief1") {
      auto [tf, stats] = orthogonalize(basis.phi, ds.y);
      art.orthogonal = true;
      art.transform = std::move(tf);
      art.stats = std::move(stats);
      art.w = Eigen::VectorXd::Ones(art.stats.effective_p);
    } else {
      art.orthogonal = false;
      art.stats = precompute(basis.phi, ds.y);
      art.w = Eigen::VectorXd::Ones(p);
    }

    save_model(*opts.out, art);
    std::cout << "model written to " << *opts.out << " (d=" << d << ", p=" << p
              << ", log10 grid size=" << grid.log_num_points() / std::log(10.0) << ")\n";

    if (opts.test_data) {
      const RawData test = ingest_csv_raw(*opts.test_data, *opts.target, opts.header);
      const Eigen::MatrixXd xt = art.standardizer.apply_x(test.x);
      ModelState state;
      state.w = art.w;
      state.sigma2 = art.sigma2;
      const Transform* tf = art.transform ? &*art.transform : nullptr;
      const auto [mean_std, var_std] = predict(basis, art.stats, state, ds.y, xt, tf);
      std::cout << "test rmse: " << rmse(art.standardizer.invert_y(mean_std), test.y) << "\n";
    }
    return kExitOk;
  });
}

int cmd_sample(const CliOptions& opts) {
  std::vector<std::string> problems;
  if (!opts.model) problems.push_back("sample: --model is required");
  if (!opts.out) problems.push_back("sample: --out is required");
  if (opts.iters <= 0) problems.push_back("sample: iters must be positive");
  if (opts.burn < 0 || opts.burn >= opts.iters)
    problems.push_back("sample: burn must be non-negative and below iters");
  if (opts.thin < 1) problems.push_back("sample: thin must be at least 1");
  if (opts.step_size <= 0.0) problems.push_back("sample: step_size must be positive");
  if (!problems.empty()) return usage_error(problems);

  return run_guarded([&]() {
    ModelArtifact art = load_model(*opts.model);
    if (!art.orthogonal)
      std::cerr << "note: sampling a non-orthogonalized model uses the cubic-cost path\n";

    ChainConfig config;
    config.total_iters = opts.iters;
    config.burn_in = opts.burn;
    config.thin = opts.thin;
    config.step_size = opts.step_size;

    const Prior w_prior = Prior::log_normal(1.0, 100.0);
    const Prior s2_prior = Prior::log_normal(art.sigma2, 0.04);
    const SampleSet samples =
        mala_sample(art.stats, art.n_train, w_prior, s2_prior, config, opts.seed);

    const int p = art.stats.p();
    art.draws.resize(samples.size(), p + 1);
    for (int k = 0; k < samples.size(); ++k) {
      art.draws.row(k).head(p) = samples.w_draws[static_cast<size_t>(k)].transpose();
      art.draws(k, p) = samples.sigma2_draws[static_cast<size_t>(k)];
    }
    save_model(*opts.out, art);
    std::cout << "retained draws: " << samples.size()
              << ", acceptance rate: " << samples.acceptance_rate << "\n";
    std::cout << "model with draws written to " << *opts.out << "\n";
    return kExitOk;
  });
}

int cmd_predict(const CliOptions& opts) {
  std::vector<std::string> problems;
  if (!opts.model) problems.push_back("predict: --model is required");
  if (!opts.data) problems.push_back("predict: --data is required");
  if (!opts.out) problems.push_back("predict: --out is required");
  if (!problems.empty()) return usage_error(problems);

  return run_guarded([&]() {
    const ModelArtifact art = load_model(*opts.model);
    const Eigen::MatrixXd x_raw = read_features_csv(*opts.data, opts.header);
    if (x_raw.cols() != art.standardizer.x_mean.size()) {
      std::ostringstream msg;
      msg << "predict: feature count mismatch: got " << x_raw.cols() << ", expected d="
          << art.standardizer.x_mean.size();
      throw std::invalid_argument(msg.str());
    }
    const Eigen::MatrixXd x = art.standardizer.apply_x(x_raw);
    const GriefBasis basis = art.to_basis();
    const Transform* tf = art.transform ? &*art.transform : nullptr;

    Eigen::VectorXd mean_std, var_std;
    // The stored statistics carry the data contribution; an empty target
    // vector skips the redundant consistency check.
    const Eigen::VectorXd y_surrogate;

    if (art.draws.rows() > 0) {
      SampleSet samples;
      const int p = art.stats.p();
      for (Eigen::Index k = 0; k < art.draws.rows(); ++k) {
        samples.w_draws.push_back(art.draws.row(k).head(p).transpose());
        samples.sigma2_draws.push_back(art.draws(k, p));
      }
      std::tie(mean_std, var_std) = predict_type1(basis, art.stats, samples, y_surrogate, x, tf);
    } else {
      ModelState state;
      state.w = art.w;
      state.sigma2 = art.sigma2;
      std::tie(mean_std, var_std) = predict(basis, art.stats, state, y_surrogate, x, tf);
    }

    write_predictions_csv(*opts.out, art.standardizer.invert_y(mean_std),
                          art.standardizer.invert_y_var(var_std));
    std::cout << "predictions for " << x.rows() << " points written to " << *opts.out << "\n";
    return kExitOk;
  });
}

int cmd_reconstruct(const CliOptions& opts) {
  std::vector<std::string> problems;
  if (!opts.out) problems.push_back("reconstruct: --out is required");
  if (opts.p_sweep.empty() && opts.p && *opts.p < 1)
    problems.push_back("reconstruct: p must be positive");
  if (!problems.empty()) return usage_error(problems);

  return run_guarded([&]() {
    ReconstructConfig config;
    config.seed = opts.seed;
    if (opts.n) config.n_total = *opts.n;
    if (opts.d) config.d = *opts.d;
    if (!opts.mbar.empty()) config.mbar = opts.mbar[0];
    if (!opts.p_sweep.empty()) config.p_sweep = opts.p_sweep;
    if (opts.study_seeds) config.nystrom_seeds = *opts.study_seeds;

    const auto rows = reconstruct_study(config);
    std::ofstream out(*opts.out);
    if (!out) throw std::invalid_argument("cannot open output file: " + *opts.out);
    out.precision(17);
    out << "p,grief_train,grief_joint,nystrom_train,nystrom_joint,eig_train,eig_joint\n";
    for (const auto& r : rows)
      out << r.p << "," << r.grief_train << "," << r.grief_joint << "," << r.nystrom_train << ","
          << r.nystrom_joint << "," << r.eig_train << "," << r.eig_joint << "\n";
    std::cout << "reconstruction table written to " << *opts.out << "\n";
    return kExitOk;
  });
}

int cmd_precondition(const CliOptions& opts) {
  std::vector<std::string> problems;
  if (!opts.out) problems.push_back("precondition: --out is required");
  if (!problems.empty()) return usage_error(problems);

  return run_guarded([&]() {
    PrecondConfig config;
    config.seed = opts.seed;
    if (opts.n) config.n = *opts.n;
    if (opts.d) config.d = *opts.d;
    if (opts.p) config.p = *opts.p;
    if (!opts.mbar.empty()) config.mbar = opts.mbar[0];
    if (opts.tol) config.tol = *opts.tol;
    if (opts.study_seeds) config.seeds = *opts.study_seeds;

    const auto runs = precondition_study(config);
    std::ofstream out(*opts.out);
    if (!out) throw std::invalid_argument("cannot open output file: " + *opts.out);
    out.precision(17);
    out << "seed,method,iteration,relative_residual\n";
    for (const auto& run : runs) {
      for (size_t i = 0; i < run.plain_residuals.size(); ++i)
        out << run.seed << ",plain," << i + 1 << "," << run.plain_residuals[i] << "\n";
      for (size_t i = 0; i < run.precond_residuals.size(); ++i)
        out << run.seed << ",preconditioned," << i + 1 << "," << run.precond_residuals[i] << "\n";
    }
    for (const auto& run : runs)
      std::cout << "seed " << run.seed << ": plain " << run.plain_iters << " iterations, "
                << "preconditioned " << run.precond_iters << " iterations\n";
    std::cout << "residual histories written to " << *opts.out << "\n";
    return kExitOk;
  });
}

}  // namespace grief
