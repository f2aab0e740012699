#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "grief/commands.hpp"
#include "grief/dataset.hpp"
#include "grief/inference.hpp"
#include "grief/model_io.hpp"
#include "grief/study.hpp"
#include "test_helpers.hpp"

using namespace grief;
using namespace grief::testing;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("grief_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A small smooth regression dataset written to CSV.
void write_demo_csv(const std::string& path, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::ofstream out(path);
  out.precision(17);
  out << "x1,x2,y\n";
  for (int i = 0; i < n; ++i) {
    const double a = unif(rng), b = unif(rng);
    out << a << "," << b << "," << std::sin(a) * std::sin(b) + noise(rng) << "\n";
  }
}

}  // namespace

TEST_SUITE_BEGIN("cli_io");

TEST_CASE("ingest_csv standardizes a hand-checked file") {
  TempDir dir;
  const std::string path = dir.file("tiny.csv");
  write_file(path, "a,b,y\n1,10,5\n2,20,6\n3,30,10\n");
  const Dataset ds = ingest_csv(path, "y", true);
  REQUIRE(ds.x.rows() == 3);
  REQUIRE(ds.x.cols() == 2);

  // column a: mean 2, population std sqrt(2/3)
  const double sa = std::sqrt(2.0 / 3.0);
  CHECK(ds.x(0, 0) == doctest::Approx(-1.0 / sa).epsilon(1e-12));
  CHECK(ds.x(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ds.x(2, 0) == doctest::Approx(1.0 / sa).epsilon(1e-12));
  // y: mean 7, population std sqrt(14/3)
  const double sy = std::sqrt(14.0 / 3.0);
  CHECK(ds.y(2) == doctest::Approx(3.0 / sy).epsilon(1e-12));
  CHECK(ds.standardizer.y_mean == doctest::Approx(7.0));
  CHECK(ds.standardizer.y_scale == doctest::Approx(sy));
}

TEST_CASE("ingest_csv standardization round-trips") {
  TempDir dir;
  const std::string path = dir.file("round.csv");
  write_demo_csv(path, 40, 1);
  const Dataset ds = ingest_csv(path, "y", true);
  const Eigen::VectorXd back = ds.standardizer.invert_y(ds.y);
  const RawData raw = ingest_csv_raw(path, "y", true);
  CHECK((back - raw.y).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("ingest_csv constant feature keeps unit scale with a warning entry") {
  TempDir dir;
  const std::string path = dir.file("const.csv");
  write_file(path, "a,b,y\n5,1,2\n5,2,3\n5,3,4\n");
  const Dataset ds = ingest_csv(path, "y", true);
  CHECK(ds.standardizer.x_scale[0] == 1.0);
  REQUIRE(ds.standardizer.constant_cols.size() == 1);
  CHECK(ds.standardizer.constant_cols[0] == 0);
  CHECK((ds.x.col(0).array() == 0.0).all());
}

TEST_CASE("ingest_csv extracts the target by header name") {
  TempDir dir;
  const std::string path = dir.file("named.csv");
  write_file(path, "height,target,width\n1,100,2\n3,200,4\n5,300,6\n");
  const Dataset ds = ingest_csv(path, "target", true);
  const RawData raw = ingest_csv_raw(path, "target", true);
  CHECK(raw.y[1] == 200.0);
  CHECK(raw.x(1, 0) == 3.0);
  CHECK(raw.x(1, 1) == 4.0);
  CHECK(ds.x.cols() == 2);
}

TEST_CASE("ingest_csv without a header takes the target by index") {
  TempDir dir;
  const std::string path = dir.file("plain.csv");
  write_file(path, "1,10,100\n2,20,200\n3,30,300\n");
  const RawData raw = ingest_csv_raw(path, "1", false);
  CHECK(raw.y[1] == 20.0);
  CHECK(raw.x(1, 0) == 2.0);
  CHECK(raw.x(1, 1) == 200.0);
  const Eigen::MatrixXd feats = read_features_csv(path, false);
  CHECK(feats.rows() == 3);
  CHECK(feats.cols() == 3);
}

TEST_CASE("ingest_csv errors name the offending cell") {
  TempDir dir;
  const std::string path = dir.file("bad.csv");
  write_file(path, "a,y\n1,2\n3,oops\n");
  CHECK_THROWS_WITH_AS(ingest_csv(path, "y", true), doctest::Contains("row 2"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(ingest_csv(path, "y", true), doctest::Contains("column 2"),
                       std::invalid_argument);
}

TEST_CASE("ingest_csv rejects a ragged file") {
  TempDir dir;
  const std::string path = dir.file("ragged.csv");
  write_file(path, "a,b,y\n1,2,3\n4,5\n");
  CHECK_THROWS_WITH_AS(ingest_csv(path, "y", true), doctest::Contains("ragged"),
                       std::invalid_argument);
}

TEST_CASE("ingest_csv rejects an empty file and counts missing rows") {
  TempDir dir;
  const std::string empty = dir.file("empty.csv");
  write_file(empty, "");
  CHECK_THROWS_AS(ingest_csv(empty, "y", true), std::invalid_argument);

  const std::string gaps = dir.file("gaps.csv");
  write_file(gaps, "a,y\n1,2\n,3\n4,\n5,6\n");
  const Dataset ds = ingest_csv(gaps, "y", true);
  CHECK(ds.skipped_rows == 2);
  CHECK(ds.x.rows() == 2);
}

TEST_CASE("model artifact round-trips predictions bitwise") {
  std::mt19937_64 rng(2);
  const int n = 14, p = 5;
  const Eigen::MatrixXd x = random_matrix(n, 2, rng, -1.5, 1.5);
  const Eigen::VectorXd y = random_vector(n, rng);
  const GridInducing grid = build_grid(x, {4, 5});
  const ProductKernel kern = make_se_ard(Eigen::VectorXd::Constant(2, 0.8), 1.1);
  const KronEig eig = decompose(grid, kern);
  const GriefBasis basis = build_phi(x, grid, kern, eig, p);

  ModelArtifact art;
  art.mode = "grief2";
  art.n_train = n;
  art.lengthscales = Eigen::VectorXd::Constant(2, 0.8);
  art.gamma = 1.1;
  art.sigma2 = 0.07;
  art.grid = grid;
  art.selection = basis.selection;
  art.dims = basis.dims;
  art.w = random_vector(p, rng, 0.3, 2.0);
  art.stats = precompute(basis.phi, y);
  art.standardizer.x_mean = Eigen::VectorXd::Zero(2);
  art.standardizer.x_scale = Eigen::VectorXd::Ones(2);
  art.draws.resize(0, 0);

  const Eigen::MatrixXd xstar = random_matrix(6, 2, rng, -1.0, 1.0);
  ModelState state;
  state.w = art.w;
  state.sigma2 = art.sigma2;
  const auto [mean_before, var_before] = predict(basis, art.stats, state, y, xstar);

  TempDir dir;
  const std::string path = dir.file("model.bin");
  save_model(path, art);
  const ModelArtifact loaded = load_model(path);
  const GriefBasis basis2 = loaded.to_basis();
  ModelState state2;
  state2.w = loaded.w;
  state2.sigma2 = loaded.sigma2;
  const auto [mean_after, var_after] =
      predict(basis2, loaded.stats, state2, Eigen::VectorXd(), xstar);

  CHECK((mean_before.array() == mean_after.array()).all());
  CHECK((var_before.array() == var_after.array()).all());

  // a second save of the loaded artifact reproduces the file bytes
  const std::string path2 = dir.file("model2.bin");
  save_model(path2, loaded);
  CHECK(read_file(path) == read_file(path2));
}

TEST_CASE("train then predict through the command layer") {
  TempDir dir;
  write_demo_csv(dir.file("train.csv"), 24, 3);
  write_demo_csv(dir.file("test.csv"), 10, 4);

  CliOptions train_opts;
  train_opts.data = dir.file("train.csv");
  train_opts.target = "y";
  train_opts.mode = "grief2";
  train_opts.mbar = {5};
  train_opts.p = 6;
  train_opts.out = dir.file("model.bin");
  train_opts.test_data = dir.file("test.csv");
  train_opts.seed = 9;
  REQUIRE(cmd_train(train_opts) == kExitOk);
  CHECK(fs::exists(dir.file("model.bin")));

  // feature-only CSV for prediction
  std::ofstream feat(dir.file("points.csv"));
  feat << "x1,x2\n0.0,0.0\n1.0,-1.0\n";
  feat.close();

  CliOptions pred_opts;
  pred_opts.model = dir.file("model.bin");
  pred_opts.data = dir.file("points.csv");
  pred_opts.out = dir.file("pred.csv");
  REQUIRE(cmd_predict(pred_opts) == kExitOk);
  const std::string pred = read_file(dir.file("pred.csv"));
  CHECK(pred.find("mean,variance") == 0);

  SUBCASE("feature count mismatch names the expected dimension") {
    std::ofstream bad(dir.file("bad.csv"));
    bad << "x1\n0.5\n";
    bad.close();
    CliOptions bad_opts = pred_opts;
    bad_opts.data = dir.file("bad.csv");
    CHECK(cmd_predict(bad_opts) == kExitUsage);
  }
}

TEST_CASE("identical train invocations produce identical model bytes") {
  TempDir dir;
  write_demo_csv(dir.file("train.csv"), 16, 8);
  CliOptions opts;
  opts.data = dir.file("train.csv");
  opts.target = "y";
  opts.mode = "grief2";
  opts.mbar = {4};
  opts.p = 4;
  opts.seed = 44;
  opts.out = dir.file("a.bin");
  REQUIRE(cmd_train(opts) == kExitOk);
  opts.out = dir.file("b.bin");
  REQUIRE(cmd_train(opts) == kExitOk);
  CHECK(read_file(dir.file("a.bin")) == read_file(dir.file("b.bin")));
}

TEST_CASE("grief1 train, sample, and mixture predict") {
  TempDir dir;
  write_demo_csv(dir.file("train.csv"), 18, 5);

  CliOptions train_opts;
  train_opts.data = dir.file("train.csv");
  train_opts.target = "y";
  train_opts.mode = "grief1";
  train_opts.mbar = {4};
  train_opts.p = 8;
  train_opts.out = dir.file("model.bin");
  train_opts.seed = 10;
  REQUIRE(cmd_train(train_opts) == kExitOk);

  CliOptions sample_opts;
  sample_opts.model = dir.file("model.bin");
  sample_opts.out = dir.file("sampled.bin");
  sample_opts.iters = 400;
  sample_opts.burn = 100;
  sample_opts.thin = 20;
  sample_opts.seed = 11;
  REQUIRE(cmd_sample(sample_opts) == kExitOk);

  const ModelArtifact art = load_model(dir.file("sampled.bin"));
  CHECK(art.draws.rows() == 15);  // (400 - 100) / 20
  CHECK((art.draws.array() > 0.0).all());

  std::ofstream feat(dir.file("points.csv"));
  feat << "x1,x2\n0.2,0.4\n";
  feat.close();
  CliOptions pred_opts;
  pred_opts.model = dir.file("sampled.bin");
  pred_opts.data = dir.file("points.csv");
  pred_opts.out = dir.file("pred.csv");
  REQUIRE(cmd_predict(pred_opts) == kExitOk);
}

TEST_CASE("sample command validates its chain configuration") {
  CliOptions opts;
  opts.model = "whatever.bin";
  opts.out = "out.bin";
  opts.iters = 100;
  opts.burn = 100;  // not below iters
  opts.thin = 0;    // invalid
  CHECK(cmd_sample(opts) == kExitUsage);
}

TEST_CASE("train config validation lists every violation") {
  CliOptions opts;  // everything missing
  opts.mode = "bogus";
  opts.mbar = {1};
  CHECK(cmd_train(opts) == kExitUsage);
}

TEST_CASE("reconstruct command is reproducible and ordered") {
  TempDir dir;
  CliOptions opts;
  opts.out = dir.file("table.csv");
  opts.n = 80;
  opts.d = 2;
  opts.mbar = {5};
  opts.p_sweep = {2, 4, 8};
  opts.study_seeds = 3;
  opts.seed = 12;
  REQUIRE(cmd_reconstruct(opts) == kExitOk);
  const std::string first = read_file(dir.file("table.csv"));

  CliOptions again = opts;
  again.out = dir.file("table2.csv");
  REQUIRE(cmd_reconstruct(again) == kExitOk);
  CHECK(first == read_file(dir.file("table2.csv")));
}

TEST_CASE("reconstruction errors shrink with p and respect the optimum") {
  ReconstructConfig config;
  config.n_total = 80;
  config.d = 2;
  config.mbar = 6;
  config.p_sweep = {2, 4, 8, 16};
  config.nystrom_seeds = 3;
  config.seed = 13;
  const auto rows = reconstruct_study(config);
  REQUIRE(rows.size() == 4);
  for (size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].grief_train <= rows[i - 1].grief_train + 1e-9);
    CHECK(rows[i].grief_joint <= rows[i - 1].grief_joint + 1e-9);
    CHECK(rows[i].nystrom_train <= rows[i - 1].nystrom_train + 1e-9);
    CHECK(rows[i].nystrom_joint <= rows[i - 1].nystrom_joint + 1e-9);
    CHECK(rows[i].eig_train <= rows[i - 1].eig_train + 1e-12);
  }
  for (const auto& row : rows) {
    CHECK(row.grief_train >= row.eig_train - 1e-12);
    CHECK(row.grief_joint >= row.eig_joint - 1e-12);
    CHECK(row.nystrom_train >= row.eig_train - 1e-12);
    CHECK(row.nystrom_joint >= row.eig_joint - 1e-12);
  }
}

TEST_CASE("grid basis covering the data reconstructs it almost exactly") {
  // points drawn from the grid and p equal to the live grid size: the
  // projected gram reproduces the exact covariance
  std::mt19937_64 rng(14);
  Eigen::VectorXd ax = Eigen::VectorXd::LinSpaced(8, -1.0, 1.0);
  GridInducing grid;
  grid.axes = {ax, ax};
  grid.degenerate = {false, false};
  Eigen::MatrixXd x(10, 2);
  std::uniform_int_distribution<int> pick(0, 7);
  for (int i = 0; i < 10; ++i) {
    x(i, 0) = ax[pick(rng)];
    x(i, 1) = ax[pick(rng)];
  }
  const ProductKernel kern = make_se_ard(Eigen::VectorXd::Constant(2, 0.9), 1.0);
  const KronEig eig = decompose(grid, kern);
  const GriefBasis basis = build_phi(x, grid, kern, eig, 64);
  const Eigen::MatrixXd k = gram(kern, x, x);
  CHECK((basis.phi * basis.phi.transpose() - k).norm() / k.norm() <= 1e-6);
}

TEST_CASE("precondition command writes paired histories") {
  TempDir dir;
  CliOptions opts;
  opts.out = dir.file("pc.csv");
  opts.n = 120;
  opts.d = 2;
  opts.p = 24;
  opts.mbar = {6};
  opts.study_seeds = 2;
  opts.tol = 1e-6;
  opts.seed = 15;
  REQUIRE(cmd_precondition(opts) == kExitOk);
  const std::string table = read_file(dir.file("pc.csv"));
  CHECK(table.find("seed,method,iteration,relative_residual") == 0);
  CHECK(table.find("preconditioned") != std::string::npos);
}

TEST_CASE("precondition study beats plain CG and tighter tolerances cost more") {
  PrecondConfig config;
  config.n = 150;
  config.d = 2;
  config.p = 30;
  config.mbar = 8;
  config.seeds = 2;
  config.tol = 1e-8;
  config.seed = 16;
  const auto runs = precondition_study(config);
  REQUIRE(runs.size() == 2);
  for (const auto& run : runs) {
    CHECK(run.plain_converged);
    CHECK(run.precond_converged);
    CHECK(run.precond_iters < run.plain_iters);
  }

  PrecondConfig loose = config;
  loose.tol = 1e-4;
  const auto loose_runs = precondition_study(loose);
  for (size_t i = 0; i < runs.size(); ++i) {
    CHECK(loose_runs[i].plain_iters <= runs[i].plain_iters);
    CHECK(loose_runs[i].precond_iters <= runs[i].precond_iters);
  }
}

TEST_CASE("config file values apply beneath flag overrides") {
  TempDir dir;
  const std::string cfg = dir.file("config.json");
  write_file(cfg, R"({"seed": 77, "mode": "grief1", "p": 12, "mbar": [4, 4]})");
  CliOptions opts;
  opts.mode = "grief2";  // pretend a flag set this
  apply_config_file(opts, cfg, {"mode"});
  CHECK(opts.seed == 77);
  CHECK(opts.mode == "grief2");
  REQUIRE(opts.p.has_value());
  CHECK(*opts.p == 12);
  REQUIRE(opts.mbar.size() == 2);
  CHECK(opts.mbar[0] == 4);
}

TEST_CASE("config file rejects invalid JSON") {
  TempDir dir;
  const std::string cfg = dir.file("broken.json");
  write_file(cfg, "{not json");
  CliOptions opts;
  CHECK_THROWS_AS(apply_config_file(opts, cfg, {}), std::invalid_argument);
}

TEST_SUITE_END();
