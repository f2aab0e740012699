#ifndef GRIEF_DATASET_HPP
#define GRIEF_DATASET_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace grief {

// Invertible per-column standardization. Columns with zero variance keep a
// scale of 1 and are listed in constant_cols.
struct Standardizer {
  Eigen::VectorXd x_mean;
  Eigen::VectorXd x_scale;
  double y_mean = 0.0;
  double y_scale = 1.0;
  std::vector<int> constant_cols;
  bool y_constant = false;

  Eigen::MatrixXd apply_x(const Eigen::MatrixXd& x_raw) const;
  Eigen::VectorXd apply_y(const Eigen::VectorXd& y_raw) const;
  Eigen::VectorXd invert_y(const Eigen::VectorXd& y_std) const;
  Eigen::VectorXd invert_y_var(const Eigen::VectorXd& var_std) const;
};

struct Dataset {
  Eigen::MatrixXd x;  // standardized
  Eigen::VectorXd y;  // standardized
  Standardizer standardizer;
  int skipped_rows = 0;  // rows dropped for missing values
};

// Parses a rectangular numeric CSV, extracts the target column, drops rows
// with missing (empty) cells and standardizes the rest. A non-numeric cell
// is an error naming its row and column.
Dataset ingest_csv(const std::string& path, const std::string& target, bool header);

// Same parsing and row filtering, without standardization.
struct RawData {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  int skipped_rows = 0;
};
RawData ingest_csv_raw(const std::string& path, const std::string& target, bool header);

// Feature-only CSV (no target extraction, no standardization).
Eigen::MatrixXd read_features_csv(const std::string& path, bool header);

void write_predictions_csv(const std::string& path, const Eigen::VectorXd& mean,
                           const Eigen::VectorXd& variance);

}  // namespace grief

#endif
