#ifndef GRIEF_MODEL_IO_HPP
#define GRIEF_MODEL_IO_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "grief/dataset.hpp"
#include "grief/gp_model.hpp"
#include "grief/grief_basis.hpp"

namespace grief {

// Everything needed to reproduce predictions: kernel hyperparameters, grid
// axes, the eigenvalue selection with the referenced eigenvector columns,
// weights, noise, the training statistics and the standardization. Stored as
// a versioned binary container: a JSON header describing array shapes,
// followed by the arrays as little-endian 64-bit floats, so a save/load
// round trip is bit exact.
struct ModelArtifact {
  int format_version = 1;
  std::string mode;  // "grief1" or "grief2"
  int n_train = 0;

  Eigen::VectorXd lengthscales;
  double gamma = 1.0;
  double sigma2 = 1.0;

  GridInducing grid;
  Selection selection;
  std::vector<DimBasis> dims;

  Eigen::VectorXd w;
  bool orthogonal = false;
  std::optional<Transform> transform;
  SuffStats stats;

  Standardizer standardizer;

  // MCMC draws over (w, sigma2), one row per retained draw; empty until a
  // sampling pass fills it.
  Eigen::MatrixXd draws;

  // Reassembles the basis for prediction; phi is left empty since the
  // training inputs are not stored.
  GriefBasis to_basis() const;
};

void save_model(const std::string& path, const ModelArtifact& artifact);
ModelArtifact load_model(const std::string& path);

}  // namespace grief

#endif
