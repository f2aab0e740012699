#ifndef GRIEF_TENSOR_ALGEBRA_HPP
#define GRIEF_TENSOR_ALGEBRA_HPP

#include <Eigen/Dense>
#include <vector>

// Structure-exploiting linear algebra over Kronecker and Khatri-Rao
// factorizations. Everything here is a pure function over immutable inputs
// and safe to call concurrently; reductions run in a fixed sequential order
// so results are reproducible bit for bit.

namespace grief {

// Kronecker product matrix held as its square factors. The expanded
// dimension prod_i rows(factor_i) is never materialized.
struct KronMatrix {
  std::vector<Eigen::MatrixXd> factors;

  int num_factors() const { return static_cast<int>(factors.size()); }
  // log of the implied expanded dimension
  double log_dim() const;
  // implied expanded dimension; throws if it does not fit an Eigen::Index
  Eigen::Index dim() const;
};

// Row-partitioned Khatri-Rao matrix: all factors share the row count n,
// the implied shape is n x prod_i cols(factor_i).
struct RowKhatriRao {
  std::vector<Eigen::MatrixXd> factors;

  int num_factors() const { return static_cast<int>(factors.size()); }
  Eigen::Index rows() const { return factors.empty() ? 0 : factors.front().rows(); }
};

// Top-p selection over the Kronecker product of per-dimension eigenvalue
// vectors. Row j of index_table holds the per-dimension indices of the
// j-th largest entry; log_values holds the matching logs, non-increasing.
// Column i of index_table encodes a p x mbar_i selection matrix whose
// row j is the index_table(j,i)-th row of the identity.
struct Selection {
  Eigen::MatrixXi index_table;  // p x d
  Eigen::VectorXd log_values;   // length p, sorted descending

  int count() const { return static_cast<int>(log_values.size()); }
  int dims() const { return static_cast<int>(index_table.cols()); }
};

// Distinct-column counts seen per dimension by the selected products;
// reported for diagnostics since the worst-case cost bound depends on them.
struct KrSelectDiag {
  std::vector<int> distinct_cols;
};

// Running sum held as an unevaluated double pair (~106 significant bits).
// Sums of mathematically equal addends compare exactly equal, which keeps
// value ties well defined when ranking accumulated logs.
struct CompensatedSum {
  double hi = 0.0;
  double lo = 0.0;

  CompensatedSum add(double x) const;
  bool operator<(const CompensatedSum& other) const;
  bool operator==(const CompensatedSum& other) const;
};

// Accumulates a Hadamard product of matrices in sign/log form so that long
// products neither overflow nor underflow. A zero factor entry pins the
// output entry to exactly zero and the log is skipped for it.
class HadamardLogAccumulator {
 public:
  HadamardLogAccumulator(Eigen::Index rows, Eigen::Index cols);

  void multiply(const Eigen::MatrixXd& factor);

  // result = sign .* exp(log_sum + ones * log_scale^T); throws NumericalError
  // naming the first non-finite entry.
  Eigen::MatrixXd finish(const Eigen::VectorXd& log_scale) const;

 private:
  Eigen::MatrixXd sign_;
  Eigen::MatrixXd log_sum_;
};

// (kron_i K_i) * v without expanding the product.
Eigen::VectorXd kron_matvec(const KronMatrix& k, const Eigen::VectorXd& v);

// KR * Q * S^T as the Hadamard product of the d per-dimension products
// KR_i * Q_i * S_i^T. Only the distinct columns of each Q_i referenced by
// the selection are computed.
Eigen::MatrixXd kr_q_select(const RowKhatriRao& kr, const KronMatrix& q,
                            const Selection& s, KrSelectDiag* diag = nullptr);

// Log-domain variant of kr_q_select: the per-dimension factors are combined
// through HadamardLogAccumulator and rescaled columnwise by exp(log_scale).
// Pass log_scale = 0 for the plain product.
Eigen::MatrixXd kr_q_select_log(const RowKhatriRao& kr, const KronMatrix& q,
                                const Selection& s,
                                const Eigen::VectorXd& log_scale,
                                KrSelectDiag* diag = nullptr);

// Finds the p largest entries of kron(eigs_1, ..., eigs_d) by sequential
// truncated expansion, keeping at most p candidates after each factor.
// All entries must be strictly positive. Ties in value are broken toward
// the lexicographically smaller index tuple, making the result deterministic.
Selection top_p_kron_eigs(const std::vector<Eigen::VectorXd>& eigs, int p);

}  // namespace grief

#endif
