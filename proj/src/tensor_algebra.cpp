#include "grief/tensor_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "grief/errors.hpp"

namespace grief {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Gathers, for one dimension, the n x p matrix B_i = KR_i * Q_i * S_i^T.
// Distinct referenced columns of Q_i are computed once and scattered to the
// selected positions afterwards.
Eigen::MatrixXd selected_product(const Eigen::MatrixXd& kr_factor,
                                 const Eigen::MatrixXd& q_factor,
                                 const Eigen::Ref<const Eigen::VectorXi>& sel,
                                 int* distinct_out) {
  const Eigen::Index mbar = q_factor.cols();
  std::vector<int> distinct;
  std::vector<int> local(static_cast<size_t>(mbar), -1);
  Eigen::VectorXi col_of_row(sel.size());
  for (Eigen::Index j = 0; j < sel.size(); ++j) {
    const int idx = sel[j];
    require(idx >= 0 && idx < mbar, "kr_q_select: selection index out of range");
    if (local[idx] < 0) {
      local[idx] = static_cast<int>(distinct.size());
      distinct.push_back(idx);
    }
    col_of_row[j] = local[idx];
  }
  if (distinct_out) *distinct_out = static_cast<int>(distinct.size());

  Eigen::MatrixXd q_cols(q_factor.rows(), static_cast<Eigen::Index>(distinct.size()));
  for (size_t c = 0; c < distinct.size(); ++c) q_cols.col(c) = q_factor.col(distinct[c]);

  const Eigen::MatrixXd g = kr_factor * q_cols;  // n x c
  Eigen::MatrixXd b(kr_factor.rows(), sel.size());
  for (Eigen::Index j = 0; j < sel.size(); ++j) b.col(j) = g.col(col_of_row[j]);
  return b;
}

void check_kr_q_select_args(const RowKhatriRao& kr, const KronMatrix& q, const Selection& s) {
  require(!kr.factors.empty(), "kr_q_select: no factors");
  require(kr.factors.size() == q.factors.size(), "kr_q_select: factor count mismatch");
  require(s.index_table.cols() == static_cast<Eigen::Index>(kr.factors.size()),
          "kr_q_select: selection dimension mismatch");
  require(s.index_table.rows() == s.log_values.size(), "kr_q_select: selection shape mismatch");
  const Eigen::Index n = kr.rows();
  for (size_t i = 0; i < kr.factors.size(); ++i) {
    require(kr.factors[i].rows() == n, "kr_q_select: Khatri-Rao row count mismatch");
    require(q.factors[i].rows() == q.factors[i].cols(), "kr_q_select: Kronecker factor not square");
    require(kr.factors[i].cols() == q.factors[i].rows(),
            "kr_q_select: factor inner dimension mismatch");
  }
}

}  // namespace

double KronMatrix::log_dim() const {
  double s = 0.0;
  for (const auto& f : factors) s += std::log(static_cast<double>(f.rows()));
  return s;
}

Eigen::Index KronMatrix::dim() const {
  Eigen::Index m = 1;
  for (const auto& f : factors) {
    if (f.rows() != 0 && m > std::numeric_limits<Eigen::Index>::max() / f.rows())
      throw std::overflow_error("KronMatrix::dim: expanded dimension overflows");
    m *= f.rows();
  }
  return m;
}

HadamardLogAccumulator::HadamardLogAccumulator(Eigen::Index rows, Eigen::Index cols)
    : sign_(Eigen::MatrixXd::Ones(rows, cols)), log_sum_(Eigen::MatrixXd::Zero(rows, cols)) {}

void HadamardLogAccumulator::multiply(const Eigen::MatrixXd& factor) {
  require(factor.rows() == sign_.rows() && factor.cols() == sign_.cols(),
          "HadamardLogAccumulator: factor shape mismatch");
  for (Eigen::Index c = 0; c < factor.cols(); ++c) {
    for (Eigen::Index r = 0; r < factor.rows(); ++r) {
      const double v = factor(r, c);
      double& s = sign_(r, c);
      if (s == 0.0) continue;
      if (v == 0.0) {
        s = 0.0;
      } else {
        if (v < 0.0) s = -s;
        log_sum_(r, c) += std::log(std::abs(v));
      }
    }
  }
}

Eigen::MatrixXd HadamardLogAccumulator::finish(const Eigen::VectorXd& log_scale) const {
  require(log_scale.size() == sign_.cols(), "HadamardLogAccumulator: log_scale length mismatch");
  Eigen::MatrixXd out(sign_.rows(), sign_.cols());
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      const double s = sign_(r, c);
      const double v = s == 0.0 ? 0.0 : s * std::exp(log_sum_(r, c) + log_scale[c]);
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "log-domain product: non-finite value at (" << r << ", " << c << ")";
        throw NumericalError(msg.str());
      }
      out(r, c) = v;
    }
  }
  return out;
}

Eigen::VectorXd kron_matvec(const KronMatrix& k, const Eigen::VectorXd& v) {
  require(!k.factors.empty(), "kron_matvec: no factors");
  const Eigen::Index m = k.dim();
  require(v.size() == m, "kron_matvec: vector length mismatch");

  // Repeatedly apply the leading factor to the leading tensor index, then
  // rotate that index to the back; after d steps the original order returns.
  Eigen::VectorXd x = v;
  for (const auto& f : k.factors) {
    require(f.rows() == f.cols(), "kron_matvec: factor not square");
    const Eigen::Index r = f.rows();
    const Eigen::Index cols = x.size() / r;
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> xm(
        x.data(), r, cols);
    Eigen::MatrixXd y = f * xm;  // r x cols; column-major flatten rotates the index
    x = Eigen::Map<Eigen::VectorXd>(y.data(), y.size());
  }
  return x;
}

Eigen::MatrixXd kr_q_select(const RowKhatriRao& kr, const KronMatrix& q, const Selection& s,
                            KrSelectDiag* diag) {
  check_kr_q_select_args(kr, q, s);
  if (diag) diag->distinct_cols.clear();

  Eigen::MatrixXd out = Eigen::MatrixXd::Ones(kr.rows(), s.count());
  for (size_t i = 0; i < kr.factors.size(); ++i) {
    int distinct = 0;
    const Eigen::MatrixXd b = selected_product(kr.factors[i], q.factors[i],
                                               s.index_table.col(static_cast<Eigen::Index>(i)),
                                               &distinct);
    if (diag) diag->distinct_cols.push_back(distinct);
    out.array() *= b.array();
  }
  return out;
}

Eigen::MatrixXd kr_q_select_log(const RowKhatriRao& kr, const KronMatrix& q, const Selection& s,
                                const Eigen::VectorXd& log_scale, KrSelectDiag* diag) {
  check_kr_q_select_args(kr, q, s);
  require(log_scale.size() == s.count(), "kr_q_select_log: log_scale length mismatch");
  if (diag) diag->distinct_cols.clear();

  HadamardLogAccumulator acc(kr.rows(), s.count());
  for (size_t i = 0; i < kr.factors.size(); ++i) {
    int distinct = 0;
    const Eigen::MatrixXd b = selected_product(kr.factors[i], q.factors[i],
                                               s.index_table.col(static_cast<Eigen::Index>(i)),
                                               &distinct);
    if (diag) diag->distinct_cols.push_back(distinct);
    acc.multiply(b);
  }
  return acc.finish(log_scale);
}

CompensatedSum CompensatedSum::add(double x) const {
  // two-sum with renormalization
  const double s = hi + x;
  const double b = s - hi;
  const double err = (hi - (s - b)) + (x - b);
  const double low = lo + err;
  const double h2 = s + low;
  return {h2, low - (h2 - s)};
}

bool CompensatedSum::operator<(const CompensatedSum& other) const {
  return hi != other.hi ? hi < other.hi : lo < other.lo;
}

bool CompensatedSum::operator==(const CompensatedSum& other) const {
  return hi == other.hi && lo == other.lo;
}

Selection top_p_kron_eigs(const std::vector<Eigen::VectorXd>& eigs, int p) {
  require(!eigs.empty(), "top_p_kron_eigs: no eigenvalue vectors");
  require(p >= 1, "top_p_kron_eigs: p must be positive");
  for (const auto& lam : eigs) {
    require(lam.size() > 0, "top_p_kron_eigs: empty eigenvalue vector");
    require((lam.array() > 0.0).all(), "top_p_kron_eigs: non-positive eigenvalue");
  }

  // Log values accumulate in compensated arithmetic: a pair of doubles keeps
  // mathematically equal products bitwise tied across different index routes,
  // so the lexicographic tie-break decides them and truncation decisions
  // stay consistent with the full-expansion sort.
  struct Entry {
    CompensatedSum log_value;
    std::vector<int> idx;
  };
  const auto better = [](const Entry& a, const Entry& b) {
    if (!(a.log_value == b.log_value)) return b.log_value < a.log_value;
    return a.idx < b.idx;  // deterministic tie-break: smaller index tuple wins
  };

  std::vector<Entry> current;
  current.reserve(static_cast<size_t>(eigs[0].size()));
  for (Eigen::Index j = 0; j < eigs[0].size(); ++j)
    current.push_back({CompensatedSum{}.add(std::log(eigs[0][j])), {static_cast<int>(j)}});
  std::sort(current.begin(), current.end(), better);
  if (static_cast<int>(current.size()) > p) current.resize(static_cast<size_t>(p));

  for (size_t i = 1; i < eigs.size(); ++i) {
    const Eigen::VectorXd& lam = eigs[i];
    std::vector<Entry> next;
    next.reserve(current.size() * static_cast<size_t>(lam.size()));
    for (const Entry& e : current) {
      for (Eigen::Index l = 0; l < lam.size(); ++l) {
        Entry cand;
        cand.log_value = e.log_value.add(std::log(lam[l]));
        cand.idx = e.idx;
        cand.idx.push_back(static_cast<int>(l));
        next.push_back(std::move(cand));
      }
    }
    std::sort(next.begin(), next.end(), better);
    if (static_cast<int>(next.size()) > p) next.resize(static_cast<size_t>(p));
    current = std::move(next);
  }

  // The kept count is min(p, prod mbar_i) by construction.
  require(static_cast<int>(current.size()) == p,
          "top_p_kron_eigs: p exceeds the number of Kronecker eigenvalues");

  const int d = static_cast<int>(eigs.size());
  Selection sel;
  sel.index_table.resize(p, d);
  sel.log_values.resize(p);
  for (int j = 0; j < p; ++j) {
    sel.log_values[j] = current[static_cast<size_t>(j)].log_value.hi;
    for (int i = 0; i < d; ++i)
      sel.index_table(j, i) = current[static_cast<size_t>(j)].idx[static_cast<size_t>(i)];
  }
  return sel;
}

}  // namespace grief
