#include "grief/model_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <json.hpp>
#include <vector>

namespace grief {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'G', 'R', 'I', 'E', 'F', 'M', 'D', 'L'};

void put_u64_le(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64_le(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void put_f64_le(std::ostream& out, double x) { put_u64_le(out, std::bit_cast<std::uint64_t>(x)); }

double get_f64_le(std::istream& in) { return std::bit_cast<double>(get_u64_le(in)); }

class ArrayWriter {
 public:
  explicit ArrayWriter(json& header) : header_(header) { header_["arrays"] = json::array(); }

  void add(const std::string& name, const double* data, Eigen::Index rows, Eigen::Index cols) {
    header_["arrays"].push_back({{"name", name}, {"rows", rows}, {"cols", cols}});
    payload_.emplace_back(data, data + rows * cols);
  }

  void add(const std::string& name, const Eigen::MatrixXd& m) { add(name, m.data(), m.rows(), m.cols()); }
  void add(const std::string& name, const Eigen::VectorXd& v) { add(name, v.data(), v.size(), 1); }
  void add(const std::string& name, const Eigen::VectorXi& v) {
    std::vector<double> tmp(v.data(), v.data() + v.size());
    header_["arrays"].push_back({{"name", name}, {"rows", v.size()}, {"cols", 1}});
    payload_.push_back(std::move(tmp));
  }
  void add(const std::string& name, const Eigen::MatrixXi& m) {
    std::vector<double> tmp(m.data(), m.data() + m.size());
    header_["arrays"].push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
    payload_.push_back(std::move(tmp));
  }

  void write_payload(std::ostream& out) const {
    for (const auto& a : payload_)
      for (double x : a) put_f64_le(out, x);
  }

 private:
  json& header_;
  std::vector<std::vector<double>> payload_;
};

class ArrayReader {
 public:
  ArrayReader(const json& header, std::istream& in) {
    for (const auto& a : header.at("arrays")) {
      const Eigen::Index rows = a.at("rows").get<Eigen::Index>();
      const Eigen::Index cols = a.at("cols").get<Eigen::Index>();
      Eigen::MatrixXd m(rows, cols);
      for (Eigen::Index i = 0; i < rows * cols; ++i) m.data()[i] = get_f64_le(in);
      arrays_[a.at("name").get<std::string>()] = std::move(m);
    }
    if (!in) throw std::invalid_argument("model file truncated");
  }

  const Eigen::MatrixXd& matrix(const std::string& name) const {
    const auto it = arrays_.find(name);
    if (it == arrays_.end()) throw std::invalid_argument("model file missing array: " + name);
    return it->second;
  }
  Eigen::VectorXd vector(const std::string& name) const { return matrix(name).col(0); }
  Eigen::VectorXi int_vector(const std::string& name) const {
    return matrix(name).col(0).cast<int>();
  }
  Eigen::MatrixXi int_matrix(const std::string& name) const { return matrix(name).cast<int>(); }

 private:
  std::map<std::string, Eigen::MatrixXd> arrays_;
};

}  // namespace

GriefBasis ModelArtifact::to_basis() const {
  GriefBasis basis;
  basis.grid = grid;
  basis.kernel = make_se_ard(lengthscales, gamma);
  basis.selection = selection;
  basis.dims = dims;
  basis.phi.resize(0, selection.count());
  return basis;
}

void save_model(const std::string& path, const ModelArtifact& artifact) {
  json header;
  header["format_version"] = artifact.format_version;
  header["mode"] = artifact.mode;
  header["n_train"] = artifact.n_train;
  header["gamma"] = artifact.gamma;
  header["sigma2"] = artifact.sigma2;
  header["d"] = artifact.grid.dims();
  header["p"] = artifact.selection.count();
  header["orthogonal"] = artifact.orthogonal;
  header["yty"] = artifact.stats.yty;
  header["effective_p"] = artifact.stats.effective_p;
  header["y_mean"] = artifact.standardizer.y_mean;
  header["y_scale"] = artifact.standardizer.y_scale;
  header["y_constant"] = artifact.standardizer.y_constant;
  header["constant_cols"] = artifact.standardizer.constant_cols;
  {
    std::vector<bool> degenerate = artifact.grid.degenerate;
    header["degenerate_axes"] = degenerate;
  }

  ArrayWriter writer(header);
  writer.add("lengthscales", artifact.lengthscales);
  for (int i = 0; i < artifact.grid.dims(); ++i)
    writer.add("axis_" + std::to_string(i), artifact.grid.axes[static_cast<size_t>(i)]);
  writer.add("index_table", artifact.selection.index_table);
  writer.add("log_values", artifact.selection.log_values);
  for (int i = 0; i < artifact.grid.dims(); ++i) {
    const auto& db = artifact.dims[static_cast<size_t>(i)];
    writer.add("ref_cols_" + std::to_string(i), db.ref_cols);
    writer.add("q_cols_" + std::to_string(i), db.q_cols);
    writer.add("col_of_row_" + std::to_string(i), db.col_of_row);
  }
  writer.add("w", artifact.w);
  writer.add("r", artifact.stats.r);
  writer.add("a", artifact.stats.a);
  if (artifact.transform) {
    writer.add("transform_v", artifact.transform->v);
    writer.add("transform_sigma", artifact.transform->sigma);
  }
  writer.add("x_mean", artifact.standardizer.x_mean);
  writer.add("x_scale", artifact.standardizer.x_scale);
  writer.add("draws", artifact.draws);

  const std::string header_str = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open model file for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  put_u64_le(out, header_str.size());
  out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
  writer.write_payload(out);
  if (!out) throw std::invalid_argument("failed writing model file: " + path);
}

ModelArtifact load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open model file: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::invalid_argument("not a model file: " + path);
  const std::uint64_t header_len = get_u64_le(in);
  std::string header_str(header_len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(header_len));
  const json header = json::parse(header_str);

  ModelArtifact art;
  art.format_version = header.at("format_version").get<int>();
  if (art.format_version != 1)
    throw std::invalid_argument("unsupported model format version " +
                                std::to_string(art.format_version));
  art.mode = header.at("mode").get<std::string>();
  art.n_train = header.at("n_train").get<int>();
  art.gamma = header.at("gamma").get<double>();
  art.sigma2 = header.at("sigma2").get<double>();
  art.orthogonal = header.at("orthogonal").get<bool>();

  const ArrayReader reader(header, in);
  const int d = header.at("d").get<int>();
  art.lengthscales = reader.vector("lengthscales");
  art.grid.axes.resize(static_cast<size_t>(d));
  const auto degenerate = header.at("degenerate_axes").get<std::vector<bool>>();
  art.grid.degenerate = degenerate;
  for (int i = 0; i < d; ++i)
    art.grid.axes[static_cast<size_t>(i)] = reader.vector("axis_" + std::to_string(i));
  art.selection.index_table = reader.int_matrix("index_table");
  art.selection.log_values = reader.vector("log_values");
  art.dims.resize(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) {
    DimBasis db;
    db.ref_cols = reader.int_vector("ref_cols_" + std::to_string(i));
    db.q_cols = reader.matrix("q_cols_" + std::to_string(i));
    db.col_of_row = reader.int_vector("col_of_row_" + std::to_string(i));
    art.dims[static_cast<size_t>(i)] = std::move(db);
  }
  art.w = reader.vector("w");
  art.stats.yty = header.at("yty").get<double>();
  art.stats.r = reader.vector("r");
  art.stats.a = reader.matrix("a");
  art.stats.orthogonal = art.orthogonal;
  art.stats.effective_p = header.at("effective_p").get<int>();
  if (art.orthogonal) {
    Transform tf;
    tf.v = reader.matrix("transform_v");
    tf.sigma = reader.vector("transform_sigma");
    art.transform = std::move(tf);
  }
  art.standardizer.x_mean = reader.vector("x_mean");
  art.standardizer.x_scale = reader.vector("x_scale");
  art.standardizer.y_mean = header.at("y_mean").get<double>();
  art.standardizer.y_scale = header.at("y_scale").get<double>();
  art.standardizer.y_constant = header.at("y_constant").get<bool>();
  art.standardizer.constant_cols = header.at("constant_cols").get<std::vector<int>>();
  art.draws = reader.matrix("draws");
  return art;
}

}  // namespace grief
