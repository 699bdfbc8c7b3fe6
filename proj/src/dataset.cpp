#include "scr/dataset.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "scr/common.hpp"
#include "scr/kernels.hpp"
#include "scr/rng.hpp"

namespace scr {

namespace {

constexpr char kMagic[4] = {'S', 'C', 'R', 'D'};
constexpr uint32_t kFormatVersion = 1;

bool is_valid_label(double y) { return y == 1.0 || y == -1.0; }

std::string format_double_exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Substream ids inside generate_gaussian; fixed so the layout of draws is
// part of the format contract (same spec -> bit-identical dataset).
enum : uint64_t { kCovStream = 0, kFeatureStream = 1, kLabelStream = 2 };

Eigen::MatrixXd build_target_covariance(int64_t d, uint64_t seed, double shift) {
  Rng rng = Rng(seed).substream(kCovStream);
  Eigen::MatrixXd a(d, d);
  for (int64_t i = 0; i < d; ++i)
    for (int64_t j = 0; j < d; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
  Eigen::MatrixXd sigma = 0.5 * (a + a.transpose());
  sigma.diagonal().array() += shift;
  // Rescale to unit diagonal; off-diagonal magnitudes stay below 1.
  Eigen::VectorXd dinv = sigma.diagonal().array().sqrt().inverse();
  sigma = dinv.asDiagonal() * sigma * dinv.asDiagonal();
  return sigma;
}

}  // namespace

Dataset Dataset::from_dense(int64_t n, int64_t d, std::vector<double> values,
                            std::vector<double> labels) {
  if (n < 1 || d < 1) throw ContractError("Dataset: n and d must be positive");
  if (static_cast<int64_t>(values.size()) != n * d)
    throw ContractError("Dataset: dense value count != n*d");
  if (static_cast<int64_t>(labels.size()) != n) throw ContractError("Dataset: label count != n");
  for (double y : labels)
    if (!is_valid_label(y)) throw ContractError("Dataset: labels must be -1 or +1");

  int64_t nnz = 0;
  for (double v : values) nnz += (v != 0.0);
  if (static_cast<double>(nnz) < kDensifyThreshold * static_cast<double>(n * d)) {
    std::vector<int64_t> row_ptr(n + 1, 0);
    std::vector<int32_t> col;
    std::vector<double> val;
    col.reserve(nnz);
    val.reserve(nnz);
    for (int64_t i = 0; i < n; ++i) {
      for (int64_t j = 0; j < d; ++j) {
        const double v = values[i * d + j];
        if (v != 0.0) {
          col.push_back(static_cast<int32_t>(j));
          val.push_back(v);
        }
      }
      row_ptr[i + 1] = static_cast<int64_t>(col.size());
    }
    return from_csr(n, d, std::move(row_ptr), std::move(col), std::move(val), std::move(labels));
  }

  Dataset ds;
  ds.n_ = n;
  ds.d_ = d;
  ds.dense_storage_ = true;
  ds.dense_ = std::move(values);
  ds.labels_ = std::move(labels);
  return ds;
}

Dataset Dataset::from_csr(int64_t n, int64_t d, std::vector<int64_t> row_ptr,
                          std::vector<int32_t> col, std::vector<double> val,
                          std::vector<double> labels) {
  if (n < 1 || d < 1) throw ContractError("Dataset: n and d must be positive");
  if (static_cast<int64_t>(row_ptr.size()) != n + 1 || row_ptr.front() != 0 ||
      row_ptr.back() != static_cast<int64_t>(col.size()) || col.size() != val.size())
    throw ContractError("Dataset: inconsistent CSR arrays");
  if (static_cast<int64_t>(labels.size()) != n) throw ContractError("Dataset: label count != n");
  for (double y : labels)
    if (!is_valid_label(y)) throw ContractError("Dataset: labels must be -1 or +1");
  for (int64_t i = 0; i < n; ++i) {
    if (row_ptr[i] > row_ptr[i + 1]) throw ContractError("Dataset: row_ptr not nondecreasing");
    for (int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      if (col[k] < 0 || col[k] >= d) throw ContractError("Dataset: feature index out of range");
      if (k > row_ptr[i] && col[k] <= col[k - 1])
        throw ContractError("Dataset: feature indices not strictly increasing");
    }
  }

  const int64_t nnz = static_cast<int64_t>(val.size());
  if (static_cast<double>(nnz) >= kDensifyThreshold * static_cast<double>(n * d)) {
    std::vector<double> dense(static_cast<size_t>(n * d), 0.0);
    for (int64_t i = 0; i < n; ++i)
      for (int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) dense[i * d + col[k]] = val[k];
    Dataset ds;
    ds.n_ = n;
    ds.d_ = d;
    ds.dense_storage_ = true;
    ds.dense_ = std::move(dense);
    ds.labels_ = std::move(labels);
    return ds;
  }

  Dataset ds;
  ds.n_ = n;
  ds.d_ = d;
  ds.dense_storage_ = false;
  ds.row_ptr_ = std::move(row_ptr);
  ds.col_ = std::move(col);
  ds.val_ = std::move(val);
  ds.labels_ = std::move(labels);
  return ds;
}

double Dataset::row_dot(int64_t i, const double* x) const {
  if (dense_storage_) return kernels::dot(dense_.data() + i * d_, x, d_);
  const int64_t lo = row_ptr_[i];
  return kernels::sparse_dot(col_.data() + lo, val_.data() + lo, row_ptr_[i + 1] - lo, x);
}

void Dataset::row_axpy(int64_t i, double alpha, double* y) const {
  if (dense_storage_) {
    kernels::axpy(alpha, dense_.data() + i * d_, y, d_);
    return;
  }
  const int64_t lo = row_ptr_[i];
  kernels::sparse_axpy(alpha, col_.data() + lo, val_.data() + lo, row_ptr_[i + 1] - lo, y);
}

double Dataset::row_norm_sq(int64_t i) const {
  if (dense_storage_) return kernels::sum_squares(dense_.data() + i * d_, d_);
  const int64_t lo = row_ptr_[i];
  return kernels::sum_squares(val_.data() + lo, row_ptr_[i + 1] - lo);
}

int64_t Dataset::row_nnz(int64_t i) const {
  if (dense_storage_) return d_;
  return row_ptr_[i + 1] - row_ptr_[i];
}

void Dataset::row_dense(int64_t i, double* out) const {
  if (dense_storage_) {
    std::memcpy(out, dense_.data() + i * d_, sizeof(double) * static_cast<size_t>(d_));
    return;
  }
  std::memset(out, 0, sizeof(double) * static_cast<size_t>(d_));
  for (int64_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) out[col_[k]] = val_[k];
}

Dataset parse_libsvm(std::istream& in, int64_t dim_override) {
  std::vector<int64_t> row_ptr{0};
  std::vector<int32_t> col;
  std::vector<double> val;
  std::vector<double> labels;
  int64_t max_index = 0;

  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const char* p = line.c_str();
    while (*p == ' ' || *p == '\t' || *p == '\r') ++p;
    if (*p == '\0' || *p == '#') continue;

    char* end = nullptr;
    const double raw_label = std::strtod(p, &end);
    if (end == p) throw ParseError("expected a label", line_no);
    double y;
    if (raw_label == 1.0)
      y = 1.0;
    else if (raw_label == 0.0 || raw_label == -1.0)
      y = -1.0;
    else
      throw ParseError("unknown label value " + format_double_exact(raw_label), line_no);
    p = end;

    int64_t prev_index = 0;
    for (;;) {
      while (*p == ' ' || *p == '\t') ++p;
      if (*p == '\0' || *p == '\r' || *p == '#') break;
      const long long index = std::strtoll(p, &end, 10);
      if (end == p || *end != ':') throw ParseError("malformed index:value pair", line_no);
      if (index < 1) throw ParseError("feature indices are 1-based", line_no);
      if (index <= prev_index)
        throw ParseError("feature indices must be strictly increasing", line_no);
      p = end + 1;
      const double v = std::strtod(p, &end);
      if (end == p) throw ParseError("malformed feature value", line_no);
      p = end;
      prev_index = index;
      col.push_back(static_cast<int32_t>(index - 1));
      val.push_back(v);
      if (index > max_index) max_index = index;
    }
    labels.push_back(y);
    row_ptr.push_back(static_cast<int64_t>(col.size()));
  }

  if (labels.empty()) throw ParseError("no samples");
  int64_t d = dim_override > 0 ? dim_override : max_index;
  if (d < max_index) throw ParseError("dimension override smaller than max feature index");
  if (d < 1) throw ParseError("no features");
  const int64_t n = static_cast<int64_t>(labels.size());
  return Dataset::from_csr(n, d, std::move(row_ptr), std::move(col), std::move(val),
                           std::move(labels));
}

void write_libsvm(const Dataset& ds, std::ostream& out) {
  const int64_t n = ds.num_samples();
  const int64_t d = ds.dim();
  for (int64_t i = 0; i < n; ++i) {
    out << (ds.label(i) > 0 ? "+1" : "-1");
    if (ds.is_dense()) {
      const double* row = ds.dense_values().data() + i * d;
      for (int64_t j = 0; j < d; ++j)
        out << ' ' << (j + 1) << ':' << format_double_exact(row[j]);
    } else {
      for (int64_t k = ds.row_ptr()[i]; k < ds.row_ptr()[i + 1]; ++k)
        out << ' ' << (ds.col_idx()[k] + 1) << ':' << format_double_exact(ds.csr_values()[k]);
    }
    out << '\n';
  }
}

std::vector<double> gaussian_target_covariance(const GaussianSpec& spec) {
  Eigen::MatrixXd sigma =
      build_target_covariance(spec.d, spec.seed, static_cast<double>(spec.d));
  std::vector<double> out(static_cast<size_t>(spec.d) * spec.d);
  for (int64_t i = 0; i < spec.d; ++i)
    for (int64_t j = 0; j < spec.d; ++j) out[i * spec.d + j] = sigma(i, j);
  return out;
}

Dataset generate_gaussian(const GaussianSpec& spec) {
  if (spec.n < 1 || spec.d < 1) throw ContractError("GaussianSpec: n and d must be positive");
  const int64_t n = spec.n;
  const int64_t d = spec.d;

  double shift = static_cast<double>(d);
  Eigen::MatrixXd sigma;
  Eigen::LLT<Eigen::MatrixXd> llt;
  for (;;) {
    sigma = build_target_covariance(d, spec.seed, shift);
    llt.compute(sigma);
    if (llt.info() == Eigen::Success) break;
    shift *= 2.0;
    std::cerr << "warning: covariance not positive definite, retrying with shift " << shift
              << "\n";
    if (shift > 1e6 * static_cast<double>(d))
      throw SolverError("generate_gaussian: could not build a positive definite covariance");
  }
  const Eigen::MatrixXd chol_lower = llt.matrixL();

  Rng feature_rng = Rng(spec.seed).substream(kFeatureStream);
  std::vector<double> values(static_cast<size_t>(n) * d);
  Eigen::VectorXd z(d), x(d);
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < d; ++j) z[j] = feature_rng.normal();
    x.noalias() = chol_lower * z;
    std::memcpy(values.data() + i * d, x.data(), sizeof(double) * static_cast<size_t>(d));
  }

  Rng label_rng = Rng(spec.seed).substream(kLabelStream);
  Eigen::VectorXd ground_truth(d);
  for (int64_t j = 0; j < d; ++j) ground_truth[j] = label_rng.normal();
  std::vector<double> labels(n);
  for (int64_t i = 0; i < n; ++i) {
    const double margin =
        kernels::dot(values.data() + i * d, ground_truth.data(), d);
    double u = label_rng.uniform();
    if (u <= 0.0) u = 0x1.0p-53;
    const double logistic_noise = std::log(u / (1.0 - u));
    labels[i] = (margin + logistic_noise) > 0.0 ? 1.0 : -1.0;
  }

  return Dataset::from_dense(n, d, std::move(values), std::move(labels));
}

namespace {

template <typename T>
void write_raw(std::ostream& out, const T* ptr, size_t count) {
  out.write(reinterpret_cast<const char*>(ptr), static_cast<std::streamsize>(sizeof(T) * count));
}

template <typename T>
void read_raw(std::istream& in, T* ptr, size_t count) {
  in.read(reinterpret_cast<char*>(ptr), static_cast<std::streamsize>(sizeof(T) * count));
  if (!in) throw IoError("dataset file truncated or corrupt");
}

bool is_text_extension(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return ext == ".libsvm" || ext == ".txt";
}

}  // namespace

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  if (is_text_extension(path)) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_libsvm(ds, out);
    if (!out) throw IoError("write failed: " + path.string());
    return;
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_raw(out, kMagic, 4);
  write_raw(out, &kFormatVersion, 1);
  const uint8_t dense_flag = ds.is_dense() ? 1 : 0;
  write_raw(out, &dense_flag, 1);
  const uint64_t n = static_cast<uint64_t>(ds.num_samples());
  const uint64_t d = static_cast<uint64_t>(ds.dim());
  write_raw(out, &n, 1);
  write_raw(out, &d, 1);
  write_raw(out, ds.labels().data(), ds.labels().size());
  if (ds.is_dense()) {
    write_raw(out, ds.dense_values().data(), ds.dense_values().size());
  } else {
    const uint64_t nnz = static_cast<uint64_t>(ds.csr_values().size());
    write_raw(out, &nnz, 1);
    write_raw(out, ds.row_ptr().data(), ds.row_ptr().size());
    write_raw(out, ds.col_idx().data(), ds.col_idx().size());
    write_raw(out, ds.csr_values().data(), ds.csr_values().size());
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  if (is_text_extension(path)) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return parse_libsvm(in);
  }

  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  read_raw(in, magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw IoError("not a dataset cache file");
  uint32_t version = 0;
  read_raw(in, &version, 1);
  if (version != kFormatVersion)
    throw IoError("unsupported dataset cache version " + std::to_string(version));
  uint8_t dense_flag = 0;
  read_raw(in, &dense_flag, 1);
  uint64_t n = 0, d = 0;
  read_raw(in, &n, 1);
  read_raw(in, &d, 1);
  if (n == 0 || d == 0) throw IoError("dataset cache header corrupt");
  std::vector<double> labels(n);
  read_raw(in, labels.data(), labels.size());
  if (dense_flag) {
    std::vector<double> values(n * d);
    read_raw(in, values.data(), values.size());
    return Dataset::from_dense(static_cast<int64_t>(n), static_cast<int64_t>(d),
                               std::move(values), std::move(labels));
  }
  uint64_t nnz = 0;
  read_raw(in, &nnz, 1);
  std::vector<int64_t> row_ptr(n + 1);
  std::vector<int32_t> col(nnz);
  std::vector<double> val(nnz);
  read_raw(in, row_ptr.data(), row_ptr.size());
  read_raw(in, col.data(), col.size());
  read_raw(in, val.data(), val.size());
  return Dataset::from_csr(static_cast<int64_t>(n), static_cast<int64_t>(d), std::move(row_ptr),
                           std::move(col), std::move(val), std::move(labels));
}

}  // namespace scr
