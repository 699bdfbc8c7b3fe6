#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace scr {

/// Synthetic classification task: features from N(0, S) where S has unit
/// diagonal and symmetric uniform off-diagonal structure, labels from a
/// random ground-truth hyperplane with logistic noise.
struct GaussianSpec {
  int64_t n = 0;
  int64_t d = 0;
  uint64_t seed = 0;
};

/// Immutable design matrix with labels in {-1, +1}. Rows are stored either
/// densely (row-major) or as CSR, chosen at construction by density.
/// Row order is ingestion order; index sets elsewhere refer to it.
class Dataset {
 public:
  static constexpr double kDensifyThreshold = 0.25;

  static Dataset from_dense(int64_t n, int64_t d, std::vector<double> values,
                            std::vector<double> labels);
  static Dataset from_csr(int64_t n, int64_t d, std::vector<int64_t> row_ptr,
                          std::vector<int32_t> col, std::vector<double> val,
                          std::vector<double> labels);

  int64_t num_samples() const { return n_; }
  int64_t dim() const { return d_; }
  bool is_dense() const { return dense_storage_; }
  double label(int64_t i) const { return labels_[i]; }
  const std::vector<double>& labels() const { return labels_; }

  /// <row i, x>, x a dense vector of length dim().
  double row_dot(int64_t i, const double* x) const;
  /// y += alpha * row i.
  void row_axpy(int64_t i, double alpha, double* y) const;
  double row_norm_sq(int64_t i) const;
  int64_t row_nnz(int64_t i) const;
  /// Dense copy of row i into out[0..d).
  void row_dense(int64_t i, double* out) const;

  bool operator==(const Dataset& other) const = default;

  // Raw storage, for serialization.
  const std::vector<double>& dense_values() const { return dense_; }
  const std::vector<int64_t>& row_ptr() const { return row_ptr_; }
  const std::vector<int32_t>& col_idx() const { return col_; }
  const std::vector<double>& csr_values() const { return val_; }

 private:
  Dataset() = default;

  int64_t n_ = 0;
  int64_t d_ = 0;
  bool dense_storage_ = false;
  std::vector<double> dense_;     // n*d, row-major, when dense
  std::vector<int64_t> row_ptr_;  // n+1, when sparse
  std::vector<int32_t> col_;      // 0-based
  std::vector<double> val_;
  std::vector<double> labels_;
};

/// Parses libsvm text: one "label idx:val idx:val ..." line per sample,
/// 1-based strictly increasing indices. Labels {0,1} are mapped to {-1,+1}.
/// dim_override > 0 fixes the feature dimension; otherwise the maximum
/// index observed is used.
Dataset parse_libsvm(std::istream& in, int64_t dim_override = 0);

/// libsvm writer; doubles are printed round-trip exact.
void write_libsvm(const Dataset& ds, std::ostream& out);

/// Deterministic function of the spec: same (n, d, seed) gives a
/// bit-identical dataset.
Dataset generate_gaussian(const GaussianSpec& spec);

/// Target covariance used by generate_gaussian for the given dimension/seed
/// (unit diagonal). Exposed for the moment-matching tests. Row-major d*d.
std::vector<double> gaussian_target_covariance(const GaussianSpec& spec);

/// Format by extension: ".libsvm"/".txt" text, anything else the binary
/// cache format (magic "SCRD", version, little-endian counts, CSR arrays).
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace scr
