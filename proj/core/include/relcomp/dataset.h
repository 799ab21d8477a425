#ifndef RELCOMP_DATASET_H_
#define RELCOMP_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "relcomp/types.h"

namespace relcomp {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An immutable n x d table of finite features with stable instance ids and
// optional hidden class labels in [0, num_classes).
struct Dataset {
  FeatureMatrix features;
  std::vector<std::string> ids;
  std::optional<std::vector<int>> labels;
  int num_classes = 0;
  // Raw label strings, index = class id.
  std::vector<std::string> class_names;
  std::vector<std::string> feature_names;

  int size() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
  bool has_labels() const { return labels.has_value(); }

  // Throws DatasetError on any invariant violation.
  void Validate() const;
};

struct Split {
  std::vector<int> train_indices;
  std::vector<int> test_indices;
};

struct CsvOptions {
  std::optional<std::string> label_column;
  // Column holding instance ids. When absent from the header, ids are the
  // zero-based row numbers.
  std::string id_column = "id";
};

Dataset LoadCsv(const std::filesystem::path& path, const CsvOptions& options = {});
Dataset ParseCsv(std::string_view text, const CsvOptions& options = {});
void WriteCsv(const Dataset& dataset, const std::filesystem::path& path,
              const std::string& label_column = "class");

struct SyntheticSpec {
  int num_classes = 3;
  int per_class = 40;
  int dim = 6;
  int informative_dims = 2;
  double separation = 4.0;
  std::uint64_t seed = 0;
};

// Gaussian blobs with unit-variance noise on every coordinate. Along
// informative dimension f, class c is centered at
// separation * ((c + f) mod num_classes); the remaining coordinates have the
// same distribution for every class.
Dataset MakeSyntheticGaussians(const SyntheticSpec& spec);

// Deterministic split; stratified per class when labels are present.
Split SplitDataset(const Dataset& dataset, double test_fraction,
                   std::uint64_t seed);

// Rows of `dataset` in the order of `indices`.
Dataset Subset(const Dataset& dataset, std::span<const int> indices);

// Z-score transform fitted on one fold and applied to others. Constant
// features keep unit scale.
class Standardizer {
 public:
  static Standardizer Fit(const FeatureMatrix& features);
  FeatureMatrix Apply(const FeatureMatrix& features) const;
  void ApplyInPlace(Dataset& dataset) const;

  const Eigen::RowVectorXd& mean() const { return mean_; }
  const Eigen::RowVectorXd& scale() const { return scale_; }

 private:
  Eigen::RowVectorXd mean_;
  Eigen::RowVectorXd scale_;
};

struct PreparedData {
  Dataset train;
  Dataset test;  // empty (zero rows) when no split was requested
  Split split;
};

// Splits (test_fraction in (0,1), or 0 for "everything is training data"),
// then optionally standardizes both folds with training-fold statistics.
PreparedData PrepareData(const Dataset& dataset, double test_fraction,
                         std::uint64_t seed, bool standardize);

// FNV-1a over the feature bits; used to detect that a session's dataset
// changed on disk.
std::uint64_t FeatureFingerprint(const FeatureMatrix& features);

}  // namespace relcomp

#endif  // RELCOMP_DATASET_H_
