#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace dcfair {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense tabular dataset with a categorical sensitive attribute.
// Labels are +1/-1, group ids are contiguous 1..G with every id present.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<double> features, int d, std::vector<double> labels,
          std::vector<int> groups,
          std::vector<std::string> feature_names = {});

  int n() const { return static_cast<int>(labels_.size()); }
  int d() const { return d_; }
  int num_groups() const { return num_groups_; }

  const double* row(int i) const { return features_.data() + static_cast<std::size_t>(i) * d_; }
  double label(int i) const { return labels_[i]; }
  int group(int i) const { return groups_[i]; }

  const std::vector<double>& features() const { return features_; }
  const std::vector<double>& labels() const { return labels_; }
  const std::vector<int>& groups() const { return groups_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  Dataset subset(const std::vector<int>& indices) const;

 private:
  std::vector<double> features_;  // row-major n x d
  int d_ = 0;
  std::vector<double> labels_;
  std::vector<int> groups_;
  int num_groups_ = 0;
  std::vector<std::string> feature_names_;
};

// Per-group sorted index lists into the parent dataset. Lists are
// disjoint and cover 0..n-1.
struct GroupPartition {
  std::map<int, std::vector<int>> per_group;
};

GroupPartition partition_by_group(const Dataset& data);

struct SplitSpec {
  double train_frac = 0.6;
  double val_frac = 0.2;
  double test_frac = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SplitResult {
  Dataset train, val, test;
  std::vector<int> train_idx, val_idx, test_idx;
};

// Shuffle-then-cut split. Deterministic for a fixed seed (xoshiro256**
// seeded by splitmix64); cut points are floor(train*n) and
// floor((train+val)*n). Throws DataError if any part loses a group.
SplitResult split(const Dataset& data, const SplitSpec& spec);

// Where the sensitive group comes from when loading libsvm text:
// a 1-based feature column holding integer codes, or a side file with
// one integer per line aligned with the data rows.
using GroupSource = std::variant<int, std::string>;

Dataset load_libsvm(const std::string& path, const GroupSource& group_source);

// Writes libsvm text (17 significant digits, zeros skipped) plus a side
// group file; load_libsvm on the output reproduces the dataset bit-for-bit.
void save_libsvm(const Dataset& data, const std::string& path,
                 const std::string& group_side_path);

struct CsvSchema {
  std::string label_col;
  std::string group_col;
  std::vector<std::string> feature_cols;  // empty = all other columns
};

Dataset load_csv(const std::string& path, const CsvSchema& schema);

}  // namespace dcfair
