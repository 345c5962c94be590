#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "proelm/types.hpp"

namespace proelm {

// A parsed multi-label dataset: real features plus bipolar (+1/-1) targets.
// Empty label sets are permitted.
struct Dataset {
  MatrixXd features;  // N x n
  MatrixXd targets;   // N x m, entries in {-1, +1}
  std::vector<std::string> label_names;
  std::vector<std::string> feature_names;  // may be empty

  Index sample_count() const { return features.rows(); }
  Index feature_count() const { return features.cols(); }
  Index label_count() const { return targets.cols(); }
};

// Which columns of a file hold labels: either the trailing k columns or an
// explicit list of column names.
struct LabelSelector {
  std::vector<std::string> names;  // used when nonempty
  Index trailing = 0;              // used when names is empty

  static LabelSelector by_trailing(Index k) { return LabelSelector{{}, k}; }
  static LabelSelector by_names(std::vector<std::string> n) {
    return LabelSelector{std::move(n), 0};
  }
};

// CSV: UTF-8, comma separated, first row is the header. Label cells must be
// 0/1 or -1/+1; 0/1 is remapped to -1/+1.
Dataset parse_csv(const std::filesystem::path& path, const LabelSelector& labels);
void write_csv(const std::filesystem::path& path, const Dataset& ds);

// ARFF: @relation/@attribute/@data with dense or sparse ({index value, ...})
// bodies. Attributes must be numeric or {0,1} nominal; label_names selects
// which declared attributes are labels (in registry order).
Dataset parse_arff(const std::filesystem::path& path,
                   const std::vector<std::string>& label_names);

// Declared attribute names, in declaration order. Lets callers resolve a
// "trailing k labels" selection against an ARFF file.
std::vector<std::string> arff_attribute_names(const std::filesystem::path& path);

// Seeded fixture generator: thresholded random linear scores, so the data is
// roughly linearly separable and the mean positives per sample lands on
// lc_target by construction.
Dataset generate_synthetic(Index samples, Index features, Index labels,
                           double lc_target, Seed seed);

}  // namespace proelm
