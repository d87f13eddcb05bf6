#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "pntk/common.hpp"

namespace pntk {

// A dataset with unit-norm feature rows. Labels are one column of {-1,+1}
// for binary problems (C == 1) or a one-hot {0,1} matrix for C >= 2.
struct Dataset {
  Matrix features;                // n x d
  Matrix labels;                  // n x C
  std::vector<std::int64_t> ids;  // n record identifiers

  Eigen::Index n() const { return features.rows(); }
  Eigen::Index d() const { return features.cols(); }
  Eigen::Index c() const { return labels.cols(); }
};

struct SplitSpec {
  double prior_fraction = 0.0;  // in [0, 1)
  std::uint64_t seed = 0;
};

// Scale each row to unit Euclidean norm. Rows already within 4 ulps of unit
// norm are left untouched so the operation is bitwise idempotent. A zero-norm
// row is a hard error: the theory assumes ||x|| = 1 throughout.
void normalize_rows(Matrix& x);

// Two Gaussian clusters pushed apart by `margin` along a random unit
// direction, projected to the sphere. Labels are balanced +1/-1.
Dataset synth_two_class(int n, int d, double margin, std::uint64_t seed);

// Multi-class variant: C cluster directions, labels assigned round-robin and
// one-hot encoded. synth_two_class is the C=2 special case with +-1 labels.
Dataset synth_classes(int n, int d, int n_classes, double margin, std::uint64_t seed);

// IDX (big-endian) image/label pair, e.g. the MNIST distribution files.
// Pixels are scaled to [0,1] and rows unit-normalized; labels one-hot over 10
// classes. Errors carry the byte offset of the malformed field.
Dataset load_idx(const std::filesystem::path& image_path,
                 const std::filesystem::path& label_path,
                 std::optional<std::size_t> limit = std::nullopt);

// CSV ingestion: the last `label_cols` columns are labels; a header row is
// auto-detected unless `header` forces it.
Dataset load_csv(const std::filesystem::path& path, int label_cols,
                 std::optional<bool> header = std::nullopt);

void save_csv(const Dataset& ds, const std::filesystem::path& path);

// Deterministic shuffled split: prior gets floor(prior_fraction * n) rows.
// The shuffle is keyed by SplitSpec::seed alone, so splits are independent of
// training seeds.
std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec);

}  // namespace pntk
