// Copyright 2026 The Coreaug Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COREAUG_DATASET_HPP_
#define COREAUG_DATASET_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coreaug/linalg.hpp"

namespace coreaug {

// Labelled examples with features in [0,1]. The class index partitions the
// example indices by label, each list ascending.
class Dataset {
 public:
  Dataset() = default;
  // Throws DataError when a feature leaves [0,1], a label is out of range, or
  // the label count differs from the row count.
  Dataset(Matrix features, std::vector<int> labels, std::size_t num_classes);

  const Matrix& features() const noexcept { return features_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  std::size_t num_classes() const noexcept { return num_classes_; }
  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t dim() const noexcept { return features_.cols(); }
  const std::vector<std::vector<std::size_t>>& class_index() const noexcept {
    return class_index_;
  }
  std::span<const double> x(std::size_t i) const { return features_.row(i); }
  int label(std::size_t i) const { return labels_[i]; }

  // n x C matrix of one-hot targets.
  Matrix one_hot() const;
  // One-hot target of example i.
  Vector target(std::size_t i) const;
  Dataset subset(std::span<const std::size_t> indices) const;
  Dataset with_labels(std::vector<int> labels) const;

 private:
  Matrix features_;
  std::vector<int> labels_;
  std::size_t num_classes_ = 0;
  std::vector<std::vector<std::size_t>> class_index_;
};

// Header f0,...,f{d-1},label; one example per line; shortest round-trip
// decimal formatting, so writing then loading reproduces the matrix exactly.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);
std::string dataset_csv(const Dataset& data);

// Throws DataError naming the offending line for a malformed row. When
// num_classes is absent it is inferred as max label + 1.
Dataset load_dataset(const std::filesystem::path& path,
                     std::optional<std::size_t> num_classes = std::nullopt);
Dataset parse_dataset_csv(const std::string& text,
                          std::optional<std::size_t> num_classes = std::nullopt);

// Shortest decimal that parses back to the same double.
std::string format_double(double x);

}  // namespace coreaug

#endif  // COREAUG_DATASET_HPP_
