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


#include "coreaug/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include "coreaug/errors.hpp"

namespace coreaug {

Dataset::Dataset(Matrix features, std::vector<int> labels,
                 std::size_t num_classes)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      num_classes_(num_classes) {
  if (labels_.size() != features_.rows())
    throw DataError("label count " + std::to_string(labels_.size()) +
                    " does not match row count " +
                    std::to_string(features_.rows()));
  if (num_classes_ == 0) throw DataError("dataset needs at least one class");
  for (double v : features_.data()) {
    if (!(v >= 0.0 && v <= 1.0)) throw DataError("feature outside [0,1]");
  }
  class_index_.assign(num_classes_, {});
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const int y = labels_[i];
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes_)
      throw DataError("label " + std::to_string(y) + " out of range");
    class_index_[static_cast<std::size_t>(y)].push_back(i);
  }
}

Matrix Dataset::one_hot() const {
  Matrix y(size(), num_classes_);
  for (std::size_t i = 0; i < size(); ++i)
    y(i, static_cast<std::size_t>(labels_[i])) = 1.0;
  return y;
}

Vector Dataset::target(std::size_t i) const {
  Vector y(num_classes_, 0.0);
  y[static_cast<std::size_t>(labels_[i])] = 1.0;
  return y;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<int> labels(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) labels[r] = labels_[indices[r]];
  return Dataset(features_.select_rows(indices), std::move(labels), num_classes_);
}

Dataset Dataset::with_labels(std::vector<int> labels) const {
  return Dataset(features_, std::move(labels), num_classes_);
}

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw DataError("could not format number");
  return std::string(buf, end);
}

std::string dataset_csv(const Dataset& data) {
  std::string out;
  for (std::size_t j = 0; j < data.dim(); ++j) {
    out += 'f';
    out += std::to_string(j);
    out += ',';
  }
  out += "label\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.x(i)) {
      out += format_double(v);
      out += ',';
    }
    out += std::to_string(data.label(i));
    out += '\n';
  }
  return out;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << dataset_csv(data);
  if (!f) throw ConfigError("failed writing " + path.string());
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

[[noreturn]] void fail_line(std::size_t line, const std::string& what) {
  throw DataError("line " + std::to_string(line) + ": " + what);
}

}  // namespace

Dataset parse_dataset_csv(const std::string& text,
                          std::optional<std::size_t> num_classes) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  bool have_header = false;
  std::vector<double> values;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (!have_header) {
      if (fields.size() < 2 || fields.back() != "label")
        fail_line(line_no, "header must be f0,...,f{d-1},label");
      for (std::size_t j = 0; j + 1 < fields.size(); ++j) {
        if (fields[j] != "f" + std::to_string(j))
          fail_line(line_no, "unexpected header column '" +
                                 std::string(fields[j]) + "'");
      }
      dim = fields.size() - 1;
      have_header = true;
      continue;
    }
    if (fields.size() != dim + 1)
      fail_line(line_no, "expected " + std::to_string(dim + 1) +
                             " columns, found " + std::to_string(fields.size()));
    for (std::size_t j = 0; j < dim; ++j) {
      double v = 0.0;
      const auto f = fields[j];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size() || f.empty())
        fail_line(line_no, "non-numeric feature '" + std::string(f) + "'");
      if (!(v >= 0.0 && v <= 1.0))
        fail_line(line_no, "feature " + std::string(f) + " outside [0,1]");
      values.push_back(v);
    }
    int y = 0;
    const auto f = fields[dim];
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), y);
    if (ec != std::errc() || ptr != f.data() + f.size() || f.empty())
      fail_line(line_no, "non-integer label '" + std::string(f) + "'");
    if (y < 0 || (num_classes && static_cast<std::size_t>(y) >= *num_classes))
      fail_line(line_no, "label " + std::to_string(y) + " out of range");
    labels.push_back(y);
  }
  if (!have_header || labels.empty()) throw DataError("no data rows");
  std::size_t classes = num_classes.value_or(0);
  if (!num_classes) {
    classes = static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
  }
  const std::size_t n = labels.size();
  return Dataset(Matrix(n, dim, std::move(values)), std::move(labels), classes);
}

Dataset load_dataset(const std::filesystem::path& path,
                     std::optional<std::size_t> num_classes) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_dataset_csv(buf.str(), num_classes);
}

}  // namespace coreaug
