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


#ifndef COREAUG_HARNESS_HPP_
#define COREAUG_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coreaug/dataset.hpp"
#include "coreaug/trainer.hpp"

namespace coreaug {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "0.1.0";

enum class GeneratorKind { kGaussianBlobs, kTwoMoonsEmbedded, kGridDigits };

std::string to_string(GeneratorKind k);
GeneratorKind parse_generator_kind(const std::string& s);

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::kGaussianBlobs;
  std::size_t n = 600;
  std::size_t d = 10;
  std::size_t num_classes = 3;
  std::uint64_t seed = 0;
  double noise = 0.08;
  double margin = 0.3;  // minimum pairwise distance between blob means

  void validate() const;
};

// Balanced classes (example i has label i mod C); features clamped to [0,1].
Dataset generate_dataset(const GeneratorSpec& spec);
// Class means used by gaussian_blobs, C x d.
Matrix blob_means(const GeneratorSpec& spec);

// Deterministic per-class split; the first part holds round((1 - test_fraction) n_c)
// examples of every class.
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double test_fraction,
                                          std::uint64_t seed);

// Reads a JSON config and checks schema_version.
nlohmann::json load_config(const std::filesystem::path& path);

// Builders from a JSON config; absent keys keep the library defaults.
SelectionConfig selection_from_json(const nlohmann::json& cfg);
TransformSpec transform_from_json(const nlohmann::json& cfg);
TrainConfig train_config_from_json(const nlohmann::json& cfg);
GeneratorSpec generator_from_json(const nlohmann::json& cfg);

struct RunResult {
  std::filesystem::path manifest;
  std::vector<std::filesystem::path> outputs;
};

// Runs one of gen-data, select, train, spectrum, bounds with the given config
// and writes its artifacts plus manifest.json under out.
RunResult run_command(const std::string& command, const nlohmann::json& config,
                      const std::filesystem::path& out);

// Re-runs the manifest's command into scratch and compares every output
// byte-for-byte, ignoring timing fields (JSON keys ending in "_ms" and the
// selection_ms CSV column). Returns one line per mismatch.
std::vector<std::string> verify_manifest(const std::filesystem::path& manifest,
                                         const std::filesystem::path& scratch);

// Human-readable summary of a manifest.
std::string summarize_manifest(const std::filesystem::path& manifest);

}  // namespace coreaug

#endif  // COREAUG_HARNESS_HPP_
