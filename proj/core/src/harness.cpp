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


#include "coreaug/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "coreaug/bounds.hpp"
#include "coreaug/errors.hpp"
#include "coreaug/parallel.hpp"
#include "coreaug/rng.hpp"
#include "coreaug/spectrum.hpp"

namespace coreaug {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::kGaussianBlobs:
      return "gaussian_blobs";
    case GeneratorKind::kTwoMoonsEmbedded:
      return "two_moons_embedded";
    case GeneratorKind::kGridDigits:
      return "grid_digits";
  }
  return "unknown";
}

GeneratorKind parse_generator_kind(const std::string& s) {
  if (s == "gaussian_blobs") return GeneratorKind::kGaussianBlobs;
  if (s == "two_moons_embedded") return GeneratorKind::kTwoMoonsEmbedded;
  if (s == "grid_digits") return GeneratorKind::kGridDigits;
  throw ConfigError("unknown generator '" + s + "'");
}

void GeneratorSpec::validate() const {
  if (n == 0) throw ConfigError("n must be >= 1");
  if (d == 0) throw ConfigError("d must be >= 1");
  if (num_classes == 0) throw ConfigError("classes must be >= 1");
  if (n < num_classes) throw ConfigError("n must be at least the class count");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw ConfigError("noise must be >= 0");
  if (!(margin >= 0.0) || !std::isfinite(margin)) throw ConfigError("margin must be >= 0");
  if (kind == GeneratorKind::kTwoMoonsEmbedded) {
    if (num_classes != 2) throw ConfigError("two_moons_embedded needs exactly 2 classes");
    if (d < 2) throw ConfigError("two_moons_embedded needs d >= 2");
  }
  if (kind == GeneratorKind::kGridDigits) {
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(d))));
    if (side * side != d) throw ConfigError("grid_digits needs a square d");
  }
}

Matrix blob_means(const GeneratorSpec& spec) {
  spec.validate();
  Rng rng(Stream::kData, {spec.seed, 1});
  Matrix means(spec.num_classes, spec.d);
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      for (double& v : means.row(c)) v = rng.uniform(0.2, 0.8);
      placed = true;
      for (std::size_t o = 0; o < c && placed; ++o) {
        double s = 0.0;
        for (std::size_t j = 0; j < spec.d; ++j) {
          const double diff = means(c, j) - means(o, j);
          s += diff * diff;
        }
        if (std::sqrt(s) < spec.margin) placed = false;
      }
    }
    if (!placed) throw ConfigError("blob margin cannot be met in the available volume");
  }
  return means;
}

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

Dataset generate_dataset(const GeneratorSpec& spec) {
  spec.validate();
  Matrix x(spec.n, spec.d);
  std::vector<int> labels(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) labels[i] = static_cast<int>(i % spec.num_classes);
  switch (spec.kind) {
    case GeneratorKind::kGaussianBlobs: {
      const Matrix means = blob_means(spec);
      for (std::size_t i = 0; i < spec.n; ++i) {
        Rng rng(Stream::kData, {spec.seed, 2, i});
        const auto c = static_cast<std::size_t>(labels[i]);
        for (std::size_t j = 0; j < spec.d; ++j)
          x(i, j) = clamp01(means(c, j) + spec.noise * rng.normal());
      }
      break;
    }
    case GeneratorKind::kTwoMoonsEmbedded: {
      Rng mix(Stream::kData, {spec.seed, 3});
      Matrix a(spec.d, 2);
      for (double& v : a.data()) v = mix.normal() / std::sqrt(static_cast<double>(spec.d));
      for (std::size_t i = 0; i < spec.n; ++i) {
        Rng rng(Stream::kData, {spec.seed, 4, i});
        const double t = std::numbers::pi * rng.uniform();
        double px = std::cos(t);
        double py = std::sin(t);
        if (labels[i] == 1) {
          px = 1.0 - px;
          py = 0.5 - py;
        }
        px += spec.noise * rng.normal() - 0.5;
        py += spec.noise * rng.normal() - 0.25;
        for (std::size_t j = 0; j < spec.d; ++j)
          x(i, j) = clamp01(0.5 + 0.2 * (a(j, 0) * px + a(j, 1) * py));
      }
      break;
    }
    case GeneratorKind::kGridDigits: {
      Matrix proto(spec.num_classes, spec.d);
      for (std::size_t c = 0; c < spec.num_classes; ++c) {
        Rng rng(Stream::kData, {spec.seed, 5, c});
        for (double& v : proto.row(c)) v = rng.uniform() < 0.3 ? 0.9 : 0.1;
      }
      for (std::size_t i = 0; i < spec.n; ++i) {
        Rng rng(Stream::kData, {spec.seed, 6, i});
        const auto c = static_cast<std::size_t>(labels[i]);
        for (std::size_t j = 0; j < spec.d; ++j)
          x(i, j) = clamp01(proto(c, j) + spec.noise * rng.normal());
      }
      break;
    }
  }
  return Dataset(std::move(x), std::move(labels), spec.num_classes);
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double test_fraction,
                                          std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0))
    throw ConfigError("test_fraction must be in [0, 1)");
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  for (std::size_t c = 0; c < data.num_classes(); ++c) {
    std::vector<std::size_t> members = data.class_index()[c];
    Rng rng(Stream::kData, {seed, 0x73706c6974ULL, c});
    rng.shuffle(std::span<std::size_t>(members));
    const auto keep = static_cast<std::size_t>(
        std::llround((1.0 - test_fraction) * static_cast<double>(members.size())));
    train_idx.insert(train_idx.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(keep));
    test_idx.insert(test_idx.end(), members.begin() + static_cast<std::ptrdiff_t>(keep), members.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {data.subset(train_idx), data.subset(test_idx)};
}

json load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
  if (!cfg.contains("schema_version")) throw ConfigError("config lacks schema_version");
  if (cfg["schema_version"] != kSchemaVersion)
    throw ConfigError("unsupported schema_version " + cfg["schema_version"].dump());
  return cfg;
}

namespace {

template <typename T>
T get_or(const json& cfg, const char* key, T fallback) {
  if (!cfg.contains(key) || cfg[key].is_null()) return fallback;
  try {
    return cfg[key].get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

std::vector<std::size_t> hidden_from(const json& cfg, std::vector<std::size_t> fallback) {
  if (!cfg.contains("hidden")) return fallback;
  if (cfg["hidden"].is_number()) return {cfg["hidden"].get<std::size_t>()};
  return get_or<std::vector<std::size_t>>(cfg, "hidden", fallback);
}

}  // namespace

SelectionConfig selection_from_json(const json& cfg) {
  SelectionConfig s;
  s.stop = parse_stop_rule(get_or<std::string>(cfg, "stop", to_string(s.stop)));
  s.xi = get_or(cfg, "xi", s.xi);
  if (cfg.contains("k_per_class")) s.k_per_class = cfg["k_per_class"].get<std::size_t>();
  s.fraction = get_or(cfg, "fraction", s.fraction);
  s.engine = parse_engine(get_or<std::string>(cfg, "engine", to_string(s.engine)));
  s.stochastic_sample = get_or(cfg, "stochastic_sample", s.stochastic_sample);
  s.seed = get_or<std::uint64_t>(cfg, "selection_seed", s.seed);
  if (cfg.contains("c1")) s.c1 = cfg["c1"].get<double>();
  s.objective = parse_objective(get_or<std::string>(cfg, "objective", to_string(s.objective)));
  s.validate();
  return s;
}

TransformSpec transform_from_json(const json& cfg) {
  TransformSpec t;
  t.kind = parse_transform_kind(get_or<std::string>(cfg, "transform", to_string(t.kind)));
  t.epsilon0 = get_or(cfg, "epsilon0", t.epsilon0);
  t.r = get_or(cfg, "r", t.r);
  t.seed = get_or<std::uint64_t>(cfg, "augment_seed", get_or<std::uint64_t>(cfg, "seed", 0));
  t.validate();
  return t;
}

TrainConfig train_config_from_json(const json& cfg) {
  TrainConfig t;
  t.regime = parse_regime(get_or<std::string>(cfg, "regime", to_string(t.regime)));
  t.selection = selection_from_json(cfg);
  t.transform = transform_from_json(cfg);
  t.refresh_r = get_or(cfg, "refresh_r", t.refresh_r);
  t.epochs = get_or(cfg, "epochs", t.epochs);
  t.lr.initial = get_or(cfg, "lr", t.lr.initial);
  t.lr.decay_epochs = get_or(cfg, "lr_decay_epochs", t.lr.decay_epochs);
  t.lr.factor = get_or(cfg, "lr_decay_factor", t.lr.factor);
  t.batch_size = get_or(cfg, "batch_size", t.batch_size);
  t.seed = get_or<std::uint64_t>(cfg, "seed", t.seed);
  t.label_noise_frac = get_or(cfg, "label_noise", t.label_noise_frac);
  t.baseline = parse_baseline(get_or<std::string>(cfg, "baseline", to_string(t.baseline)));
  t.hidden = hidden_from(cfg, t.hidden);
  t.activation = parse_activation(get_or<std::string>(cfg, "activation", to_string(t.activation)));
  t.augment = get_or(cfg, "augment", t.augment);
  t.random_fraction = get_or(cfg, "random_fraction", t.random_fraction);
  t.proxy_mode = parse_proxy_mode(get_or<std::string>(cfg, "proxy_mode", to_string(t.proxy_mode)));
  t.validate();
  return t;
}

GeneratorSpec generator_from_json(const json& cfg) {
  GeneratorSpec g;
  g.kind = parse_generator_kind(get_or<std::string>(cfg, "kind", to_string(g.kind)));
  g.n = get_or(cfg, "n", g.n);
  g.d = get_or(cfg, "d", g.d);
  g.num_classes = get_or(cfg, "classes", g.num_classes);
  g.seed = get_or<std::uint64_t>(cfg, "seed", g.seed);
  g.noise = get_or(cfg, "noise", g.noise);
  g.margin = get_or(cfg, "margin", g.margin);
  g.validate();
  return g;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + p.string());
  out << text;
  if (!out) throw ConfigError("failed writing " + p.string());
}

std::string fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

// Output collection shared by all commands.
struct Run {
  fs::path out;
  std::vector<std::string> outputs;
  json inputs = json::array();
  json timings = json::object();

  void emit(const std::string& name, const std::string& text) {
    write_file(out / name, text);
    outputs.push_back(name);
  }
  void emit_json(const std::string& name, const json& j) { emit(name, j.dump(2) + "\n"); }
};

struct Inputs {
  Dataset train;
  Dataset test;
};

Dataset load_primary(const json& cfg, Run& run) {
  std::optional<std::size_t> classes;
  if (cfg.contains("classes")) classes = cfg["classes"].get<std::size_t>();
  if (cfg.contains("data")) {
    const fs::path p = cfg["data"].get<std::string>();
    const std::string bytes = read_file(p);
    run.inputs.push_back({{"path", p.string()}, {"bytes", bytes.size()}, {"fnv1a", fnv1a(bytes)}});
    return parse_dataset_csv(bytes, classes);
  }
  const json gen = cfg.contains("generator") ? cfg["generator"] : json::object();
  run.inputs.push_back({{"generator", gen}});
  return generate_dataset(generator_from_json(gen));
}

Inputs load_inputs(const json& cfg, Run& run) {
  Dataset data = load_primary(cfg, run);
  if (cfg.contains("test_data")) {
    const fs::path p = cfg["test_data"].get<std::string>();
    const std::string bytes = read_file(p);
    run.inputs.push_back({{"path", p.string()}, {"bytes", bytes.size()}, {"fnv1a", fnv1a(bytes)}});
    return {std::move(data), parse_dataset_csv(bytes, data.num_classes())};
  }
  const double frac = get_or(cfg, "test_fraction", 0.3);
  if (frac == 0.0) return {data, Dataset(Matrix(0, data.dim()), {}, data.num_classes())};
  auto [tr, te] = split_dataset(data, frac, get_or<std::uint64_t>(cfg, "split_seed", 0));
  return {std::move(tr), std::move(te)};
}

Mlp make_net(const json& cfg, std::size_t d, std::size_t num_classes, std::uint64_t seed,
             std::vector<std::size_t> hidden_default) {
  std::vector<std::size_t> sizes{d};
  const auto hidden = hidden_from(cfg, hidden_default);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(num_classes);
  return Mlp::random(sizes, parse_activation(get_or<std::string>(cfg, "activation", "tanh")), seed);
}

void run_gen_data(const json& cfg, Run& run) {
  const GeneratorSpec spec = generator_from_json(cfg);
  const auto t0 = Clock::now();
  const Dataset data = generate_dataset(spec);
  run.timings["generation_ms"] = ms_since(t0);
  run.emit("dataset.csv", dataset_csv(data));
  if (spec.kind == GeneratorKind::kGaussianBlobs) {
    const Matrix means = blob_means(spec);
    json rows = json::array();
    for (std::size_t c = 0; c < means.rows(); ++c)
      rows.push_back(std::vector<double>(means.row(c).begin(), means.row(c).end()));
    run.emit_json("blob_means.json", {{"margin", spec.margin}, {"means", rows}});
  }
}

void run_select(const json& cfg, Run& run) {
  const Dataset data = load_primary(cfg, run);
  const std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", 0);
  Mlp net = make_net(cfg, data.dim(), data.num_classes(), seed, {32});
  const std::size_t pre = get_or<std::size_t>(cfg, "pretrain_epochs", 0);
  auto t0 = Clock::now();
  if (pre > 0) {
    const double lr = get_or(cfg, "lr", 0.05);
    const std::size_t bs = get_or<std::size_t>(cfg, "batch_size", 32);
    for (std::size_t e = 0; e < pre; ++e)
      for (const auto& b : epoch_batches(data.size(), bs, seed, e)) {
        const Matrix xb = data.features().select_rows(b);
        std::vector<int> yb;
        for (std::size_t i : b) yb.push_back(data.label(i));
        weighted_gradient_step(net, xb, yb, Vector(b.size(), 1.0), lr);
      }
  }
  run.timings["training_ms"] = ms_since(t0);
  const SelectionConfig sel = selection_from_json(cfg);
  const ProxyMode mode = parse_proxy_mode(get_or<std::string>(cfg, "proxy_mode", "last_layer"));
  t0 = Clock::now();
  const WeightedCoreset core =
      select_all_classes(gradient_proxy(net, data, mode), sel, get_or<std::size_t>(cfg, "r", 1));
  run.timings["selection_ms"] = ms_since(t0);
  json j = to_json(core);
  j["g_frobenius_total"] = core.g_frobenius;
  run.emit_json("coreset.json", j);
}

double mean_of(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_of(const Vector& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::vector<std::uint64_t> seeds_of(const json& cfg) {
  if (cfg.contains("seeds")) return cfg["seeds"].get<std::vector<std::uint64_t>>();
  return {get_or<std::uint64_t>(cfg, "seed", 0)};
}

void run_train(const json& cfg, Run& run) {
  const Inputs in = load_inputs(cfg, run);
  const auto seeds = seeds_of(cfg);
  std::vector<TrainConfig> configs;
  for (std::uint64_t s : seeds) {
    json c = cfg;
    c["seed"] = s;
    configs.push_back(train_config_from_json(c));
  }
  std::vector<TrainRecord> recs(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) { recs[i] = train(configs[i], in.train, in.test); });
  Vector acc;
  Vector test_loss;
  Vector train_loss;
  double sel_ms = 0.0;
  double aug_ms = 0.0;
  double tr_ms = 0.0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto& r = recs[i];
    const std::string stem = "train_seed" + std::to_string(seeds[i]);
    run.emit(stem + ".csv", train_record_csv(r));
    const auto& last = r.rows.back();
    acc.push_back(last.test_accuracy);
    test_loss.push_back(last.test_loss);
    train_loss.push_back(last.train_loss);
    double noisy = 0.0;
    for (const auto& s : r.selections) noisy += noisy_selection_audit(s.indices, r.noisy_mask);
    if (!r.selections.empty()) noisy /= static_cast<double>(r.selections.size());
    run.emit_json(stem + ".json", {{"seed", seeds[i]},
                                   {"regime", to_string(configs[i].regime)},
                                   {"baseline", to_string(configs[i].baseline)},
                                   {"final_test_accuracy", last.test_accuracy},
                                   {"final_test_loss", last.test_loss},
                                   {"final_train_loss", last.train_loss},
                                   {"points_touched", last.points_touched},
                                   {"refreshes", r.selections.size()},
                                   {"mean_noisy_selected_fraction", noisy},
                                   {"selection_ms", r.selection_ms},
                                   {"augmentation_ms", r.augmentation_ms},
                                   {"training_ms", r.training_ms}});
    sel_ms += r.selection_ms;
    aug_ms += r.augmentation_ms;
    tr_ms += r.training_ms;
  }
  const auto stat = [](const Vector& v) {
    return json{{"mean", mean_of(v)}, {"std", std_of(v)}, {"values", v}};
  };
  run.emit_json("aggregate.json", {{"seeds", seeds},
                                   {"final_test_accuracy", stat(acc)},
                                   {"final_test_loss", stat(test_loss)},
                                   {"final_train_loss", stat(train_loss)}});
  run.timings["selection_ms"] = sel_ms;
  run.timings["augmentation_ms"] = aug_ms;
  run.timings["training_ms"] = tr_ms;
}

std::string eps_tag(std::size_t i) { return "eps" + std::to_string(i); }

void run_spectrum(const json& cfg, Run& run) {
  const Dataset data = load_primary(cfg, run);
  SpectrumProtocol p;
  p.per_class = get_or(cfg, "per_class", p.per_class);
  p.hidden = hidden_from(cfg, p.hidden);
  p.activation = parse_activation(get_or<std::string>(cfg, "activation", to_string(p.activation)));
  p.epochs = get_or(cfg, "epochs", p.epochs);
  p.lr = get_or(cfg, "lr", p.lr);
  p.batch_size = get_or(cfg, "batch_size", p.batch_size);
  p.epsilons = get_or(cfg, "epsilons", p.epsilons);
  p.kind = parse_transform_kind(get_or<std::string>(cfg, "transform", to_string(p.kind)));
  p.seed = get_or<std::uint64_t>(cfg, "seed", p.seed);
  std::vector<std::pair<std::string, bool>> variants{{"trained", true}};
  if (get_or(cfg, "compare_untrained", false)) variants.insert(variants.begin(), {"untrained", false});
  auto t0 = Clock::now();
  for (const auto& [label, trained] : variants) {
    SpectrumProtocol q = p;
    q.train = trained;
    const SpectrumExperiment ex = spectrum_experiment(data, q);
    for (std::size_t i = 0; i < ex.reports.size(); ++i) {
      json j = to_json(ex.reports[i]);
      j["epsilon0"] = p.epsilons[i];
      j["network"] = label;
      const BinContrast bc = bin_contrast(ex.reports[i]);
      j["contrast"] = {{"bottom_relative_shift", bc.bottom_relative_shift},
                       {"top_relative_shift", bc.top_relative_shift},
                       {"bottom_angle", bc.bottom_angle},
                       {"top_angle", bc.top_angle}};
      run.emit_json("spectrum_" + label + "_" + eps_tag(i) + ".json", j);
      run.emit("spectrum_" + label + "_" + eps_tag(i) + ".csv", bins_csv(ex.reports[i]));
    }
    const std::size_t draws = get_or<std::size_t>(cfg, "eigenvalue_draws", 0);
    if (draws > 0 && trained && !p.epsilons.empty()) {
      TransformSpec spec;
      spec.kind = p.kind;
      spec.epsilon0 = p.epsilons.back();
      spec.seed = p.seed;
      run.emit_json("expected_eigenvalue_" + label + ".json", to_json(lemma1_monte_carlo(ex.net, ex.subset, spec, draws)));
    }
  }
  run.timings["spectrum_ms"] = ms_since(t0);
}

void run_bounds(const json& cfg, Run& run) {
  const std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", 0);
  const std::size_t inst = get_or<std::size_t>(cfg, "instances", 100);
  auto t0 = Clock::now();
  json out;
  out["coreset_ntk_bound"] = to_json(lemma4_audit(inst, seed));
  out["linear_transform"] = to_json(linear_transform_audit(inst, seed));
  out["weyl"] = to_json(weyl_audit(get_or<std::size_t>(cfg, "weyl_trials", 1000), seed));
  out["eigvec"] = to_json(eigvec_audit(get_or<std::size_t>(cfg, "eigvec_trials", 200), seed));

  const std::size_t steps = get_or<std::size_t>(cfg, "steps", 200);
  const Dataset lin = random_instance(get_or<std::size_t>(cfg, "linear_n", 40),
                                      get_or<std::size_t>(cfg, "linear_d", 64),
                                      get_or<std::size_t>(cfg, "linear_classes", 2), seed);
  SelectionConfig sel;
  sel.fraction = get_or(cfg, "fraction", 0.1);
  TransformSpec spec;
  spec.epsilon0 = get_or(cfg, "epsilon0", spec.epsilon0);
  spec.seed = seed;
  out["linear_envelope"] = to_json(theorem1_envelope_check(lin, sel, spec, steps, seed));
  Rng rng(Stream::kMonteCarlo, {seed, 0x46ULL});
  Matrix f = Matrix::identity(lin.dim());
  for (double& v : f.data()) v += 0.05 * rng.normal() / std::sqrt(static_cast<double>(lin.dim()));
  out["transform_envelope"] = to_json(theorem3_envelope_check(lin, f, sel, steps, seed));
  out["generalization_bound"] = {{"sigma_min", 1.0}, {"n", 4}, {"L", 1.0}, {"epsilon0", 0.5},
                   {"value", generalization_bound_value(1.0, 4, 1.0, 0.5)},
                   {"additive_term", "O(log(1/delta))"}};
  run.timings["bounds_ms"] = ms_since(t0);
  run.emit_json("bounds.json", out);
}

json resolve_paths(json cfg) {
  for (const char* key : {"data", "test_data"})
    if (cfg.contains(key) && cfg[key].is_string())
      cfg[key] = fs::absolute(fs::path(cfg[key].get<std::string>())).lexically_normal().string();
  return cfg;
}

}  // namespace

RunResult run_command(const std::string& command, const json& config, const fs::path& out) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ConfigError("cannot create output directory " + out.string() + ": " + ec.message());
  const json cfg = resolve_paths(config);
  Run run;
  run.out = out;
  const auto t0 = Clock::now();
  if (command == "gen-data")
    run_gen_data(cfg, run);
  else if (command == "select")
    run_select(cfg, run);
  else if (command == "train")
    run_train(cfg, run);
  else if (command == "spectrum")
    run_spectrum(cfg, run);
  else if (command == "bounds")
    run_bounds(cfg, run);
  else
    throw ConfigError("unknown command '" + command + "'");
  run.timings["total_ms"] = ms_since(t0);

  json seeds = json::array();
  if (cfg.contains("seeds"))
    seeds = cfg["seeds"];
  else
    seeds.push_back(get_or<std::uint64_t>(cfg, "seed", 0));
  const json manifest = {{"schema_version", kSchemaVersion},
                         {"tool", "coreaug"},
                         {"version", kVersion},
                         {"command", command},
                         {"config", cfg},
                         {"inputs", run.inputs},
                         {"seeds", seeds},
                         {"outputs", run.outputs},
                         {"timings_ms", run.timings}};
  write_file(out / "manifest.json", manifest.dump(2) + "\n");
  RunResult res;
  res.manifest = out / "manifest.json";
  for (const auto& o : run.outputs) res.outputs.push_back(out / o);
  return res;
}

namespace {

void strip_timings(json& j) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end();) {
      const std::string& k = it.key();
      if (k.size() >= 3 && k.compare(k.size() - 3, 3, "_ms") == 0) {
        it = j.erase(it);
      } else {
        strip_timings(it.value());
        ++it;
      }
    }
  } else if (j.is_array()) {
    for (auto& v : j) strip_timings(v);
  }
}

std::string strip_csv_timing(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> head;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) head.push_back(cell);
  }
  const auto it = std::find(head.begin(), head.end(), "selection_ms");
  if (it == head.end()) return text;
  const auto col = static_cast<std::size_t>(it - head.begin());
  std::ostringstream os;
  in.clear();
  in.seekg(0);
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c != col) os << cell;
      os << ',';
      ++c;
    }
    os << '\n';
  }
  return os.str();
}

std::string comparable(const fs::path& p) {
  const std::string text = read_file(p);
  if (p.extension() == ".json") {
    json j = json::parse(text);
    strip_timings(j);
    return j.dump();
  }
  if (p.extension() == ".csv") return strip_csv_timing(text);
  return text;
}

}  // namespace

std::vector<std::string> verify_manifest(const fs::path& manifest, const fs::path& scratch) {
  json m;
  try {
    m = json::parse(read_file(manifest));
  } catch (const json::exception& e) {
    throw DataError("manifest " + manifest.string() + ": " + e.what());
  }
  const fs::path dir = manifest.parent_path();
  const RunResult again = run_command(m.at("command").get<std::string>(), m.at("config"), scratch);
  std::vector<std::string> diffs;
  const auto outputs = m.at("outputs").get<std::vector<std::string>>();
  std::vector<std::string> fresh;
  for (const auto& p : again.outputs) fresh.push_back(p.filename().string());
  if (outputs != fresh) diffs.push_back("output file lists differ");
  for (const auto& name : outputs) {
    if (!fs::exists(scratch / name)) {
      diffs.push_back(name + ": missing from re-run");
      continue;
    }
    if (comparable(dir / name) != comparable(scratch / name)) diffs.push_back(name + ": contents differ");
  }
  return diffs;
}

std::string summarize_manifest(const fs::path& manifest) {
  const json m = json::parse(read_file(manifest));
  std::ostringstream os;
  os << "command: " << m.value("command", "?") << "\n";
  os << "version: " << m.value("version", "?") << "\n";
  os << "seeds: " << m["seeds"].dump() << "\n";
  os << "outputs:\n";
  for (const auto& o : m["outputs"]) os << "  " << o.get<std::string>() << "\n";
  os << "timings_ms:\n";
  for (const auto& [k, v] : m["timings_ms"].items()) os << "  " << k << ": " << v.dump() << "\n";
  const fs::path dir = manifest.parent_path();
  if (fs::exists(dir / "aggregate.json")) {
    const json a = json::parse(read_file(dir / "aggregate.json"));
    os << "final_test_accuracy: mean " << a["final_test_accuracy"]["mean"].dump() << " std "
       << a["final_test_accuracy"]["std"].dump() << "\n";
  }
  return os.str();
}

}  // namespace coreaug
