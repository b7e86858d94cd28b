#include "mad/config.hpp"

#include <cstdio>
#include <set>

#include "mad/error.hpp"
#include "mad/io.hpp"
#include "mad/rng.hpp"

namespace mad {

using nlohmann::json;

namespace {

void check_keys(const json& j, const char* where,
                const std::set<std::string>& allowed) {
  if (!j.is_object()) throw usage_error(std::string(where) + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) {
      throw usage_error("unknown config key '" + std::string(where) + "." + key + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw usage_error(std::string("config key '") + key + "': " + e.what());
  }
}

template <typename T>
void read(const json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  T v{};
  read(j, key, v);
  out = v;
}

template <typename T>
void write(json& j, const char* key, const std::optional<T>& v) {
  j[key] = v ? json(*v) : json(nullptr);
}

}  // namespace

nn::ModelConfig RunConfig::model_config(std::size_t input_dim) const {
  auto cfg = nn::ModelConfig::defaults(model.kind, input_dim);
  if (model.hidden) cfg.hidden = *model.hidden;
  if (model.layers) cfg.layers = *model.layers;
  if (model.kernel) cfg.kernel = *model.kernel;
  if (model.d_model) cfg.d_model = *model.d_model;
  if (model.ff_dim) cfg.ff_dim = *model.ff_dim;
  if (model.heads) cfg.heads = *model.heads;
  if (model.dropout) cfg.dropout = *model.dropout;
  cfg.init_seed = derive_seed(seed, "init", {});
  cfg.validate();
  return cfg;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig cfg = train;
  cfg.seed = seed;
  return cfg;
}

void RunConfig::validate() const {
  if (window_len < 2) throw usage_error("window_len must be >= 2");
  if (train_stride == 0 || test_stride == 0) throw usage_error("strides must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw usage_error("train_fraction must lie in (0, 1)");
  }
  train.validate();
  model_config(1);
}

json RunConfig::to_json() const {
  json j;
  j["seed"] = seed;
  j["window_len"] = window_len;
  j["train_stride"] = train_stride;
  j["test_stride"] = test_stride;
  j["train_fraction"] = train_fraction;
  write(j, "label_column", label_column);
  json m;
  m["kind"] = nn::to_string(model.kind);
  write(m, "hidden", model.hidden);
  write(m, "layers", model.layers);
  write(m, "kernel", model.kernel);
  write(m, "d_model", model.d_model);
  write(m, "ff_dim", model.ff_dim);
  write(m, "heads", model.heads);
  write(m, "dropout", model.dropout);
  j["model"] = m;
  json t;
  t["task"] = nn::to_string(train.task);
  t["epochs"] = train.epochs;
  t["batch_size"] = train.batch_size;
  t["learning_rate"] = train.adam.learning_rate;
  t["beta1"] = train.adam.beta1;
  t["beta2"] = train.adam.beta2;
  t["epsilon"] = train.adam.epsilon;
  write(t, "patience", train.patience);
  t["clip_norm"] = train.clip_norm;
  j["train"] = t;
  json k;
  k["mask_rate"] = train.mask.mask_rate;
  k["fill_rates"] = {train.mask.fill.p_rnd, train.mask.fill.p_same,
                     train.mask.fill.p_zero};
  k["step_mode"] = train.mask.step_mode;
  j["mask"] = k;
  return j;
}

std::string RunConfig::digest() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(to_json().dump())));
  return buf;
}

RunConfig run_config_from_json(const json& j) {
  check_keys(j, "config",
             {"seed", "window_len", "train_stride", "test_stride", "train_fraction",
              "label_column", "model", "train", "mask"});
  RunConfig c;
  read(j, "seed", c.seed);
  read(j, "window_len", c.window_len);
  read(j, "train_stride", c.train_stride);
  read(j, "test_stride", c.test_stride);
  read(j, "train_fraction", c.train_fraction);
  read(j, "label_column", c.label_column);
  if (j.contains("model")) {
    const auto& m = j.at("model");
    check_keys(m, "model",
               {"kind", "hidden", "layers", "kernel", "d_model", "ff_dim", "heads",
                "dropout"});
    std::string kind = nn::to_string(c.model.kind);
    read(m, "kind", kind);
    c.model.kind = nn::parse_model_kind(kind);
    read(m, "hidden", c.model.hidden);
    read(m, "layers", c.model.layers);
    read(m, "kernel", c.model.kernel);
    read(m, "d_model", c.model.d_model);
    read(m, "ff_dim", c.model.ff_dim);
    read(m, "heads", c.model.heads);
    read(m, "dropout", c.model.dropout);
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    check_keys(t, "train",
               {"task", "epochs", "batch_size", "learning_rate", "beta1", "beta2",
                "epsilon", "patience", "clip_norm"});
    std::string task = nn::to_string(c.train.task);
    read(t, "task", task);
    c.train.task = nn::parse_task(task);
    read(t, "epochs", c.train.epochs);
    read(t, "batch_size", c.train.batch_size);
    read(t, "learning_rate", c.train.adam.learning_rate);
    read(t, "beta1", c.train.adam.beta1);
    read(t, "beta2", c.train.adam.beta2);
    read(t, "epsilon", c.train.adam.epsilon);
    read(t, "patience", c.train.patience);
    read(t, "clip_norm", c.train.clip_norm);
  }
  if (j.contains("mask")) {
    const auto& k = j.at("mask");
    check_keys(k, "mask", {"mask_rate", "fill_rates", "step_mode"});
    read(k, "mask_rate", c.train.mask.mask_rate);
    if (k.contains("fill_rates")) {
      std::vector<double> r;
      read(k, "fill_rates", r);
      if (r.size() != 3) throw usage_error("mask.fill_rates needs 3 entries");
      c.train.mask.fill = FillRates{r[0], r[1], r[2]};
    }
    read(k, "step_mode", c.train.mask.step_mode);
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw usage_error("config " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace mad
