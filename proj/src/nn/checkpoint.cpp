#include "mad/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <map>

#include "mad/error.hpp"
#include "mad/io.hpp"

namespace mad::nn {

namespace {

constexpr char kMagic[8] = {'M', 'A', 'D', 'C', 'K', 'P', 'T', '\0'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    out_.append(static_cast<const char*>(p), n);
  }
  template <typename U>
  void uint(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      out_.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
    }
  }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void name(const std::string& s) {
    uint(static_cast<std::uint16_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  std::string_view bytes(std::size_t n) {
    if (n > in_.size() - pos_) throw data_error("checkpoint truncated");
    const auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  template <typename U>
  U uint() {
    const auto s = bytes(sizeof(U));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[i])) << (8 * i);
    }
    return static_cast<U>(v);
  }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::string name() {
    const auto n = uint<std::uint16_t>();
    return std::string(bytes(n));
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

struct HyperValue {
  bool is_uint = false;
  std::uint64_t u = 0;
  double f = 0.0;
};

using HyperBlock = std::vector<std::pair<std::string, HyperValue>>;

HyperBlock hyperparameters(const SequenceModel& model) {
  const ModelConfig& c = model.config();
  const MaskPolicy& m = model.mask_policy();
  auto u = [](std::uint64_t v) { return HyperValue{true, v, 0.0}; };
  auto f = [](double v) { return HyperValue{false, 0, v}; };
  return {
      {"input_dim", u(c.input_dim)}, {"hidden", u(c.hidden)},
      {"layers", u(c.layers)},       {"kernel", u(c.kernel)},
      {"d_model", u(c.d_model)},     {"ff_dim", u(c.ff_dim)},
      {"heads", u(c.heads)},         {"dropout", f(c.dropout)},
      {"init_seed", u(c.init_seed)}, {"mask_rate", f(m.mask_rate)},
      {"p_rnd", f(m.fill.p_rnd)},    {"p_same", f(m.fill.p_same)},
      {"p_zero", f(m.fill.p_zero)},  {"step_mode", u(m.step_mode ? 1 : 0)},
  };
}

}  // namespace

std::string encode_checkpoint(const SequenceModel& model) {
  Writer w;
  w.bytes(kMagic, sizeof(kMagic));
  w.uint(kCheckpointVersion);
  w.uint(static_cast<std::uint8_t>(model.kind()));
  w.uint(static_cast<std::uint8_t>(model.task() ? static_cast<int>(*model.task()) : 0));
  const HyperBlock hp = hyperparameters(model);
  w.uint(static_cast<std::uint32_t>(hp.size()));
  for (const auto& [name, v] : hp) {
    w.name(name);
    w.uint(static_cast<std::uint8_t>(v.is_uint ? 1 : 0));
    if (v.is_uint) {
      w.uint(v.u);
    } else {
      w.f64(v.f);
    }
  }
  const auto params = model.parameters();
  w.uint(static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    w.name(p.name);
    w.uint(std::uint32_t{2});
    w.uint(static_cast<std::uint64_t>(p.value.rows()));
    w.uint(static_cast<std::uint64_t>(p.value.cols()));
    for (double v : p.value.values()) w.f64(v);
  }
  return w.take();
}

SequenceModel decode_checkpoint(std::string_view bytes,
                                std::optional<ModelKind> expected_kind) {
  Reader r(bytes);
  if (r.bytes(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) {
    throw data_error("not a checkpoint file (bad magic)");
  }
  const auto version = r.uint<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw data_error("checkpoint version mismatch: file has " +
                     std::to_string(version) + ", expected " +
                     std::to_string(kCheckpointVersion));
  }
  const auto kind_byte = r.uint<std::uint8_t>();
  if (kind_byte < 1 || kind_byte > 3) {
    throw data_error("checkpoint has unknown model kind");
  }
  const auto kind = static_cast<ModelKind>(kind_byte);
  if (expected_kind && *expected_kind != kind) {
    throw data_error("checkpoint kind mismatch: file holds " + to_string(kind) +
                     ", expected " + to_string(*expected_kind));
  }
  const auto task_byte = r.uint<std::uint8_t>();
  if (task_byte > 2) throw data_error("checkpoint has unknown task");

  std::map<std::string, HyperValue> hp;
  const auto hp_count = r.uint<std::uint32_t>();
  for (std::uint32_t i = 0; i < hp_count; ++i) {
    std::string name = r.name();
    HyperValue v;
    v.is_uint = r.uint<std::uint8_t>() == 1;
    if (v.is_uint) {
      v.u = r.uint<std::uint64_t>();
    } else {
      v.f = r.f64();
    }
    hp[std::move(name)] = v;
  }
  auto get_u = [&](const char* key) {
    const auto it = hp.find(key);
    if (it == hp.end() || !it->second.is_uint) {
      throw data_error(std::string("checkpoint lacks hyperparameter ") + key);
    }
    return static_cast<std::size_t>(it->second.u);
  };
  auto get_f = [&](const char* key) {
    const auto it = hp.find(key);
    if (it == hp.end() || it->second.is_uint) {
      throw data_error(std::string("checkpoint lacks hyperparameter ") + key);
    }
    return it->second.f;
  };

  ModelConfig cfg;
  cfg.kind = kind;
  cfg.input_dim = get_u("input_dim");
  cfg.hidden = get_u("hidden");
  cfg.layers = get_u("layers");
  cfg.kernel = get_u("kernel");
  cfg.d_model = get_u("d_model");
  cfg.ff_dim = get_u("ff_dim");
  cfg.heads = get_u("heads");
  cfg.dropout = get_f("dropout");
  cfg.init_seed = get_u("init_seed");
  MaskPolicy policy;
  policy.mask_rate = get_f("mask_rate");
  policy.fill = {get_f("p_rnd"), get_f("p_same"), get_f("p_zero")};
  policy.step_mode = get_u("step_mode") != 0;

  std::vector<Parameter> params;
  const auto count = r.uint<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    Parameter p;
    p.name = r.name();
    const auto rank = r.uint<std::uint32_t>();
    if (rank != 2) throw data_error("checkpoint parameter has rank != 2");
    const auto rows = r.uint<std::uint64_t>();
    const auto cols = r.uint<std::uint64_t>();
    if (cols != 0 && rows > (bytes.size() / 8) / cols) {
      throw data_error("checkpoint truncated");
    }
    p.value = Matrix(rows, cols);
    for (auto& v : p.value.values()) v = r.f64();
    params.push_back(std::move(p));
  }
  if (!r.done()) throw data_error("checkpoint has trailing bytes");

  SequenceModel model(cfg);
  model.load_parameters(params);
  if (task_byte != 0) model.set_task(static_cast<Task>(task_byte));
  model.set_mask_policy(policy);
  return model;
}

void save_checkpoint(const SequenceModel& model,
                     const std::filesystem::path& path) {
  write_file_atomic(path, encode_checkpoint(model));
}

SequenceModel load_checkpoint(const std::filesystem::path& path,
                              std::optional<ModelKind> expected_kind) {
  return decode_checkpoint(read_file(path), expected_kind);
}

}  // namespace mad::nn
