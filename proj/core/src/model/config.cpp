#include "emfend/model/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "emfend/error.hpp"
#include "json.hpp"

namespace emfend::model {

using nlohmann::json;

namespace {

// Field table shared by serialisation and strict parsing.
template <typename Fn>
void for_each_field(ModelConfig& c, Fn&& fn) {
  fn("d", c.d);
  fn("heads", c.heads);
  fn("L_max", c.L_max);
  fn("dropout", c.dropout);
  fn("batch_size", c.batch_size);
  fn("max_epochs", c.max_epochs);
  fn("patience", c.patience);
  fn("lr", c.lr);
  fn("seed", c.seed);
  fn("use_visual_entities", c.use_visual_entities);
  fn("use_ocr", c.use_ocr);
  fn("use_coattention_ve", c.use_coattention_ve);
  fn("use_coattention_vf", c.use_coattention_vf);
  fn("use_entity_consistency", c.use_entity_consistency);
  fn("finetune_visual_projection", c.finetune_visual_projection);
  fn("encoder_layers", c.encoder_layers);
  fn("mct_layers", c.mct_layers);
  fn("ffn_multiplier", c.ffn_multiplier);
  fn("vocab_size", c.vocab_size);
  fn("d_visual", c.d_visual);
  fn("n_regions", c.n_regions);
  fn("clamp_consistency", c.clamp_consistency);
  fn("consistency_gradient", c.consistency_gradient);
  fn("positive_class_weight", c.positive_class_weight);
}

template <typename T>
void read_field(const json& value, const std::string& key, T& out) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!value.is_boolean()) throw DataError("config: '" + key + "' must be a boolean");
    out = value.get<bool>();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!value.is_number()) throw DataError("config: '" + key + "' must be a number");
    out = value.get<double>();
  } else {
    if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<long long>() >= 0)) {
      throw DataError("config: '" + key + "' must be a non-negative integer");
    }
    out = value.get<T>();
  }
}

}  // namespace

void ModelConfig::validate() const {
  auto require = [](bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument("config: " + message);
  };
  require(d > 0, "d must be positive");
  require(heads > 0 && d % heads == 0, "d must be divisible by heads");
  require(L_max >= 3, "L_max must be at least 3");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  require(batch_size > 0, "batch_size must be positive");
  require(lr > 0.0, "lr must be positive");
  require(mct_layers > 0, "mct_layers must be positive");
  require(ffn_multiplier > 0, "ffn_multiplier must be positive");
  require(vocab_size >= 1024, "vocab_size must be at least 1024");
  require(d_visual > 0, "d_visual must be positive");
  require(n_regions > 0, "n_regions must be positive");
  require(positive_class_weight > 0.0, "positive_class_weight must be positive");
}

std::string to_json(const ModelConfig& config, int indent) {
  nlohmann::ordered_json j;
  ModelConfig copy = config;
  for_each_field(copy, [&](const char* key, auto& value) { j[key] = value; });
  return j.dump(indent);
}

ModelConfig config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("config: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("config: expected a JSON object");
  ModelConfig config;
  std::size_t matched = 0;
  for_each_field(config, [&](const char* key, auto& value) {
    if (auto it = j.find(key); it != j.end()) {
      read_field(*it, key, value);
      ++matched;
    }
  });
  if (matched != j.size()) {
    ModelConfig probe;
    for (const auto& [key, _] : j.items()) {
      bool known = false;
      for_each_field(probe, [&](const char* name, auto&) { known = known || key == name; });
      if (!known) throw DataError("config: unknown key '" + key + "'");
    }
  }
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  return config;
}

ModelConfig read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return config_from_json(text.str());
}

void write_config(const std::string& path, const ModelConfig& config) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write config '" + path + "'");
  out << to_json(config) << "\n";
}

const std::vector<std::string>& ablation_names() {
  static const std::vector<std::string> names{
      "w/o visual entities", "w/o co-attention-ve", "w/o co-attention-vf",
      "w/o entity consistency", "w/o OCR text", "w/o FT VGG feature"};
  return names;
}

ModelConfig apply_ablation(ModelConfig config, std::string_view name) {
  if (name == "w/o visual entities") {
    config.use_visual_entities = false;
    config.use_coattention_ve = false;
    config.use_entity_consistency = false;
  } else if (name == "w/o co-attention-ve") {
    config.use_coattention_ve = false;
  } else if (name == "w/o co-attention-vf") {
    config.use_coattention_vf = false;
  } else if (name == "w/o entity consistency") {
    config.use_entity_consistency = false;
  } else if (name == "w/o OCR text") {
    config.use_ocr = false;
  } else if (name == "w/o FT VGG feature") {
    config.finetune_visual_projection = false;
  } else {
    std::string valid;
    for (const auto& n : ablation_names()) valid += (valid.empty() ? "'" : ", '") + n + "'";
    throw std::invalid_argument("unknown ablation '" + std::string(name) + "'; valid: " + valid);
  }
  return config;
}

}  // namespace emfend::model
