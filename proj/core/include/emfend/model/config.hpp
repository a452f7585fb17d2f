#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace emfend::model {

struct ModelConfig {
  std::size_t d = 256;
  std::size_t heads = 8;
  std::size_t L_max = 256;
  double dropout = 0.3;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  double lr = 1e-3;
  std::uint64_t seed = 0;

  bool use_visual_entities = true;
  bool use_ocr = true;
  bool use_coattention_ve = true;
  bool use_coattention_vf = true;
  bool use_entity_consistency = true;
  bool finetune_visual_projection = true;

  std::size_t encoder_layers = 2;
  std::size_t mct_layers = 1;
  /// Feed-forward width as a multiple of d.
  std::size_t ffn_multiplier = 2;
  std::size_t vocab_size = 8192;
  std::size_t d_visual = 512;
  std::size_t n_regions = 49;
  bool clamp_consistency = true;
  bool consistency_gradient = false;
  /// Loss weight of fake (label 1) examples.
  double positive_class_weight = 1.0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

/// JSON object with one key per field. Parsing rejects unknown keys and
/// wrong types; missing keys keep their defaults.
std::string to_json(const ModelConfig& config, int indent = 2);
ModelConfig config_from_json(std::string_view text);

ModelConfig read_config(const std::string& path);
void write_config(const std::string& path, const ModelConfig& config);

/// The six ablation variant names, in table order.
const std::vector<std::string>& ablation_names();

/// Config with the named component switched off. Throws
/// std::invalid_argument listing the valid names when `name` is unknown.
ModelConfig apply_ablation(ModelConfig config, std::string_view name);

}  // namespace emfend::model
