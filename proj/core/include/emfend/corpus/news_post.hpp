#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace emfend::corpus {

using Tokens = std::vector<std::string>;

enum class EntityKind { person, location, context };

inline constexpr EntityKind kEntityKinds[] = {EntityKind::person, EntityKind::location,
                                              EntityKind::context};

std::string_view to_string(EntityKind kind);
std::optional<EntityKind> parse_entity_kind(std::string_view text);

/// A textual or visual entity. Textual mentions always carry confidence 1;
/// visual ones carry the detector probability in (0, 1].
struct EntityMention {
  Tokens surface;
  EntityKind kind = EntityKind::context;
  double confidence = 1.0;

  friend bool operator==(const EntityMention&, const EntityMention&) = default;
};

/// Row-major matrix stored in 32-bit floats; used for region features and
/// optional precomputed token features.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;

  float at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

inline constexpr int kLabelReal = 0;
inline constexpr int kLabelFake = 1;
inline constexpr std::size_t kDefaultRegionCount = 49;  // 7 x 7 grid

struct NewsPost {
  std::string id;
  Tokens text;
  Tokens ocr_text;
  std::vector<EntityMention> textual_entities;
  std::vector<EntityMention> visual_entities;
  FeatureMatrix visual_regions;
  std::optional<FeatureMatrix> text_features;
  int label = kLabelReal;
  std::optional<int> event_id;

  friend bool operator==(const NewsPost&, const NewsPost&) = default;
};

std::vector<EntityMention> entities_of_kind(const std::vector<EntityMention>& mentions,
                                            EntityKind kind);

}  // namespace emfend::corpus
