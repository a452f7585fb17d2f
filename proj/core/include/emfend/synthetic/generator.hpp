#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "emfend/corpus/news_post.hpp"

namespace emfend::synthetic {

enum class Kind {
  /// Fake posts show a different person in the image than the text names.
  entity_mismatch,
  /// The image's context entity echoes an inflammatory text keyword for
  /// fakes and a neutral one for reals.
  aligned_keyword,
  /// Class keywords appear only in the embedded image text.
  ocr_story,
  /// Disjoint text vocabularies per class.
  separable,
};

std::string to_string(Kind kind);
/// Accepts the hyphenated names ("entity-mismatch", ...).
Kind parse_kind(std::string_view name);
const std::vector<std::string>& kind_names();

struct Options {
  Kind kind = Kind::entity_mismatch;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::size_t visual_width = 16;
  std::size_t regions = corpus::kDefaultRegionCount;
  /// Probability of flipping each label after the post is built.
  double noise = 0.0;
};

/// Balanced, deterministic dataset; identical options give identical posts.
std::vector<corpus::NewsPost> generate(const Options& options);

}  // namespace emfend::synthetic
