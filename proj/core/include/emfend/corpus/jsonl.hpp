#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "emfend/corpus/news_post.hpp"

namespace emfend::corpus {

struct ParseOptions {
  std::size_t region_count = kDefaultRegionCount;
  /// When set, every region row must have exactly this width.
  std::optional<std::size_t> visual_width;
};

/// Parses one JSONL record. Unknown fields are ignored; `ocr_text` and the
/// entity lists default to empty. Throws DataError naming the line and field.
NewsPost parse_record(std::string_view line, std::size_t line_number = 1,
                      const ParseOptions& options = {});

/// One JSON object without trailing newline. Floats use 9 significant
/// digits, which is exact for the 32-bit feature storage.
std::string serialize_record(const NewsPost& post);

/// Reads a whole dataset, skipping blank lines. Ids must be unique.
std::vector<NewsPost> read_dataset(const std::filesystem::path& path,
                                   const ParseOptions& options = {});

void write_dataset(const std::filesystem::path& path, const std::vector<NewsPost>& posts);

}  // namespace emfend::corpus
