#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace emfend::corpus {

/// ASCII lowercase; bytes outside ASCII pass through unchanged.
std::string normalize_token(std::string_view token);

/// Whitespace split followed by normalize_token.
std::vector<std::string> tokenize(std::string_view text);

/// 64-bit FNV-1a. Stable across platforms, used for every hashed lookup.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace emfend::corpus
