#include "emfend/corpus/text.hpp"

#include <cctype>

namespace emfend::corpus {

std::string normalize_token(std::string_view token) {
  std::string out(token);
  for (auto& ch : out) {
    const auto byte = static_cast<unsigned char>(ch);
    if (byte < 0x80) ch = static_cast<char>(std::tolower(byte));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.push_back(normalize_token(text.substr(start, i - start)));
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (char ch : bytes) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace emfend::corpus
