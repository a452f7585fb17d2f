#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "emfend/corpus/news_post.hpp"
#include "emfend/numerics/attention_block.hpp"
#include "emfend/numerics/parameter_store.hpp"

namespace emfend::encoders {

using numerics::Mask;
using numerics::Tensor;
using numerics::Var;

inline constexpr std::string_view kClsToken = "[CLS]";
inline constexpr std::string_view kSepToken = "[SEP]";
inline constexpr std::string_view kPadToken = "[PAD]";

/// Hash-bucket vocabulary with three reserved ids.
class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kCls = 1;
  static constexpr std::size_t kSep = 2;
  static constexpr std::size_t kReserved = 3;
  static constexpr std::size_t kMinBuckets = 1024;

  explicit Vocabulary(std::size_t buckets = 8192);

  std::size_t size() const { return buckets_; }

  /// Special-token literals map to their reserved ids; anything else is
  /// lowercased and hashed into [kReserved, size).
  std::size_t id(std::string_view token) const;
  std::vector<std::size_t> ids(const std::vector<std::string>& tokens) const;

 private:
  std::size_t buckets_;
};

struct ComposedText {
  std::vector<std::string> tokens;
  Mask mask;
};

/// [CLS] text [SEP] ocr [SEP], or [CLS] text [SEP] when `ocr` is empty.
/// When too long, the original text keeps up to floor(3/4 max_len) tokens
/// (more if the OCR side is short), OCR gets the remainder, specials stay.
ComposedText compose_text(const corpus::Tokens& text, const corpus::Tokens& ocr,
                          std::size_t max_len);

/// Fixed sinusoidal position table, max_len x width.
Tensor sinusoidal_positions(std::size_t max_len, std::size_t width);

struct TextEncoderConfig {
  std::size_t vocab_size = 8192;
  std::size_t width = 256;
  std::size_t max_len = 256;
  std::size_t layers = 2;
  std::size_t heads = 8;
  std::size_t ffn_dim = 512;
};

/// Toy contextual encoder: hashed token embeddings plus fixed sinusoidal
/// positions, followed by `layers` self-attention blocks. The embedding
/// table is shared with the entity embedder.
class TextEncoder {
 public:
  TextEncoder(numerics::ParameterStore& store, const TextEncoderConfig& config,
              numerics::Rng& init_rng);

  /// (length, width) features; rows whose mask entry is false are zero.
  /// `rng` non-null means training (dropout active).
  Var encode(const std::vector<std::size_t>& ids, const Mask& mask, double dropout_rate = 0.0,
             numerics::Rng* rng = nullptr) const;

  Var encode(const ComposedText& composed, double dropout_rate = 0.0,
             numerics::Rng* rng = nullptr) const;

  /// Mean of the surface tokens' embedding rows, 1 x width, no position term.
  Var embed_entity(const corpus::EntityMention& mention) const;

  const Vocabulary& vocabulary() const { return vocab_; }
  const Var& embedding_table() const { return table_; }
  const TextEncoderConfig& config() const { return config_; }

 private:
  TextEncoderConfig config_;
  Vocabulary vocab_;
  Var table_;
  Tensor positions_;
  std::vector<numerics::AttentionBlock> blocks_;
};

}  // namespace emfend::encoders
