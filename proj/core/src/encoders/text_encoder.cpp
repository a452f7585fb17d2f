#include "emfend/encoders/text_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "emfend/corpus/text.hpp"
#include "emfend/numerics/ops.hpp"

namespace emfend::encoders {

namespace ops = numerics::ops;

Vocabulary::Vocabulary(std::size_t buckets) : buckets_(buckets) {
  if (buckets < kMinBuckets) {
    throw std::invalid_argument("vocabulary needs at least " + std::to_string(kMinBuckets) +
                                " buckets");
  }
}

std::size_t Vocabulary::id(std::string_view token) const {
  if (token == kPadToken) return kPad;
  if (token == kClsToken) return kCls;
  if (token == kSepToken) return kSep;
  return kReserved + corpus::fnv1a64(corpus::normalize_token(token)) % (buckets_ - kReserved);
}

std::vector<std::size_t> Vocabulary::ids(const std::vector<std::string>& tokens) const {
  std::vector<std::size_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

ComposedText compose_text(const corpus::Tokens& text, const corpus::Tokens& ocr,
                          std::size_t max_len) {
  ComposedText out;
  const bool with_ocr = !ocr.empty() && max_len >= 3;
  std::size_t text_len = 0;
  std::size_t ocr_len = 0;
  if (with_ocr) {
    const std::size_t budget = max_len - 3;
    const std::size_t text_quota = std::min(budget, max_len * 3 / 4);
    const std::size_t ocr_room = budget > ocr.size() ? budget - ocr.size() : 0;
    text_len = std::min({text.size(), budget, std::max(text_quota, ocr_room)});
    ocr_len = std::min(ocr.size(), budget - text_len);
  } else {
    text_len = std::min(text.size(), max_len >= 2 ? max_len - 2 : 0);
  }

  out.tokens.emplace_back(kClsToken);
  out.tokens.insert(out.tokens.end(), text.begin(), text.begin() + static_cast<std::ptrdiff_t>(text_len));
  out.tokens.emplace_back(kSepToken);
  if (with_ocr) {
    out.tokens.insert(out.tokens.end(), ocr.begin(), ocr.begin() + static_cast<std::ptrdiff_t>(ocr_len));
    out.tokens.emplace_back(kSepToken);
  }
  if (out.tokens.size() > max_len) out.tokens.resize(max_len);
  out.mask.assign(out.tokens.size(), true);
  return out;
}

Tensor sinusoidal_positions(std::size_t max_len, std::size_t width) {
  Tensor table(numerics::Shape{max_len, width});
  for (std::size_t pos = 0; pos < max_len; ++pos) {
    for (std::size_t i = 0; i < width; ++i) {
      const double exponent = static_cast<double>(i - i % 2) / static_cast<double>(width);
      const double angle = static_cast<double>(pos) / std::pow(10000.0, exponent);
      table.at(pos, i) = i % 2 == 0 ? std::sin(angle) : std::cos(angle);
    }
  }
  return table;
}

TextEncoder::TextEncoder(numerics::ParameterStore& store, const TextEncoderConfig& config,
                         numerics::Rng& init_rng)
    : config_(config), vocab_(config.vocab_size) {
  // A lookup is a one-hot product, so the table's fan-in is 1.
  table_ = store.add("encoder.token_embedding",
                     numerics::glorot_uniform({config.vocab_size, config.width}, 1, config.width,
                                              init_rng));
  positions_ = sinusoidal_positions(config.max_len, config.width);
  numerics::AttentionBlockConfig block;
  block.width = config.width;
  block.heads = config.heads;
  block.ffn_dim = config.ffn_dim;
  for (std::size_t i = 0; i < config.layers; ++i) {
    blocks_.emplace_back(store, "encoder.layer" + std::to_string(i), block, init_rng);
  }
}

Var TextEncoder::encode(const std::vector<std::size_t>& ids, const Mask& mask,
                        double dropout_rate, numerics::Rng* rng) const {
  if (ids.empty()) throw std::invalid_argument("encode_text: empty token sequence");
  if (ids.size() > config_.max_len) {
    throw std::invalid_argument("encode_text: sequence of " + std::to_string(ids.size()) +
                                " exceeds max_len " + std::to_string(config_.max_len));
  }
  if (!mask.empty() && mask.size() != ids.size()) {
    throw std::invalid_argument("encode_text: mask length differs from sequence length");
  }
  const std::size_t n = ids.size();
  const std::size_t d = config_.width;
  Tensor pos(numerics::Shape{n, d});
  std::copy_n(positions_.data().begin(), n * d, pos.data().begin());
  Var x = ops::add(ops::gather_rows(table_, ids), Var::constant(std::move(pos)));
  for (const auto& block : blocks_) x = block.forward(x, x, mask, dropout_rate, rng);
  if (!mask.empty() && std::find(mask.begin(), mask.end(), false) != mask.end()) {
    Tensor keep(numerics::Shape{n, d}, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (mask[i]) std::fill_n(keep.row(i).begin(), d, 1.0);
    }
    x = ops::mul(x, Var::constant(std::move(keep)));
  }
  return x;
}

Var TextEncoder::encode(const ComposedText& composed, double dropout_rate, numerics::Rng* rng) const {
  return encode(vocab_.ids(composed.tokens), composed.mask, dropout_rate, rng);
}

Var TextEncoder::embed_entity(const corpus::EntityMention& mention) const {
  if (mention.surface.empty()) throw std::invalid_argument("embed_entity: empty entity surface");
  return ops::masked_mean_rows(ops::gather_rows(table_, vocab_.ids(mention.surface)), {});
}

}  // namespace emfend::encoders
