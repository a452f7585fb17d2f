#include "emfend/fusion/consistency.hpp"

#include <stdexcept>
#include <string>

#include "emfend/numerics/ops.hpp"

namespace emfend::fusion {

namespace ops = numerics::ops;
using numerics::Shape;
using numerics::Tensor;

Var entity_similarity(std::span<const Var> textual, std::span<const Var> visual,
                      std::span<const double> confidence) {
  if (confidence.size() != visual.size()) {
    throw std::invalid_argument("entity_similarity: one confidence per visual entity required");
  }
  for (double rho : confidence) {
    if (!(rho > 0.0 && rho <= 1.0)) {
      throw std::invalid_argument("entity_similarity: confidence " + std::to_string(rho) +
                                  " outside (0, 1]");
    }
  }
  if (textual.empty() || visual.empty()) return Var::constant(Tensor::scalar(1.0));

  std::vector<Var> per_textual;
  per_textual.reserve(textual.size());
  for (const Var& t : textual) {
    Var total = ops::scale(ops::cosine(t, visual[0]), confidence[0]);
    for (std::size_t v = 1; v < visual.size(); ++v) {
      total = ops::add(total, ops::scale(ops::cosine(t, visual[v]), confidence[v]));
    }
    per_textual.push_back(total);
  }
  return per_textual.size() == 1 ? per_textual[0] : ops::max_of(per_textual);
}

Var entity_similarity(const std::vector<corpus::EntityMention>& textual,
                      const std::vector<corpus::EntityMention>& visual,
                      const EntityEmbedder& embed) {
  if (textual.empty() || visual.empty()) return Var::constant(Tensor::scalar(1.0));
  std::vector<Var> t_rows;
  std::vector<Var> v_rows;
  std::vector<double> rho;
  for (const auto& m : textual) t_rows.push_back(embed(m));
  for (const auto& m : visual) {
    v_rows.push_back(embed(m));
    rho.push_back(m.confidence);
  }
  return entity_similarity(t_rows, v_rows, rho);
}

Var consistency_vector(const corpus::NewsPost& post, const EntityEmbedder& embed,
                       const ConsistencyOptions& options) {
  std::vector<Var> parts;
  for (corpus::EntityKind kind : corpus::kEntityKinds) {
    Var s = entity_similarity(corpus::entities_of_kind(post.textual_entities, kind),
                              corpus::entities_of_kind(post.visual_entities, kind), embed);
    if (options.clamp) s = ops::clamp(s, -1.0, 1.0);
    parts.push_back(std::move(s));
  }
  if (!options.differentiable) {
    Tensor row(Shape{1, parts.size()});
    for (std::size_t i = 0; i < parts.size(); ++i) row[i] = parts[i].value().item();
    return Var::constant(std::move(row));
  }
  return ops::concat_cols(parts);
}

Var concat_multimodal(const Var& x_t, const Var& x_ve, const Var& x_v, const Var& x_s) {
  const std::size_t d = x_t.value().size();
  auto check = [](const Var& x, std::size_t width, const char* label) {
    if (x.rows() != 1 || x.cols() != width) {
      throw std::invalid_argument(std::string("concat_multimodal: ") + label + " has shape " +
                                  numerics::shape_string(x.shape()) + ", expected width " +
                                  std::to_string(width));
    }
  };
  check(x_t, d, "x_t");
  check(x_ve, d, "x_ve");
  check(x_v, d, "x_v");
  check(x_s, 3, "x_s");
  const std::vector<Var> parts{x_t, x_ve, x_v, x_s};
  return ops::concat_cols(parts);
}

}  // namespace emfend::fusion
