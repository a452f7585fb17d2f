#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "emfend/error.hpp"
#include "emfend/model/checkpoint.hpp"
#include "emfend/model/em_fend.hpp"
#include "emfend/model/train.hpp"
#include "emfend/numerics/ops.hpp"
#include "emfend/synthetic/generator.hpp"
#include "oracles.hpp"

namespace emfend::model {
namespace {

using numerics::Shape;

ModelConfig small_config() {
  ModelConfig c;
  c.d = 8;
  c.heads = 2;
  c.L_max = 32;
  c.encoder_layers = 1;
  c.vocab_size = 1024;
  c.d_visual = 8;
  c.batch_size = 16;
  c.max_epochs = 3;
  c.patience = 2;
  c.lr = 1e-2;
  c.dropout = 0.1;
  return c;
}

std::vector<corpus::NewsPost> posts(synthetic::Kind kind, std::size_t n, std::uint64_t seed = 1) {
  synthetic::Options o;
  o.kind = kind;
  o.n = n;
  o.seed = seed;
  o.visual_width = 8;
  return synthetic::generate(o);
}

TEST(ModelConfig, JsonRoundTrip) {
  ModelConfig c = small_config();
  c.use_ocr = false;
  c.positive_class_weight = 2.5;
  c.seed = 12345678901ULL;
  EXPECT_EQ(config_from_json(to_json(c)), c);
}

TEST(ModelConfig, DefaultValues) {
  const ModelConfig c;
  EXPECT_EQ(c.d, 256u);
  EXPECT_EQ(c.heads, 8u);
  EXPECT_EQ(c.L_max, 256u);
  EXPECT_EQ(c.dropout, 0.3);
  EXPECT_EQ(c.batch_size, 64u);
  EXPECT_EQ(c.max_epochs, 100u);
  EXPECT_EQ(c.patience, 10u);
  EXPECT_EQ(c.lr, 1e-3);
}

TEST(ModelConfig, StrictParsing) {
  EXPECT_EQ(config_from_json(R"({"d": 16, "heads": 4})").d, 16u);
  EXPECT_THROW(config_from_json(R"({"d": 16, "use_ocrr": false})"), DataError);
  EXPECT_THROW(config_from_json(R"({"use_ocr": 1})"), DataError);
  EXPECT_THROW(config_from_json(R"({"d": -4})"), DataError);
  EXPECT_THROW(config_from_json(R"({"d": 10, "heads": 4})"), DataError);
  EXPECT_THROW(config_from_json(R"({"dropout": 1.0})"), DataError);
  EXPECT_THROW(config_from_json("[1, 2]"), DataError);
  EXPECT_THROW(config_from_json("{"), DataError);
  try {
    config_from_json(R"({"use_ocrr": false})");
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("use_ocrr"), std::string::npos);
  }
}

TEST(Ablation, SingleFlagVariants) {
  const ModelConfig base;
  const ModelConfig no_ocr = apply_ablation(base, "w/o OCR text");
  ModelConfig expected = base;
  expected.use_ocr = false;
  EXPECT_EQ(no_ocr, expected);

  expected = base;
  expected.finetune_visual_projection = false;
  EXPECT_EQ(apply_ablation(base, "w/o FT VGG feature"), expected);
  expected = base;
  expected.use_coattention_ve = false;
  EXPECT_EQ(apply_ablation(base, "w/o co-attention-ve"), expected);
  expected = base;
  expected.use_coattention_vf = false;
  EXPECT_EQ(apply_ablation(base, "w/o co-attention-vf"), expected);
  expected = base;
  expected.use_entity_consistency = false;
  EXPECT_EQ(apply_ablation(base, "w/o entity consistency"), expected);
}

TEST(Ablation, VisualEntitiesGroup) {
  const ModelConfig c = apply_ablation(ModelConfig{}, "w/o visual entities");
  EXPECT_FALSE(c.use_visual_entities);
  EXPECT_FALSE(c.use_coattention_ve);
  EXPECT_FALSE(c.use_entity_consistency);
  EXPECT_TRUE(c.use_ocr);
  EXPECT_TRUE(c.use_coattention_vf);
  EXPECT_TRUE(c.finetune_visual_projection);
}

TEST(Ablation, UnknownNameListsValidOnes) {
  try {
    apply_ablation(ModelConfig{}, "w/o everything");
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    for (const auto& name : ablation_names()) {
      EXPECT_NE(std::string(e.what()).find(name), std::string::npos) << name;
    }
  }
  EXPECT_EQ(ablation_names().size(), 6u);
}

TEST(Classify, Examples) {
  const Var zeros_w = Var::constant(Tensor(Shape{5, 2}, 0.0));
  const Var x = Var::constant(Tensor::matrix(1, 5, {1, -2, 3, 0.5, 7}));
  const Tensor even = classify(x, zeros_w, Var::constant(Tensor(Shape{2}, 0.0))).value();
  EXPECT_EQ(even[0], 0.5);
  EXPECT_EQ(even[1], 0.5);

  const Tensor dominant = classify(x, zeros_w, Var::constant(Tensor::vector({0, 10}))).value();
  EXPECT_NEAR(dominant[1], 1.0, 1e-4);

  numerics::Rng rng(3);
  Tensor w(Shape{5, 2});
  for (auto& v : w.data()) v = rng.normal();
  const Tensor b = Tensor::vector({0.3, -0.2});
  const Tensor p = classify(x, Var::constant(w), Var::constant(b)).value();
  oracle::Vector logits{b[0], b[1]};
  for (std::size_t k = 0; k < 5; ++k) {
    logits[0] += x.value()[k] * w.at(k, 0);
    logits[1] += x.value()[k] * w.at(k, 1);
  }
  const oracle::Vector expected = oracle::softmax(logits);
  EXPECT_NEAR(p[0], expected[0], 1e-15);
  EXPECT_NEAR(p[1], expected[1], 1e-15);
}

TEST(Loss, Examples) {
  EXPECT_NEAR(loss({"", 0.0, 1.0}, 1), 0.0, 1e-11);
  EXPECT_NEAR(loss({"", 0.5, 0.5}, 0), std::log(2.0), 1e-12);
  EXPECT_NEAR(loss({"", 0.5, 0.5}, 1), 0.693147, 1e-6);
  EXPECT_NEAR(loss({"", 0.9, 0.1}, 1), 2.302585, 1e-6);
  EXPECT_NEAR(loss({"", 1.0, 0.0}, 1), -std::log(1e-12), 1e-9);
  EXPECT_GE(loss({"", 0.3, 0.7}, 0), 0.0);
}

TEST(Forward, ProbabilitiesFormADistribution) {
  const EmFend model(small_config());
  for (const auto& post : posts(synthetic::Kind::entity_mismatch, 20)) {
    const Prediction p = model.predict(post);
    EXPECT_NEAR(p.p_real + p.p_fake, 1.0, 1e-9);
    EXPECT_GE(p.p_real, 0.0);
    EXPECT_GE(p.p_fake, 0.0);
    EXPECT_EQ(p.id, post.id);
  }
}

TEST(Forward, DeterministicWithoutDropout) {
  const EmFend model(small_config());
  const auto data = posts(synthetic::Kind::aligned_keyword, 4);
  for (const auto& post : data) {
    EXPECT_EQ(model.forward(post).value(), model.forward(post).value());
  }
  numerics::Rng a(5), b(5);
  EXPECT_EQ(model.forward(data[0], &a).value(), model.forward(data[0], &b).value());
}

TEST(Forward, SameSeedSameInitialisation) {
  const EmFend a(small_config());
  const EmFend b(small_config());
  EXPECT_EQ(a.parameters().snapshot(), b.parameters().snapshot());
  ModelConfig other = small_config();
  other.seed = 99;
  const EmFend c(other);
  EXPECT_NE(a.parameters().snapshot(), c.parameters().snapshot());
}

TEST(Forward, ConsistencyAblationUsesConstantOnes) {
  const ModelConfig full = small_config();
  const ModelConfig ablated = apply_ablation(full, "w/o entity consistency");
  const EmFend with(full);
  const EmFend without(ablated);
  const auto data = posts(synthetic::Kind::entity_mismatch, 10);
  bool differs = false;
  for (const auto& post : data) {
    EXPECT_EQ(without.trace(post).x_s.value(), Tensor(Shape{1, 3}, 1.0));
    differs = differs || with.trace(post).x_s.value() != Tensor(Shape{1, 3}, 1.0);
    differs = differs || with.predict(post).p_fake != without.predict(post).p_fake;
  }
  EXPECT_TRUE(differs);
}

TEST(Forward, FeatureWidths) {
  const EmFend model(small_config());
  const ForwardTrace t = model.trace(posts(synthetic::Kind::ocr_story, 1)[0]);
  EXPECT_EQ(t.x_m.shape(), (Shape{1, 3 * 8 + 3}));
  EXPECT_EQ(t.probs.shape(), (Shape{1, 2}));
}

TEST(Forward, VisualEntityAblationZeroesEntityFeature) {
  const EmFend model(apply_ablation(small_config(), "w/o visual entities"));
  EXPECT_FALSE(model.parameters().contains("fusion.ve_sentinel"));
  const ForwardTrace t = model.trace(posts(synthetic::Kind::entity_mismatch, 1)[0]);
  EXPECT_EQ(t.x_ve.value(), Tensor(Shape{1, 8}, 0.0));
  EXPECT_EQ(t.x_s.value(), Tensor(Shape{1, 3}, 1.0));
}

TEST(Forward, FrozenProjectionIsNotTrainable) {
  const EmFend model(apply_ablation(small_config(), "w/o FT VGG feature"));
  EXPECT_FALSE(model.parameters().trainable("visual.proj.w"));
  EXPECT_FALSE(model.parameters().trainable("visual.proj.b"));
  EXPECT_TRUE(model.parameters().trainable("head.w"));
}

TEST(Forward, PrecomputedTextFeaturesBypassEncoder) {
  const EmFend model(small_config());
  corpus::NewsPost post = posts(synthetic::Kind::separable, 1)[0];
  corpus::FeatureMatrix f{3, 8, std::vector<float>(24, 0.25f)};
  post.text_features = f;
  const ForwardTrace t = model.trace(post);
  const ModelConfig no_stage = [] {
    ModelConfig c = small_config();
    c.use_coattention_vf = false;
    c.use_coattention_ve = false;
    return c;
  }();
  const EmFend pooled(no_stage);
  EXPECT_EQ(pooled.trace(post).x_t.value(), Tensor(Shape{1, 8}, 0.25));
  EXPECT_EQ(t.x_t.shape(), (Shape{1, 8}));

  post.text_features = corpus::FeatureMatrix{3, 5, std::vector<float>(15, 0.0f)};
  EXPECT_THROW(model.trace(post), DataError);
}

TEST(Forward, RegionShapeMismatchIsDataError) {
  const EmFend model(small_config());
  corpus::NewsPost post = posts(synthetic::Kind::separable, 1)[0];
  post.visual_regions.rows = 10;
  post.visual_regions.values.resize(10 * 8);
  EXPECT_THROW(model.trace(post), DataError);
  post = posts(synthetic::Kind::separable, 1)[0];
  ModelConfig wide = small_config();
  wide.d_visual = 12;
  EXPECT_THROW(EmFend(wide).trace(post), DataError);
}

TEST(Fit, EmptyTrainingSetIsAnError) {
  EmFend model(small_config());
  EXPECT_THROW(fit(model, {}, {}), std::invalid_argument);
}

TEST(Fit, SameSeedSameHistory) {
  const auto data = posts(synthetic::Kind::aligned_keyword, 48);
  const std::span<const corpus::NewsPost> all(data);
  EmFend a(small_config());
  EmFend b(small_config());
  std::ostringstream ha, hb;
  write_history_csv(ha, fit(a, all.subspan(0, 32), all.subspan(32)));
  write_history_csv(hb, fit(b, all.subspan(0, 32), all.subspan(32)));
  EXPECT_EQ(ha.str(), hb.str());
  EXPECT_EQ(serialize_checkpoint(a), serialize_checkpoint(b));
}

TEST(Fit, ZeroPatienceStopsAfterFirstNonImprovingEpoch) {
  const auto data = posts(synthetic::Kind::entity_mismatch, 40);
  const std::span<const corpus::NewsPost> all(data);
  ModelConfig c = small_config();
  c.patience = 0;
  c.max_epochs = 50;
  EmFend model(c);
  const History h = fit(model, all.subspan(0, 24), all.subspan(24));
  ASSERT_FALSE(h.epochs.empty());
  if (h.stopped_early) {
    const auto& last = h.epochs.back();
    double best_before = -1.0;
    for (std::size_t i = 0; i + 1 < h.epochs.size(); ++i) {
      EXPECT_GT(h.epochs[i].validation.accuracy, best_before) << "epoch " << i + 1;
      best_before = std::max(best_before, h.epochs[i].validation.accuracy);
    }
    EXPECT_LE(last.validation.accuracy, best_before);
  } else {
    EXPECT_EQ(h.epochs.size(), 50u);
  }
}

TEST(Fit, ReturnsBestValidationParameters) {
  const auto data = posts(synthetic::Kind::aligned_keyword, 60, 3);
  const std::span<const corpus::NewsPost> all(data);
  ModelConfig c = small_config();
  c.max_epochs = 8;
  c.patience = 8;
  EmFend model(c);
  const History h = fit(model, all.subspan(0, 40), all.subspan(40));
  double best = 0.0;
  for (const auto& e : h.epochs) best = std::max(best, e.validation.accuracy);
  EXPECT_EQ(h.epochs[h.best_epoch - 1].validation.accuracy, best);
  EXPECT_EQ(evaluate(model, all.subspan(40)).accuracy, best);
}

TEST(Fit, TextOnlyModelStillLearns) {
  ModelConfig c = small_config();
  c.use_visual_entities = false;
  c.use_coattention_ve = false;
  c.use_coattention_vf = false;
  c.use_entity_consistency = false;
  c.use_ocr = false;
  c.finetune_visual_projection = false;
  c.max_epochs = 6;
  c.patience = 6;
  c.dropout = 0.0;
  EmFend model(c);
  const auto data = posts(synthetic::Kind::separable, 32);
  const History h = fit(model, data, data);
  EXPECT_LT(h.epochs.back().train_loss, h.epochs.front().train_loss);
}

TEST(Fit, HistoryCsvShape) {
  History h;
  h.epochs.push_back({1, 0.5, {}});
  h.epochs.back().validation.accuracy = 0.75;
  h.epochs.back().validation.f1 = 0.5;
  std::ostringstream out;
  write_history_csv(out, h);
  EXPECT_EQ(out.str(), "epoch,train_loss,val_acc,val_f1\n1,0.5,0.75,0.5\n");
}

TEST(Checkpoint, RoundTripIsBitwise) {
  const auto data = posts(synthetic::Kind::ocr_story, 24);
  ModelConfig c = apply_ablation(small_config(), "w/o FT VGG feature");
  c.max_epochs = 1;
  EmFend model(c);
  fit(model, data, {});
  const std::string bytes = serialize_checkpoint(model);
  const auto loaded = deserialize_checkpoint(bytes);
  EXPECT_EQ(loaded->config(), model.config());
  EXPECT_EQ(loaded->parameters().snapshot(), model.parameters().snapshot());
  EXPECT_FALSE(loaded->parameters().trainable("visual.proj.w"));
  EXPECT_EQ(serialize_checkpoint(*loaded), bytes);
  EXPECT_EQ(loaded->predict(data[0]).p_fake, model.predict(data[0]).p_fake);
}

TEST(Checkpoint, CorruptInputsAreDataErrors) {
  const EmFend model(small_config());
  const std::string bytes = serialize_checkpoint(model);
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, bytes.size() - 3)), DataError);
  EXPECT_THROW(deserialize_checkpoint("NOTACKPT" + bytes.substr(8)), DataError);
  std::string versioned = bytes;
  versioned[8] = 9;
  EXPECT_THROW(deserialize_checkpoint(versioned), DataError);
  EXPECT_THROW(deserialize_checkpoint(bytes + "x"), DataError);
  EXPECT_THROW(load_checkpoint("/nonexistent/checkpoint.bin"), DataError);
}

}  // namespace
}  // namespace emfend::model
