#include <gtest/gtest.h>

#include <set>

#include "emfend/corpus/jsonl.hpp"
#include "emfend/encoders/text_encoder.hpp"
#include "emfend/fusion/consistency.hpp"
#include "emfend/synthetic/generator.hpp"

namespace emfend::synthetic {
namespace {

std::vector<corpus::NewsPost> make(Kind kind, std::size_t n, std::uint64_t seed = 0) {
  Options o;
  o.kind = kind;
  o.n = n;
  o.seed = seed;
  return generate(o);
}

TEST(Generator, DeterministicAndBalanced) {
  for (const auto& name : kind_names()) {
    const Kind kind = parse_kind(name);
    const auto a = make(kind, 101, 4);
    EXPECT_EQ(a, make(kind, 101, 4)) << name;
    EXPECT_NE(a, make(kind, 101, 5)) << name;
    std::size_t fakes = 0;
    std::set<std::string> ids;
    for (const auto& p : a) {
      fakes += static_cast<std::size_t>(p.label);
      ids.insert(p.id);
      EXPECT_EQ(p.visual_regions.rows, 49u);
      EXPECT_EQ(p.visual_regions.cols, 16u);
    }
    EXPECT_EQ(fakes, 50u) << name;
    EXPECT_EQ(ids.size(), a.size());
  }
}

TEST(Generator, OptionValidation) {
  EXPECT_THROW(parse_kind("entity_mismatch"), std::invalid_argument);
  Options o;
  o.n = 0;
  EXPECT_THROW(generate(o), std::invalid_argument);
  o.n = 4;
  o.noise = 1.5;
  EXPECT_THROW(generate(o), std::invalid_argument);
}

TEST(Generator, RecordsPassValidation) {
  for (const auto& name : kind_names()) {
    for (const auto& post : make(parse_kind(name), 30, 2)) {
      corpus::ParseOptions options;
      options.visual_width = 16;
      EXPECT_EQ(corpus::parse_record(corpus::serialize_record(post), 1, options), post);
    }
  }
}

TEST(EntityMismatch, FakesShowAnotherPerson) {
  const auto data = make(Kind::entity_mismatch, 200, 3);
  const encoders::Vocabulary vocab;
  numerics::ParameterStore store;
  numerics::Rng rng(1);
  encoders::TextEncoderConfig config;
  config.width = 16;
  config.layers = 0;
  const encoders::TextEncoder encoder(store, config, rng);
  const fusion::EntityEmbedder embed = [&](const corpus::EntityMention& m) { return encoder.embed_entity(m); };
  double sum[2] = {0, 0};
  double count[2] = {0, 0};
  for (const auto& p : data) {
    const auto text_people = corpus::entities_of_kind(p.textual_entities, corpus::EntityKind::person);
    const auto image_people = corpus::entities_of_kind(p.visual_entities, corpus::EntityKind::person);
    ASSERT_EQ(text_people.size(), 1u);
    ASSERT_EQ(image_people.size(), 1u);
    EXPECT_EQ(text_people[0].surface == image_people[0].surface, p.label == corpus::kLabelReal);
    sum[p.label] += fusion::consistency_vector(p, embed).value()[0];
    count[p.label] += 1;
  }
  EXPECT_LT(sum[1] / count[1], sum[0] / count[0]);
}

TEST(OcrStory, ClassWordsOnlyInEmbeddedText) {
  const auto fakes = make(Kind::ocr_story, 100, 1);
  std::set<std::string> text_vocab[2], ocr_vocab[2];
  for (const auto& p : fakes) {
    text_vocab[p.label].insert(p.text.begin(), p.text.end());
    ocr_vocab[p.label].insert(p.ocr_text.begin(), p.ocr_text.end());
  }
  for (const char* word : {"hoax", "shocking", "leaked"}) {
    EXPECT_EQ(text_vocab[1].count(word), 0u);
    EXPECT_EQ(text_vocab[0].count(word), 0u);
    EXPECT_EQ(ocr_vocab[0].count(word), 0u);
  }
  bool any = false;
  for (const char* word : {"hoax", "shocking", "leaked", "exposed"}) any = any || ocr_vocab[1].count(word);
  EXPECT_TRUE(any);
}

TEST(Separable, DisjointVocabularies) {
  std::set<std::string> vocab[2];
  for (const auto& p : make(Kind::separable, 64)) vocab[p.label].insert(p.text.begin(), p.text.end());
  for (const auto& w : vocab[0]) EXPECT_EQ(vocab[1].count(w), 0u) << w;
}

TEST(Noise, FlipsRoughlyTheRequestedShare) {
  Options clean;
  clean.kind = Kind::separable;
  clean.n = 2000;
  Options noisy = clean;
  noisy.noise = 0.2;
  const auto a = generate(clean);
  const auto b = generate(noisy);
  std::size_t flipped = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    // The flip draw happens either way, so only the labels differ.
    flipped += a[i].label != b[i].label;
  }
  EXPECT_NEAR(static_cast<double>(flipped) / 2000.0, 0.2, 0.04);
}

}  // namespace
}  // namespace emfend::synthetic
