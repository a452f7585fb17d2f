#include "emfend/synthetic/generator.hpp"

#include <set>
#include <stdexcept>

#include "emfend/encoders/visual.hpp"
#include "emfend/numerics/random.hpp"

namespace emfend::synthetic {

using corpus::EntityKind;
using corpus::EntityMention;
using corpus::NewsPost;
using corpus::Tokens;
using numerics::Rng;

namespace {

const std::vector<std::string> kFakeWords{"shocking", "hoax",     "exposed",  "secret",  "banned",
                                          "miracle",  "coverup",  "outrage",  "leaked",  "scandal",
                                          "rigged",   "conspiracy"};
const std::vector<std::string> kRealWords{"official", "report",   "confirmed", "statement", "announced",
                                          "according", "ministry", "published", "agency",    "update",
                                          "schedule",  "briefing"};

// Pronounceable pseudo-words, unique within one pool.
std::vector<std::string> word_pool(Rng& rng, std::size_t count, std::set<std::string>& taken) {
  static const char* consonants = "bdfgklmnprstvz";
  static const char* vowels = "aeiou";
  std::vector<std::string> out;
  while (out.size() < count) {
    std::string w;
    const std::size_t syllables = 2 + rng.below(2);
    for (std::size_t s = 0; s < syllables; ++s) {
      w += consonants[rng.below(14)];
      w += vowels[rng.below(5)];
    }
    if (rng.bernoulli(0.5)) w += consonants[rng.below(14)];
    if (taken.insert(w).second) out.push_back(w);
  }
  return out;
}

const std::string& pick(const std::vector<std::string>& pool, Rng& rng) {
  return pool[rng.below(pool.size())];
}

std::string pick_other(const std::vector<std::string>& pool, const std::string& avoid, Rng& rng) {
  for (;;) {
    const std::string& w = pick(pool, rng);
    if (w != avoid) return w;
  }
}

Tokens filler(const std::vector<std::string>& pool, std::size_t lo, std::size_t hi, Rng& rng) {
  Tokens out;
  const std::size_t n = lo + rng.below(hi - lo + 1);
  for (std::size_t i = 0; i < n; ++i) out.push_back(pick(pool, rng));
  return out;
}

void insert_at_random(Tokens& tokens, const std::string& word, Rng& rng) {
  tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(rng.below(tokens.size() + 1)), word);
}

double visual_confidence(Rng& rng) { return rng.uniform(0.6, 1.0); }

struct Pools {
  std::vector<std::string> filler;
  std::vector<std::string> people;
  std::vector<std::string> places;
  std::vector<std::string> contexts;
  std::vector<std::string> class_words[2];
};

Pools make_pools(Rng& rng) {
  std::set<std::string> taken(kFakeWords.begin(), kFakeWords.end());
  taken.insert(kRealWords.begin(), kRealWords.end());
  Pools p;
  p.filler = word_pool(rng, 400, taken);
  p.people = word_pool(rng, 300, taken);
  p.places = word_pool(rng, 60, taken);
  p.contexts = word_pool(rng, 60, taken);
  p.class_words[0] = word_pool(rng, 40, taken);
  p.class_words[1] = word_pool(rng, 40, taken);
  return p;
}

void entity_mismatch(NewsPost& post, int label, const Pools& p, Rng& rng) {
  const std::string person = pick(p.people, rng);
  const std::string place = pick(p.places, rng);
  post.text = filler(p.filler, 8, 16, rng);
  insert_at_random(post.text, person, rng);
  insert_at_random(post.text, place, rng);
  post.textual_entities = {{{person}, EntityKind::person, 1.0}, {{place}, EntityKind::location, 1.0}};
  const std::string shown = label == corpus::kLabelFake ? pick_other(p.people, person, rng) : person;
  post.visual_entities = {{{shown}, EntityKind::person, visual_confidence(rng)}};
  if (rng.bernoulli(0.5)) {
    post.visual_entities.push_back({{place}, EntityKind::location, visual_confidence(rng)});
  }
}

void aligned_keyword(NewsPost& post, int label, const Pools& p, Rng& rng) {
  const std::string keyword = pick(label == corpus::kLabelFake ? kFakeWords : kRealWords, rng);
  const std::string other = pick(label == corpus::kLabelFake ? kRealWords : kFakeWords, rng);
  post.text = filler(p.filler, 8, 16, rng);
  insert_at_random(post.text, keyword, rng);
  insert_at_random(post.text, other, rng);
  post.textual_entities = {{{keyword}, EntityKind::context, 1.0}, {{other}, EntityKind::context, 1.0}};
  post.visual_entities = {{{keyword}, EntityKind::context, visual_confidence(rng)}};
}

void ocr_story(NewsPost& post, int label, const Pools& p, Rng& rng) {
  post.text = filler(p.filler, 6, 12, rng);
  post.ocr_text = filler(p.filler, 3, 8, rng);
  const auto& words = label == corpus::kLabelFake ? kFakeWords : kRealWords;
  const std::size_t k = 2 + rng.below(2);
  for (std::size_t i = 0; i < k; ++i) insert_at_random(post.ocr_text, pick(words, rng), rng);
  const std::string person = pick(p.people, rng);
  insert_at_random(post.text, person, rng);
  post.textual_entities = {{{person}, EntityKind::person, 1.0}};
  post.visual_entities = {{{person}, EntityKind::person, visual_confidence(rng)}};
}

void separable(NewsPost& post, int label, const Pools& p, Rng& rng) {
  post.text = filler(p.class_words[label], 6, 12, rng);
}

}  // namespace

const std::vector<std::string>& kind_names() {
  static const std::vector<std::string> names{"entity-mismatch", "aligned-keyword", "ocr-story",
                                              "separable"};
  return names;
}

std::string to_string(Kind kind) { return kind_names()[static_cast<std::size_t>(kind)]; }

Kind parse_kind(std::string_view name) {
  const auto& names = kind_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<Kind>(i);
  }
  std::string valid;
  for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown synthetic kind '" + std::string(name) + "'; valid: " + valid);
}

std::vector<NewsPost> generate(const Options& options) {
  if (options.n == 0) throw std::invalid_argument("synthetic: n must be positive");
  if (options.visual_width == 0) throw std::invalid_argument("synthetic: visual width must be positive");
  if (!(options.noise >= 0.0 && options.noise <= 1.0)) {
    throw std::invalid_argument("synthetic: noise must lie in [0, 1]");
  }
  Rng rng(options.seed);
  const Pools pools = make_pools(rng);

  std::vector<int> labels(options.n);
  for (std::size_t i = 0; i < options.n; ++i) labels[i] = static_cast<int>(i % 2);
  rng.shuffle(std::span<int>(labels));

  std::vector<NewsPost> posts(options.n);
  for (std::size_t i = 0; i < options.n; ++i) {
    NewsPost& post = posts[i];
    post.id = to_string(options.kind) + "-" + std::to_string(options.seed) + "-" + std::to_string(i);
    switch (options.kind) {
      case Kind::entity_mismatch: entity_mismatch(post, labels[i], pools, rng); break;
      case Kind::aligned_keyword: aligned_keyword(post, labels[i], pools, rng); break;
      case Kind::ocr_story: ocr_story(post, labels[i], pools, rng); break;
      case Kind::separable: separable(post, labels[i], pools, rng); break;
    }
    post.visual_regions =
        encoders::synth_visual_features(post.id, options.seed, options.visual_width, options.regions);
    post.label = rng.bernoulli(options.noise) ? 1 - labels[i] : labels[i];
  }
  return posts;
}

}  // namespace emfend::synthetic
