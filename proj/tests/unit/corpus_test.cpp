#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "emfend/corpus/jsonl.hpp"
#include "emfend/corpus/split.hpp"
#include "emfend/corpus/text.hpp"
#include "emfend/error.hpp"
#include "emfend/numerics/random.hpp"

namespace emfend::corpus {
namespace {

std::string regions_json(std::size_t rows, std::size_t cols, double value = 0.5) {
  std::string out = "[";
  for (std::size_t r = 0; r < rows; ++r) {
    out += r ? ",[" : "[";
    for (std::size_t c = 0; c < cols; ++c) {
      if (c) out += ',';
      out += std::to_string(value);
    }
    out += ']';
  }
  return out + "]";
}

std::string minimal_record(const std::string& label = "1") {
  return R"({"id":"p1","text":["a","b"],"label":)" + label +
         R"(,"visual_regions":)" + regions_json(49, 4) + "}";
}

TEST(ParseRecord, MissingOptionalFieldsDefaultToEmpty) {
  const NewsPost post = parse_record(minimal_record());
  EXPECT_EQ(post.id, "p1");
  EXPECT_EQ(post.text, (Tokens{"a", "b"}));
  EXPECT_TRUE(post.ocr_text.empty());
  EXPECT_TRUE(post.textual_entities.empty());
  EXPECT_TRUE(post.visual_entities.empty());
  EXPECT_EQ(post.label, kLabelFake);
  EXPECT_FALSE(post.event_id.has_value());
}

TEST(ParseRecord, LabelOutOfRange) {
  try {
    parse_record(minimal_record("2"), 7);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("label out of range"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("line 7"), std::string::npos);
  }
}

TEST(ParseRecord, FullSizeRegionGrid) {
  const std::string line = R"({"id":"x","text":["t"],"label":0,"visual_regions":)" +
                           regions_json(49, 512) + "}";
  ParseOptions options;
  options.visual_width = 512;
  const NewsPost post = parse_record(line, 1, options);
  EXPECT_EQ(post.visual_regions.rows, 49u);
  EXPECT_EQ(post.visual_regions.cols, 512u);
}

void expect_error_mentions(const std::string& line, const std::string& needle,
                           const ParseOptions& options = {}) {
  try {
    parse_record(line, 3, options);
    FAIL() << "expected DataError for " << needle;
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(ParseRecord, DescriptiveErrors) {
  const std::string regions = regions_json(49, 4);
  expect_error_mentions(R"({"text":["a"],"label":0,"visual_regions":)" + regions + "}", "'id'");
  expect_error_mentions(R"({"id":"a","label":0,"visual_regions":)" + regions + "}", "'text'");
  expect_error_mentions(R"({"id":"a","text":[],"visual_regions":)" + regions + "}", "'label'");
  expect_error_mentions(R"({"id":"a","text":[],"label":0,"visual_regions":[["x"]]})",
                        "visual_regions[0][0]");
  expect_error_mentions(R"({"id":"a","text":[],"label":0,"visual_regions":)" +
                            regions_json(48, 4) + "}",
                        "49 regions");
  ParseOptions width;
  width.visual_width = 8;
  expect_error_mentions(minimal_record(), "region width", width);
  expect_error_mentions("{not json", "malformed JSON");
  expect_error_mentions(R"({"id":"a","text":[],"label":0,"visual_regions":)" + regions +
                            R"(,"visual_entities":[{"surface":["x"],"kind":"person","confidence":0}]})",
                        "confidence");
  expect_error_mentions(R"({"id":"a","text":[],"label":0,"visual_regions":)" + regions +
                            R"(,"textual_entities":[{"surface":["x"],"kind":"person","confidence":0.5}]})",
                        "textual entities must have confidence 1");
  expect_error_mentions(R"({"id":"a","text":[],"label":0,"visual_regions":)" + regions +
                            R"(,"visual_entities":[{"surface":["x"],"kind":"animal"}]})",
                        "kind");
}

TEST(ParseRecord, UnknownFieldsIgnored) {
  std::string line = minimal_record();
  line.insert(1, R"("source":"somewhere","likes":12,)");
  EXPECT_NO_THROW(parse_record(line));
}

NewsPost random_post(numerics::Rng& rng, std::size_t index) {
  auto word = [&rng] {
    std::string w;
    const std::size_t len = 1 + rng.below(6);
    for (std::size_t i = 0; i < len; ++i) w += static_cast<char>('a' + rng.below(26));
    return w;
  };
  auto words = [&](std::size_t max) {
    Tokens t;
    const std::size_t n = rng.below(max + 1);
    for (std::size_t i = 0; i < n; ++i) t.push_back(word());
    return t;
  };
  NewsPost post;
  post.id = "post-\"" + std::to_string(index) + "\\";
  post.text = words(8);
  post.ocr_text = words(4);
  for (std::size_t i = rng.below(3); i > 0; --i) {
    post.textual_entities.push_back({{word(), word()}, kEntityKinds[rng.below(3)], 1.0});
  }
  for (std::size_t i = rng.below(3); i > 0; --i) {
    post.visual_entities.push_back({{word()}, kEntityKinds[rng.below(3)], rng.uniform(0.01, 1.0)});
  }
  post.visual_regions.rows = 49;
  post.visual_regions.cols = 3;
  for (std::size_t i = 0; i < 49 * 3; ++i) {
    post.visual_regions.values.push_back(static_cast<float>(rng.normal() * 100.0));
  }
  if (rng.bernoulli(0.5)) {
    FeatureMatrix features{2, 2, {0.1f, -3.5e-7f, 12345.678f, 1.0f}};
    post.text_features = features;
  }
  post.label = static_cast<int>(rng.below(2));
  if (rng.bernoulli(0.5)) post.event_id = static_cast<int>(rng.below(100));
  return post;
}

TEST(Jsonl, SerializeParseRoundTrip) {
  numerics::Rng rng(77);
  for (std::size_t i = 0; i < 50; ++i) {
    const NewsPost post = random_post(rng, i);
    const NewsPost again = parse_record(serialize_record(post));
    EXPECT_EQ(again, post) << serialize_record(post);
    EXPECT_EQ(serialize_record(again), serialize_record(post));
  }
}

TEST(Jsonl, DatasetFileRoundTripAndDuplicateIds) {
  numerics::Rng rng(3);
  std::vector<NewsPost> posts;
  for (std::size_t i = 0; i < 5; ++i) posts.push_back(random_post(rng, i));
  const auto path = std::filesystem::temp_directory_path() / "emfend_corpus_test.jsonl";
  write_dataset(path, posts);
  EXPECT_EQ(read_dataset(path), posts);

  posts.push_back(posts.front());
  write_dataset(path, posts);
  EXPECT_THROW(read_dataset(path), DataError);
  std::filesystem::remove(path);
}

// --- clustering --------------------------------------------------------------

NewsPost text_post(const std::string& id, Tokens text) {
  NewsPost post;
  post.id = id;
  post.text = std::move(text);
  return post;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return (na == 0 || nb == 0) ? 0.0 : dot / std::sqrt(na * nb);
}

TEST(EmbedForClustering, IdenticalTextsIdenticalVectors) {
  const auto a = embed_for_clustering(text_post("a", {"storm", "hits", "coast"}), 64);
  const auto b = embed_for_clustering(text_post("b", {"storm", "hits", "coast"}), 64);
  EXPECT_EQ(a, b);
  EXPECT_NEAR(cosine(a, a), 1.0, 1e-12);
}

TEST(EmbedForClustering, EmptyTextIsZero) {
  const auto v = embed_for_clustering(text_post("a", {}), 16);
  EXPECT_TRUE(std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; }));
}

TEST(EmbedForClustering, DisjointVocabulariesAreOrthogonal) {
  const Tokens vocab{"alpha", "bravo", "charlie", "delta", "echo",
                     "foxtrot", "golf", "hotel", "india", "juliet"};
  std::set<std::uint64_t> buckets;
  for (const auto& t : vocab) buckets.insert(fnv1a64(t) % 1024);
  ASSERT_EQ(buckets.size(), vocab.size()) << "fixture vocabulary collides at dim 1024";
  const auto a = embed_for_clustering(text_post("a", {"alpha", "bravo", "charlie", "alpha"}), 1024);
  const auto b = embed_for_clustering(text_post("b", {"delta", "echo", "juliet"}), 1024);
  EXPECT_EQ(cosine(a, b), 0.0);
}

TEST(EmbedForClustering, RejectsTinyDimension) {
  EXPECT_THROW(embed_for_clustering(text_post("a", {"x"}), 7), std::invalid_argument);
}

TEST(KMeans, RecoversWellSeparatedGroups) {
  numerics::Rng rng(5);
  std::vector<std::vector<double>> points;
  for (int g = 0; g < 2; ++g) {
    for (int i = 0; i < 20; ++i) {
      // intra-group spread 1, group centres 10 apart
      points.push_back({g * 10.0 + rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)});
    }
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto labels = kmeans_cluster(points, 2, seed);
    for (int i = 1; i < 20; ++i) EXPECT_EQ(labels[i], labels[0]);
    for (int i = 21; i < 40; ++i) EXPECT_EQ(labels[i], labels[20]);
    EXPECT_NE(labels[0], labels[20]);
  }
}

TEST(KMeans, KEqualsNGivesSingletons) {
  const std::vector<std::vector<double>> points{{0, 0}, {1, 0}, {0, 1}, {5, 5}, {2, 3}};
  const auto labels = kmeans_cluster(points, 5, 9);
  EXPECT_EQ(std::set<std::size_t>(labels.begin(), labels.end()).size(), 5u);
}

TEST(KMeans, SeededAndValidated) {
  numerics::Rng rng(1);
  std::vector<std::vector<double>> points;
  for (int i = 0; i < 60; ++i) points.push_back({rng.normal(), rng.normal(), rng.normal()});
  EXPECT_EQ(kmeans_cluster(points, 4, 11), kmeans_cluster(points, 4, 11));
  EXPECT_THROW(kmeans_cluster(points, 0, 1), std::invalid_argument);
  EXPECT_THROW(kmeans_cluster(points, 61, 1), std::invalid_argument);
}

// --- event split ---------------------------------------------------------------

std::vector<NewsPost> posts_with_events(const std::vector<std::size_t>& sizes) {
  std::vector<NewsPost> posts;
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    for (std::size_t i = 0; i < sizes[c]; ++i) {
      NewsPost p = text_post("c" + std::to_string(c) + "_" + std::to_string(i), {"x"});
      p.event_id = static_cast<int>(c);
      posts.push_back(std::move(p));
    }
  }
  return posts;
}

void expect_clusters_intact(const std::vector<NewsPost>& posts, const SplitAssignment& split) {
  std::map<int, Split> seen;
  for (const auto& p : posts) {
    const Split s = split.by_id.at(p.id);
    auto [it, inserted] = seen.emplace(*p.event_id, s);
    if (!inserted) {
      EXPECT_EQ(it->second, s) << "event " << *p.event_id << " spans two splits";
    }
  }
}

TEST(EventSplit, FiveEqualClusters) {
  const auto posts = posts_with_events({10, 10, 10, 10, 10});
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SplitAssignment split = event_split(posts, {}, seed);
    EXPECT_EQ(split.counts(), (std::array<std::size_t, 3>{30, 10, 10}));
    expect_clusters_intact(posts, split);
  }
}

TEST(EventSplit, RandomClusterSizesStayNearTargets) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    numerics::Rng rng(seed);
    std::vector<std::size_t> sizes(100);
    for (auto& s : sizes) s = 1 + rng.below(20);
    const auto posts = posts_with_events(sizes);
    const SplitAssignment split = event_split(posts, {}, seed);
    expect_clusters_intact(posts, split);
    const auto counts = split.counts();
    const double n = static_cast<double>(posts.size());
    const double biggest = static_cast<double>(*std::max_element(sizes.begin(), sizes.end()));
    const std::array<double, 3> target{n * 0.6, n * 0.2, n * 0.2};
    for (std::size_t s = 0; s < 3; ++s) {
      EXPECT_LE(std::abs(static_cast<double>(counts[s]) - target[s]), biggest) << "seed " << seed;
      EXPECT_LE(std::abs(static_cast<double>(counts[s]) - target[s]) / target[s], 0.10);
    }
  }
}

TEST(EventSplit, FewerThanThreeClustersIsAnError) {
  EXPECT_THROW(event_split(posts_with_events({5, 5}), {}, 1), DataError);
}

TEST(EventSplit, ClustersTextsWhenNoEventIds) {
  std::vector<NewsPost> posts;
  const std::vector<Tokens> topics{{"flood", "river", "rain"}, {"election", "vote", "ballot"},
                                   {"match", "goal", "striker"}, {"quake", "tremor", "magnitude"},
                                   {"vaccine", "clinic", "dose"}};
  for (std::size_t t = 0; t < topics.size(); ++t) {
    for (std::size_t i = 0; i < 8; ++i) {
      posts.push_back(text_post("t" + std::to_string(t) + "_" + std::to_string(i), topics[t]));
    }
  }
  EventSplitOptions options;
  options.clusters = 5;
  const SplitAssignment split = event_split(posts, {}, 4, options);
  EXPECT_EQ(split.by_id.size(), posts.size());
  // Posts sharing a topic share identical vectors, so they stay together.
  for (std::size_t t = 0; t < topics.size(); ++t) {
    const Split first = split.by_id.at("t" + std::to_string(t) + "_0");
    for (std::size_t i = 1; i < 8; ++i) {
      EXPECT_EQ(split.by_id.at("t" + std::to_string(t) + "_" + std::to_string(i)), first);
    }
  }
  EXPECT_EQ(event_split(posts, {}, 4, options).by_id, split.by_id);
}

TEST(EventSplit, SplitFileRoundTrip) {
  const auto posts = posts_with_events({4, 3, 2, 6});
  const SplitAssignment split = event_split(posts, {}, 2);
  const auto path = std::filesystem::temp_directory_path() / "emfend_split_test.json";
  write_split(path, split, 2);
  EXPECT_EQ(read_split(path).by_id, split.by_id);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace emfend::corpus
