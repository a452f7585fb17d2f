#include "emfend/corpus/split.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "emfend/corpus/text.hpp"
#include "emfend/error.hpp"
#include "emfend/numerics/random.hpp"
#include "json.hpp"

namespace emfend::corpus {

std::vector<double> embed_for_clustering(const NewsPost& post, std::size_t dim) {
  if (dim < 8) throw std::invalid_argument("embed_for_clustering: dim must be at least 8");
  std::vector<double> out(dim, 0.0);
  for (const auto& token : post.text) out[fnv1a64(normalize_token(token)) % dim] += 1.0;
  double norm = 0.0;
  for (double v : out) norm += v * v;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& v : out) v /= norm;
  }
  return out;
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += (a[i] - b[i]) * (a[i] - b[i]);
  return total;
}

std::size_t nearest(std::span<const double> point, const std::vector<std::vector<double>>& centroids) {
  std::size_t best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(point, centroids[c]);
    if (d < best_distance) {
      best_distance = d;
      best = c;
    }
  }
  return best;
}

}  // namespace

std::vector<std::size_t> kmeans_cluster(std::span<const std::vector<double>> vectors,
                                        std::size_t k, std::uint64_t seed) {
  constexpr int kMaxIterations = 100;
  constexpr double kMovementTolerance = 1e-6;
  if (k == 0) throw std::invalid_argument("kmeans: k must be positive");
  const std::size_t n = vectors.size();
  if (k > n) throw std::invalid_argument("kmeans: k exceeds the number of points");
  const std::size_t dim = vectors[0].size();
  for (const auto& v : vectors) {
    if (v.size() != dim) throw std::invalid_argument("kmeans: vectors differ in dimension");
  }

  numerics::Rng rng(seed);
  std::vector<std::vector<double>> centroids;
  std::vector<bool> chosen(n, false);
  const std::size_t first = rng.below(n);
  centroids.push_back(vectors[first]);
  chosen[first] = true;
  std::vector<double> closest(n);
  for (std::size_t i = 0; i < n; ++i) closest[i] = squared_distance(vectors[i], centroids[0]);
  while (centroids.size() < k) {
    const double total = std::accumulate(closest.begin(), closest.end(), 0.0);
    std::size_t pick = n;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        if (closest[i] <= 0.0) continue;
        pick = i;
        target -= closest[i];
        if (target < 0.0) break;
      }
    } else {
      // Every remaining point coincides with a centroid.
      pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
    }
    chosen[pick] = true;
    centroids.push_back(vectors[pick]);
    for (std::size_t i = 0; i < n; ++i) {
      closest[i] = std::min(closest[i], squared_distance(vectors[i], centroids.back()));
    }
  }

  std::vector<std::size_t> assignment(n, 0);
  for (int iteration = 0; iteration < kMaxIterations; ++iteration) {
    for (std::size_t i = 0; i < n; ++i) assignment[i] = nearest(vectors[i], centroids);
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[assignment[i]];
      for (std::size_t d = 0; d < dim; ++d) sums[assignment[i]][d] += vectors[i][d];
    }
    double movement = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centroid
      for (auto& v : sums[c]) v /= static_cast<double>(counts[c]);
      movement = std::max(movement, std::sqrt(squared_distance(sums[c], centroids[c])));
      centroids[c] = std::move(sums[c]);
    }
    if (movement < kMovementTolerance) break;
  }
  for (std::size_t i = 0; i < n; ++i) assignment[i] = nearest(vectors[i], centroids);
  return assignment;
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "train";
}

std::optional<Split> parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "validation") return Split::validation;
  if (text == "test") return Split::test;
  return std::nullopt;
}

std::array<std::size_t, 3> SplitAssignment::counts() const {
  std::array<std::size_t, 3> out{0, 0, 0};
  for (const auto& [_, s] : by_id) ++out[static_cast<std::size_t>(s)];
  return out;
}

std::vector<NewsPost> SplitAssignment::select(const std::vector<NewsPost>& posts, Split which) const {
  std::vector<NewsPost> out;
  for (const auto& post : posts) {
    auto it = by_id.find(post.id);
    if (it == by_id.end()) throw DataError("split has no assignment for post '" + post.id + "'");
    if (it->second == which) out.push_back(post);
  }
  return out;
}

std::vector<std::size_t> cluster_events(std::span<const NewsPost> posts, std::size_t k,
                                        std::uint64_t seed, std::size_t embedding_dim) {
  std::vector<std::vector<double>> vectors;
  vectors.reserve(posts.size());
  for (const auto& post : posts) vectors.push_back(embed_for_clustering(post, embedding_dim));
  return kmeans_cluster(vectors, k, seed);
}

std::map<std::size_t, Split> assign_clusters(std::span<const std::size_t> cluster_of_post,
                                             const SplitRatios& ratios, std::uint64_t seed) {
  if (!(ratios.train > 0 && ratios.validation > 0 && ratios.test > 0)) {
    throw std::invalid_argument("split ratios must be positive");
  }
  std::map<std::size_t, std::size_t> sizes;
  for (auto c : cluster_of_post) ++sizes[c];
  if (sizes.size() < 3) {
    throw DataError("event split needs at least 3 event clusters, got " + std::to_string(sizes.size()));
  }

  std::vector<std::pair<std::size_t, std::size_t>> order(sizes.begin(), sizes.end());
  numerics::Rng rng(seed);
  rng.shuffle(std::span(order));
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  const double total_ratio = ratios.train + ratios.validation + ratios.test;
  const auto total = static_cast<double>(cluster_of_post.size());
  const std::array<double, 3> target{total * ratios.train / total_ratio,
                                     total * ratios.validation / total_ratio,
                                     total * ratios.test / total_ratio};
  std::array<double, 3> filled{0, 0, 0};
  std::map<std::size_t, Split> out;
  for (const auto& [cluster, size] : order) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < 3; ++s) {
      if (target[s] - filled[s] > target[best] - filled[best]) best = s;
    }
    filled[best] += static_cast<double>(size);
    out.emplace(cluster, static_cast<Split>(best));
  }
  return out;
}

SplitAssignment event_split(std::span<const NewsPost> posts, const SplitRatios& ratios,
                            std::uint64_t seed, const EventSplitOptions& options) {
  const bool stored = !posts.empty() && std::all_of(posts.begin(), posts.end(),
                                                    [](const auto& p) { return p.event_id.has_value(); });
  std::vector<std::size_t> clusters;
  if (stored) {
    for (const auto& p : posts) {
      if (*p.event_id < 0) throw DataError("post '" + p.id + "' has a negative event_id");
      clusters.push_back(static_cast<std::size_t>(*p.event_id));
    }
  } else {
    if (posts.size() < 3) throw DataError("event split needs at least 3 posts");
    std::size_t k = options.clusters.value_or(std::max<std::size_t>(5, posts.size() / 50));
    k = std::min(k, posts.size());
    clusters = cluster_events(posts, k, seed, options.embedding_dim);
  }
  const auto cluster_split = assign_clusters(clusters, ratios, seed);
  SplitAssignment out;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    if (!out.by_id.emplace(posts[i].id, cluster_split.at(clusters[i])).second) {
      throw DataError("duplicate post id '" + posts[i].id + "'");
    }
  }
  return out;
}

void write_split(const std::filesystem::path& path, const SplitAssignment& split,
                 std::uint64_t seed) {
  nlohmann::ordered_json doc;
  doc["version"] = 1;
  doc["seed"] = seed;
  nlohmann::ordered_json assignment = nlohmann::ordered_json::object();
  for (const auto& [id, s] : split.by_id) assignment[id] = std::string(to_string(s));
  doc["assignment"] = std::move(assignment);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write split file '" + path.string() + "'");
  out << doc.dump(1) << '\n';
}

SplitAssignment read_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open split file '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("split file '" + path.string() + "': " + e.what());
  }
  if (!doc.is_object() || !doc.contains("assignment") || !doc["assignment"].is_object()) {
    throw DataError("split file '" + path.string() + "': missing 'assignment' object");
  }
  SplitAssignment out;
  for (const auto& [id, value] : doc["assignment"].items()) {
    const auto s = value.is_string() ? parse_split(value.get<std::string>()) : std::nullopt;
    if (!s) throw DataError("split file: post '" + id + "' has an invalid split");
    out.by_id.emplace(id, *s);
  }
  return out;
}

}  // namespace emfend::corpus
