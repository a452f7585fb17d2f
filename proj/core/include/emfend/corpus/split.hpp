#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emfend/corpus/news_post.hpp"

namespace emfend::corpus {

/// Hashed bag-of-tokens over the post text, L2-normalised. Empty text
/// yields the zero vector. Requires dim >= 8.
std::vector<double> embed_for_clustering(const NewsPost& post, std::size_t dim);

/// Lloyd's algorithm with k-means++ seeding. Stops after 100 iterations
/// or once no centroid moves by 1e-6 or more.
std::vector<std::size_t> kmeans_cluster(std::span<const std::vector<double>> vectors,
                                        std::size_t k, std::uint64_t seed);

enum class Split { train, validation, test };

std::string_view to_string(Split split);
std::optional<Split> parse_split(std::string_view text);

struct SplitRatios {
  double train = 3.0;
  double validation = 1.0;
  double test = 1.0;
};

struct SplitAssignment {
  std::map<std::string, Split> by_id;

  std::array<std::size_t, 3> counts() const;
  std::vector<NewsPost> select(const std::vector<NewsPost>& posts, Split which) const;
};

struct EventSplitOptions {
  /// Number of K-means clusters; defaults to max(5, n / 50), capped at n.
  std::optional<std::size_t> clusters;
  std::size_t embedding_dim = 1024;
};

/// K-means event ids for every post (ignores any stored event_id).
std::vector<std::size_t> cluster_events(std::span<const NewsPost> posts, std::size_t k,
                                        std::uint64_t seed, std::size_t embedding_dim = 1024);

/// Places whole clusters into splits, largest cluster first, each going to
/// the split furthest below its post-count target. Equal-sized clusters are
/// ordered by a seeded shuffle. Returns the split of every cluster id.
std::map<std::size_t, Split> assign_clusters(std::span<const std::size_t> cluster_of_post,
                                             const SplitRatios& ratios, std::uint64_t seed);

/// Event-disjoint split. Uses stored event ids when every post has one,
/// otherwise clusters the texts first. Fewer than three events is an error.
SplitAssignment event_split(std::span<const NewsPost> posts, const SplitRatios& ratios,
                            std::uint64_t seed, const EventSplitOptions& options = {});

void write_split(const std::filesystem::path& path, const SplitAssignment& split,
                 std::uint64_t seed);
SplitAssignment read_split(const std::filesystem::path& path);

}  // namespace emfend::corpus
