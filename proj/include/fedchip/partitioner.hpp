#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fedchip/corpus.hpp"

namespace fedchip {

using Point = std::vector<double>;

struct KMeansOptions {
  std::size_t k = 3;
  std::uint64_t seed = 0;
  std::size_t max_iters = 300;
  double tol = 1e-9;
};

struct KMeansResult {
  std::vector<std::size_t> labels;
  std::vector<Point> centroids;
  double inertia = 0.0;
  // Inertia after each assignment step, in iteration order.
  std::vector<double> inertia_trace;
  std::size_t iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding. Labels are the nearest centroid
// (ties to the lowest index) with respect to the returned centroids. A
// cluster that empties during iteration is re-seeded at the point farthest
// from its current centroid.
KMeansResult kmeans(std::span<const Point> points, const KMeansOptions& opts);

double squared_distance(const Point& a, const Point& b);

struct DirichletSpec {
  double alpha = 1.0;
  double fraction = 0.2;
  // false: one shared probability vector for every reassigned point.
  bool per_point = true;
};

void validate_dirichlet(const DirichletSpec& spec);

// round-half-away-from-zero of fraction * t
std::size_t reassignment_count(double fraction, std::size_t t);

struct Reassignment {
  std::vector<std::size_t> labels;
  std::vector<std::size_t> reassigned;  // ascending indices
};

Reassignment dirichlet_reassign(std::span<const std::size_t> labels, std::size_t k,
                                const DirichletSpec& spec, std::uint64_t seed);

struct Partition {
  std::vector<std::size_t> labels;
  std::size_t k = 0;
  std::vector<Point> centroids;  // normalized PPA space
  std::vector<std::string> reassigned_ids;
  std::uint64_t seed = 0;
  DirichletSpec spec;
};

struct PartitionOptions {
  std::size_t k = 3;
  DirichletSpec spec;
  std::uint64_t seed = 0;
  std::size_t max_iters = 300;
  double tol = 1e-9;
};

struct PartitionResult {
  Partition partition;
  std::vector<Corpus> clients;
};

// z-score normalize -> k-means -> Dirichlet reassignment.
PartitionResult partition_corpus(const Corpus& corpus, const PartitionOptions& opts);

// Uniform random assignment into k equal-as-possible shards; the IID
// baseline for comparing against the clustered split.
PartitionResult iid_partition(const Corpus& corpus, std::size_t k, std::uint64_t seed);

std::vector<Corpus> split_by_labels(const Corpus& corpus,
                                    std::span<const std::size_t> labels, std::size_t k);

// partition.json plus client_0.jsonl ... client_{k-1}.jsonl in `dir`.
void save_partition(const PartitionResult& result, const std::filesystem::path& dir);
std::string partition_to_json(const Partition& p);

// Reads client_*.jsonl from `dir` in index order.
std::vector<Corpus> load_clients(const std::filesystem::path& dir);

}  // namespace fedchip
