#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedchip/corpus.hpp"

namespace fedchip {

inline constexpr double kHistogramSmoothing = 1e-10;
inline constexpr std::size_t kDefaultBins = 50;

struct Histogram {
  std::vector<double> bin_edges;  // B + 1 strictly increasing values
  std::vector<double> probs;      // B values summing to 1

  std::size_t bins() const { return probs.size(); }

  // Validates edges and probabilities; probs must already be normalized.
  static Histogram from_probs(std::vector<double> edges, std::vector<double> probs);
};

// Equal-width bins over [lo, hi]. Values outside the range fall into the
// boundary bins. Every bin receives kHistogramSmoothing before renormalizing.
Histogram build_histogram(std::span<const double> values, std::size_t bins, double lo,
                          double hi);

// Natural-log divergences.
double kl_divergence(const Histogram& p, const Histogram& q);
double js_divergence(const Histogram& p, const Histogram& q);

enum class Measure { kKl, kJsd };
std::string_view measure_name(Measure m);
Measure measure_from_name(std::string_view name);

using Matrix2D = std::vector<std::vector<double>>;

// Pairwise divergence between per-client histograms of one metric. All
// histograms share the pooled [min, max] range of that metric.
Matrix2D divergence_matrix(std::span<const Corpus> clients, Metric metric,
                           std::size_t bins, Measure measure);

// CSV rows "metric,measure,cluster_i,cluster_j,value" for every metric and
// measure, i != j. `bits` divides by ln 2.
std::string divergence_csv(std::span<const Corpus> clients, std::size_t bins, bool bits);

}  // namespace fedchip
