#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fedchip/divergence.hpp"
#include "fedchip/error.hpp"
#include "fedchip/partitioner.hpp"

using namespace fedchip;

namespace {

const double kLn2 = std::log(2.0);

Histogram two_bins(double p0) { return Histogram::from_probs({0.0, 1.0, 2.0}, {p0, 1.0 - p0}); }

Histogram random_histogram(std::mt19937_64& gen, std::size_t bins) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> values(200);
  for (auto& v : values) v = u(gen) * u(gen);
  return build_histogram(values, bins, 0.0, 1.0);
}

}  // namespace

TEST(Histogram, MidpointMass) {
  const std::vector<double> v(10, 1.25);
  const Histogram h = build_histogram(v, 4, 0.0, 4.0);
  EXPECT_NEAR(h.probs[1], 1.0, 1e-9);
  EXPECT_NEAR(h.probs[0], 0.0, 1e-9);
  EXPECT_GT(h.probs[0], 0.0);  // smoothing keeps every bin positive
}

TEST(Histogram, BinCentersUniform) {
  const std::vector<double> v = {0.5, 1.5, 2.5, 3.5};
  const Histogram h = build_histogram(v, 4, 0.0, 4.0);
  for (double p : h.probs) EXPECT_NEAR(p, 0.25, 1e-9);
  EXPECT_EQ(h.bin_edges.size(), 5u);
}

TEST(Histogram, ClampsOutOfRange) {
  const std::vector<double> v = {9.0, -3.0};
  const Histogram h = build_histogram(v, 4, 0.0, 4.0);
  EXPECT_NEAR(h.probs[3], 0.5, 1e-9);
  EXPECT_NEAR(h.probs[0], 0.5, 1e-9);
}

TEST(Histogram, Preconditions) {
  const std::vector<double> empty;
  const std::vector<double> one = {1.0};
  EXPECT_THROW(build_histogram(empty, 4, 0.0, 1.0), Error);
  EXPECT_THROW(build_histogram(one, 0, 0.0, 1.0), Error);
  EXPECT_THROW(build_histogram(one, 4, 1.0, 1.0), Error);
  EXPECT_THROW(Histogram::from_probs({0.0, 1.0}, {0.5}), Error);
}

TEST(Kl, HandComputedPair) {
  const Histogram p = two_bins(0.5);
  const Histogram q = two_bins(0.25);
  // 0.5 ln(0.5/0.25) + 0.5 ln(0.5/0.75) = 0.5 ln(4/3)
  EXPECT_NEAR(kl_divergence(p, q), 0.5 * std::log(4.0 / 3.0), 1e-12);
  EXPECT_NEAR(kl_divergence(p, q), 0.143841036, 1e-9);
  // 0.25 ln 0.5 + 0.75 ln 1.5
  EXPECT_NEAR(kl_divergence(q, p), 0.25 * std::log(0.5) + 0.75 * std::log(1.5), 1e-12);
  EXPECT_NEAR(kl_divergence(q, p), 0.130812035, 1e-9);
}

TEST(Kl, IdenticalIsExactlyZero) {
  const Histogram p = two_bins(0.3);
  EXPECT_EQ(kl_divergence(p, p), 0.0);
  EXPECT_EQ(js_divergence(p, p), 0.0);
}

TEST(Kl, MismatchedEdges) {
  const Histogram p = two_bins(0.3);
  const Histogram q = Histogram::from_probs({0.0, 1.0, 3.0}, {0.3, 0.7});
  EXPECT_THROW(kl_divergence(p, q), Error);
  EXPECT_THROW(js_divergence(p, q), Error);
}

TEST(Laws, RandomPairs) {
  std::mt19937_64 gen(42);
  for (int i = 0; i < 1000; ++i) {
    const Histogram p = random_histogram(gen, 20);
    const Histogram q = random_histogram(gen, 20);
    EXPECT_GE(kl_divergence(p, q), 0.0);
    EXPECT_EQ(kl_divergence(p, p), 0.0);
    const double js = js_divergence(p, q);
    EXPECT_NEAR(js, js_divergence(q, p), 1e-12);
    EXPECT_GE(js, 0.0);
    EXPECT_LE(js, kLn2 + 1e-12);
  }
}

TEST(Jsd, DisjointSupportsReachLn2) {
  const std::vector<double> lo = {0.1, 0.2};
  const std::vector<double> hi = {3.8, 3.9};
  const Histogram p = build_histogram(lo, 4, 0.0, 4.0);
  const Histogram q = build_histogram(hi, 4, 0.0, 4.0);
  EXPECT_NEAR(js_divergence(p, q), kLn2, 1e-6);
  EXPECT_TRUE(std::isfinite(kl_divergence(p, q)));
}

TEST(Matrix, IdenticalClientsGiveZero) {
  const Corpus c = generate_synthetic(200, 3);
  const std::vector<Corpus> clients = {c, c};
  for (Metric m : kAllMetrics) {
    const auto kl = divergence_matrix(clients, m, 50, Measure::kKl);
    EXPECT_EQ(kl[0][1], 0.0);
    EXPECT_EQ(kl[1][0], 0.0);
  }
}

TEST(Matrix, PartitionedClients) {
  PartitionOptions opts;
  opts.seed = 7;
  const auto parts = partition_corpus(generate_synthetic(3000, 7), opts).clients;
  bool asymmetric = false;
  for (Metric m : kAllMetrics) {
    const auto js = divergence_matrix(parts, m, 50, Measure::kJsd);
    const auto kl = divergence_matrix(parts, m, 50, Measure::kKl);
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_EQ(js[i][i], 0.0);
      for (std::size_t j = 0; j < 3; ++j) {
        EXPECT_GE(js[i][j], 0.0);
        EXPECT_LE(js[i][j], kLn2 + 1e-12);
        EXPECT_NEAR(js[i][j], js[j][i], 1e-12);
        if (std::abs(kl[i][j] - kl[j][i]) > 0.0) asymmetric = true;
      }
    }
  }
  EXPECT_TRUE(asymmetric);
}

TEST(Matrix, NeedsTwoClients) {
  const std::vector<Corpus> one = {generate_synthetic(10, 1)};
  EXPECT_THROW(divergence_matrix(one, Metric::kArea, 10, Measure::kKl), Error);
}

TEST(Csv, HeaderRowsAndBits) {
  PartitionOptions opts;
  opts.seed = 7;
  const auto parts = partition_corpus(generate_synthetic(600, 7), opts).clients;
  const std::string nats = divergence_csv(parts, 50, false);
  const std::string bits = divergence_csv(parts, 50, true);
  EXPECT_EQ(nats.rfind("metric,measure,cluster_i,cluster_j,value\n", 0), 0u);
  // 3 metrics x 2 measures x 6 ordered pairs + header
  EXPECT_EQ(std::count(nats.begin(), nats.end(), '\n'), 37);
  const double v_nats = std::stod(nats.substr(nats.find("area,kl,0,1,") + 12));
  const double v_bits = std::stod(bits.substr(bits.find("area,kl,0,1,") + 12));
  EXPECT_NEAR(v_bits, v_nats / kLn2, 1e-12);
}
