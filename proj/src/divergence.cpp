#include "fedchip/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "fedchip/error.hpp"

namespace fedchip {

namespace {

void require_same_edges(const Histogram& p, const Histogram& q) {
  if (p.bin_edges != q.bin_edges) {
    throw validation_error("histograms have mismatched bin edges");
  }
}

// sum p_i ln(p_i / q_i) with 0 ln(0/q) = 0
double kl_sum(std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) s += p[i] * std::log(p[i] / q[i]);
  }
  return s;
}

}  // namespace

Histogram Histogram::from_probs(std::vector<double> edges, std::vector<double> probs) {
  if (probs.empty()) throw validation_error("histogram needs at least one bin");
  if (edges.size() != probs.size() + 1) {
    throw validation_error("histogram needs bins + 1 edges");
  }
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) {
      throw validation_error("histogram edges must be strictly increasing");
    }
  }
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw validation_error("histogram probabilities must be finite and >= 0");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw validation_error("histogram probabilities must sum to 1");
  }
  return Histogram{std::move(edges), std::move(probs)};
}

Histogram build_histogram(std::span<const double> values, std::size_t bins, double lo,
                          double hi) {
  if (values.empty()) throw validation_error("cannot build a histogram of no values");
  if (bins == 0) throw validation_error("bins must be >= 1");
  if (!(lo < hi)) throw validation_error("histogram range needs lo < hi");

  Histogram h;
  h.bin_edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) {
    h.bin_edges[i] = lo + width * static_cast<double>(i);
  }
  h.bin_edges[bins] = hi;

  std::vector<double> counts(bins, 0.0);
  for (double v : values) {
    if (std::isnan(v)) throw validation_error("histogram input contains NaN");
    std::size_t b = 0;
    if (v >= hi) {
      b = bins - 1;
    } else if (v > lo) {
      b = std::min(bins - 1, static_cast<std::size_t>((v - lo) / width));
    }
    counts[b] += 1.0;
  }
  const double n = static_cast<double>(values.size());
  const double norm = 1.0 + kHistogramSmoothing * static_cast<double>(bins);
  h.probs.resize(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    h.probs[i] = (counts[i] / n + kHistogramSmoothing) / norm;
  }
  return h;
}

double kl_divergence(const Histogram& p, const Histogram& q) {
  require_same_edges(p, q);
  return std::max(0.0, kl_sum(p.probs, q.probs));
}

double js_divergence(const Histogram& p, const Histogram& q) {
  require_same_edges(p, q);
  std::vector<double> m(p.bins());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = 0.5 * (p.probs[i] + q.probs[i]);
  // Sum the two halves in a fixed order so that JSD(P,Q) and JSD(Q,P) share
  // the same rounding.
  const double a = kl_sum(p.probs, m);
  const double b = kl_sum(q.probs, m);
  const double js = 0.5 * (std::min(a, b) + std::max(a, b));
  return std::clamp(js, 0.0, std::numbers::ln2);
}

std::string_view measure_name(Measure m) { return m == Measure::kKl ? "kl" : "jsd"; }

Measure measure_from_name(std::string_view name) {
  if (name == "kl" || name == "KL") return Measure::kKl;
  if (name == "jsd" || name == "JSD" || name == "js") return Measure::kJsd;
  throw validation_error("unknown divergence measure: " + std::string(name));
}

Matrix2D divergence_matrix(std::span<const Corpus> clients, Metric metric,
                           std::size_t bins, Measure measure) {
  if (clients.size() < 2) throw validation_error("divergence needs at least 2 clients");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  std::vector<std::vector<double>> values(clients.size());
  for (std::size_t c = 0; c < clients.size(); ++c) {
    if (clients[c].empty()) {
      throw validation_error("client " + std::to_string(c) + " has no records");
    }
    for (const auto& r : clients[c].records) {
      const double v = metric_value(r.metrics, metric);
      values[c].push_back(v);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(lo < hi)) {
    throw validation_error("metric " + std::string(metric_name(metric)) +
                           " is constant across clients");
  }
  std::vector<Histogram> hists;
  hists.reserve(clients.size());
  for (const auto& v : values) hists.push_back(build_histogram(v, bins, lo, hi));

  Matrix2D out(clients.size(), std::vector<double>(clients.size(), 0.0));
  for (std::size_t i = 0; i < clients.size(); ++i) {
    for (std::size_t j = 0; j < clients.size(); ++j) {
      if (i == j) continue;
      out[i][j] = measure == Measure::kKl ? kl_divergence(hists[i], hists[j])
                                          : js_divergence(hists[i], hists[j]);
    }
  }
  return out;
}

std::string divergence_csv(std::span<const Corpus> clients, std::size_t bins, bool bits) {
  std::string csv = "metric,measure,cluster_i,cluster_j,value\n";
  const double scale = bits ? 1.0 / std::numbers::ln2 : 1.0;
  for (Metric metric : kAllMetrics) {
    for (Measure measure : {Measure::kKl, Measure::kJsd}) {
      Matrix2D m = divergence_matrix(clients, metric, bins, measure);
      for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) {
          if (i == j) continue;
          char line[160];
          std::snprintf(line, sizeof(line), "%s,%s,%zu,%zu,%.17g\n",
                        std::string(metric_name(metric)).c_str(),
                        std::string(measure_name(measure)).c_str(), i, j,
                        m[i][j] * scale);
          csv += line;
        }
      }
    }
  }
  return csv;
}

}  // namespace fedchip
