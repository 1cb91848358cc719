#include "fedchip/evaluator.hpp"

#include <charconv>
#include <cmath>

#include "json.hpp"

#include "fedchip/csv.hpp"
#include "fedchip/error.hpp"

namespace fedchip {

SigmaThresholds sigma_thresholds(const Corpus& corpus) {
  NormStats s = metric_stats(corpus);
  return SigmaThresholds{s.sigma[0], s.sigma[1], s.sigma[2]};
}

Deltas deviations(const PpaMetrics& generated, const PpaMetrics& gt) {
  return Deltas{generated.area - gt.area, generated.total_power - gt.total_power,
                generated.slack - gt.slack};
}

std::string_view slack_mode_name(SlackMode m) {
  return m == SlackMode::kLiteral ? "literal" : "direction_aware";
}

SlackMode slack_mode_from_name(std::string_view name) {
  if (name == "literal") return SlackMode::kLiteral;
  if (name == "direction_aware" || name == "direction-aware") {
    return SlackMode::kDirectionAware;
  }
  throw validation_error("unknown slack mode: " + std::string(name));
}

bool accepts(const Deltas& d, const SigmaThresholds& t, SlackMode mode) {
  const double slack_dev = mode == SlackMode::kLiteral ? d.slack : -d.slack;
  return d.area < t.sigma_area && d.power < t.sigma_power && slack_dev < t.sigma_slack;
}

double chip_at_k_single(std::size_t n, std::size_t c, std::size_t k) {
  if (k == 0 || k > n) {
    throw domain_error("chip@k needs 1 <= k <= n (n=" + std::to_string(n) +
                       ", k=" + std::to_string(k) + ")");
  }
  if (c > n) throw domain_error("accepted count exceeds candidate count");
  if (k == 1) return static_cast<double>(c) / static_cast<double>(n);
  if (n - c < k) return 1.0;
  // C(n-c, k) / C(n, k) == C(n-k, c) / C(n, c); take the shorter product.
  double miss = 1.0;
  if (c < k) {
    for (std::size_t i = 0; i < c; ++i) {
      miss *= static_cast<double>(n - k - i) / static_cast<double>(n - i);
    }
  } else {
    for (std::size_t i = 0; i < k; ++i) {
      miss *= static_cast<double>(n - c - i) / static_cast<double>(n - i);
    }
  }
  return 1.0 - miss;
}

std::size_t count_accepted(const CandidateSet& set, const SigmaThresholds& t,
                           SlackMode mode) {
  std::size_t c = 0;
  for (const auto& cand : set.candidates) {
    if (accepts(deviations(cand, set.gt), t, mode)) ++c;
  }
  return c;
}

double chip_at_k_from_scores(std::span<const DescriptionScore> scores, std::size_t k) {
  if (scores.empty()) throw validation_error("no descriptions to score");
  double sum = 0.0;
  for (const auto& s : scores) {
    if (s.n < k) {
      throw domain_error("description " + s.description_id + " has n=" +
                             std::to_string(s.n) + " < k=" + std::to_string(k));
    }
    sum += chip_at_k_single(s.n, s.c, k);
  }
  return sum / static_cast<double>(scores.size());
}

EvalReport chip_at_k(std::span<const CandidateSet> sets, const SigmaThresholds& t,
                     std::span<const std::size_t> ks, SlackMode mode) {
  if (ks.empty()) throw validation_error("no k values requested");
  if (!(t.sigma_area > 0.0 && t.sigma_power > 0.0 && t.sigma_slack > 0.0)) {
    throw validation_error("sigma thresholds must be positive");
  }
  EvalReport report;
  report.per_description.reserve(sets.size());
  for (const auto& set : sets) {
    if (set.candidates.empty()) {
      throw validation_error("description " + set.description_id + " has no candidates");
    }
    report.per_description.push_back(
        {set.description_id, set.candidates.size(), count_accepted(set, t, mode)});
  }
  for (std::size_t k : ks) {
    if (k == 0) throw domain_error("k must be >= 1");
    report.chip_at_k[k] = chip_at_k_from_scores(report.per_description, k);
  }
  return report;
}

std::string eval_report_json(const EvalReport& report) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.chip_at_k) j[std::to_string(k)] = v;
  return j.dump(2);
}

std::string eval_report_csv(const EvalReport& report) {
  std::string out = "description_id,n,c\n";
  for (const auto& s : report.per_description) {
    out += csv_field(s.description_id) + "," + std::to_string(s.n) + "," +
           std::to_string(s.c) + "\n";
  }
  return out;
}

std::vector<DescriptionScore> parse_scores_csv(std::string_view csv) {
  std::vector<DescriptionScore> out;
  auto rows = parse_csv(csv);
  if (rows.empty() || rows[0] != std::vector<std::string>{"description_id", "n", "c"}) {
    throw parse_error("per-description CSV must start with header description_id,n,c");
  }
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 3) {
      throw parse_error("per-description CSV row " + std::to_string(r + 1) +
                        " needs 3 fields");
    }
    DescriptionScore s;
    s.description_id = row[0];
    auto parse_count = [&](const std::string& f, std::size_t& v) {
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || p != f.data() + f.size()) {
        throw parse_error("per-description CSV row " + std::to_string(r + 1) +
                          ": bad count '" + f + "'");
      }
    };
    parse_count(row[1], s.n);
    parse_count(row[2], s.c);
    if (s.c > s.n) throw validation_error("accepted count exceeds n for " + s.description_id);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace fedchip
