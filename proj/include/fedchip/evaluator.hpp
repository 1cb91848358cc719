#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedchip/corpus.hpp"

namespace fedchip {

// One standard deviation of each ground-truth metric; the acceptance band.
struct SigmaThresholds {
  double sigma_area = 0.0;
  double sigma_power = 0.0;
  double sigma_slack = 0.0;
};

SigmaThresholds sigma_thresholds(const Corpus& corpus);

struct Deltas {
  double area = 0.0;
  double power = 0.0;
  double slack = 0.0;
};

// generated - ground truth, per metric
Deltas deviations(const PpaMetrics& generated, const PpaMetrics& gt);

enum class SlackMode {
  kLiteral,         // delta_slack < sigma_slack, like the other metrics
  kDirectionAware,  // -delta_slack < sigma_slack: only slack loss is penalized
};
std::string_view slack_mode_name(SlackMode m);
SlackMode slack_mode_from_name(std::string_view name);

// Three-sigma acceptance; all three metrics must pass (strict <).
bool accepts(const Deltas& d, const SigmaThresholds& t, SlackMode mode);

// 1 - C(n-c, k) / C(n, k), evaluated as a running product.
double chip_at_k_single(std::size_t n, std::size_t c, std::size_t k);

struct CandidateSet {
  std::string description_id;
  PpaMetrics gt;
  std::vector<PpaMetrics> candidates;
};

struct DescriptionScore {
  std::string description_id;
  std::size_t n = 0;
  std::size_t c = 0;
};

struct EvalReport {
  std::vector<DescriptionScore> per_description;
  std::map<std::size_t, double> chip_at_k;
};

std::size_t count_accepted(const CandidateSet& set, const SigmaThresholds& t,
                           SlackMode mode);

EvalReport chip_at_k(std::span<const CandidateSet> sets, const SigmaThresholds& t,
                     std::span<const std::size_t> ks, SlackMode mode);

// Mean over descriptions of chip_at_k_single(n, c, k).
double chip_at_k_from_scores(std::span<const DescriptionScore> scores, std::size_t k);

// {"1": 0.93, "5": 0.99}
std::string eval_report_json(const EvalReport& report);
// description_id,n,c
std::string eval_report_csv(const EvalReport& report);
std::vector<DescriptionScore> parse_scores_csv(std::string_view csv);

}  // namespace fedchip
