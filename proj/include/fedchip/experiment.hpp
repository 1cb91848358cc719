#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedchip/corpus.hpp"
#include "fedchip/evaluator.hpp"
#include "fedchip/fedsim.hpp"
#include "fedchip/partitioner.hpp"

namespace fedchip {

enum class PartitionMode { kKMeansDirichlet, kIid };

// Everything a `simulate` run needs. Mirrors the sections of the INI-style
// run file: [data], [partition], [train], [eval].
struct SimConfig {
  struct Data {
    std::size_t count = 3000;
    std::uint64_t seed = 7;
    std::optional<std::filesystem::path> corpus;  // replaces generation when set
  } data;

  struct PartitionSection {
    PartitionMode mode = PartitionMode::kKMeansDirichlet;
    std::size_t k = 3;
    double fraction = 0.2;
    double alpha = 1.0;
    bool per_point = true;
    std::uint64_t seed = 7;
    std::size_t max_iters = 300;
    double tol = 1e-9;
  } partition;

  TrainConfig train;

  struct Eval {
    std::size_t test_size = 100;  // per client
    std::vector<std::size_t> ks = {1, 5, 10};
    SlackMode slack_mode = SlackMode::kLiteral;
    std::uint64_t seed = 7;
    bool every_round = true;
  } eval;
};

SimConfig load_sim_config(const std::filesystem::path& path);
SimConfig parse_sim_config(const std::string& text,
                           const std::filesystem::path& base_dir = {});
// Overrides every seed in the file (data, partition, train, eval).
void override_seeds(SimConfig& cfg, std::uint64_t seed);
void validate_sim_config(const SimConfig& cfg);

struct ScenarioOutcome {
  std::string name;  // centralized | federated | independent_<i>
  RunResult run;
  EvalReport report;
};

struct Simulation {
  std::vector<Corpus> clients;  // full sub-corpora
  std::vector<Corpus> train;    // per-client training split
  Corpus test;                  // pooled held-out descriptions
  SigmaThresholds thresholds;
  ScenarioOutcome centralized;
  ScenarioOutcome federated;
  std::vector<ScenarioOutcome> independent;
  std::vector<CandidateSet> federated_candidates;

  double chip_at_1(const ScenarioOutcome& s) const { return s.report.chip_at_k.at(1); }
};

// Centralized vs federated vs independent on one partitioned corpus.
Simulation run_simulation(const SimConfig& cfg, const RunOptions& extra = {});

// Writes history_*.csv, eval_*.csv/json, candidates_federated.{csv,jsonl},
// summary.json and clients/ under `out_dir`.
void write_simulation(const Simulation& sim, const std::filesystem::path& out_dir);

std::string history_csv(const std::vector<HistoryRow>& rows);
std::string summary_json(const Simulation& sim);

// Candidate sets for `test`, one sampling seed per description.
std::vector<CandidateSet> sample_candidate_sets(const Corpus& test,
                                                const SurrogateModel& model,
                                                const LoraAdapter& adapter,
                                                const Featurizer& featurizer,
                                                std::size_t n, double temperature,
                                                std::uint64_t seed);

// Turns a completed results directory into plot-ready tables:
// divergence.csv, chip_at_k.csv, scatter.csv.
void emit_report(const std::filesystem::path& results_dir,
                 const std::filesystem::path& out_dir, std::size_t bins = 50);

// JSONL of {"description_id", "gt": {...metrics}, "candidates": [{...}]}.
std::vector<CandidateSet> load_candidate_sets(const std::filesystem::path& path);
std::string candidate_sets_jsonl(std::span<const CandidateSet> sets);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace fedchip
