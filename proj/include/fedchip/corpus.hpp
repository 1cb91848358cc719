#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fedchip {

// Compile-time knobs of one systolic-array accelerator configuration.
struct DesignParams {
  int array_dim = 4;    // power of two in [4, 256]
  int data_width = 8;   // bits, [4, 32]
  int approx_mode = 0;  // {0, 1, 2}
  int tiling = 1;       // >= 1

  friend bool operator==(const DesignParams&, const DesignParams&) = default;
};

inline constexpr std::array<int, 7> kArrayDims = {4, 8, 16, 32, 64, 128, 256};
inline constexpr int kMinDataWidth = 4;
inline constexpr int kMaxDataWidth = 32;
inline constexpr int kNumApproxModes = 3;
// Upper bound on tiling used by the synthetic generator and the surrogate
// model's value set. Loaded records may exceed it.
inline constexpr int kMaxGeneratedTiling = 8;

// Throws a validation error describing the first out-of-range field.
void validate_params(const DesignParams& p);

// Power / performance / area of one design. Units: um^2, W, ns.
struct PpaMetrics {
  double area = 0.0;
  double total_power = 0.0;
  double slack = 0.0;

  friend bool operator==(const PpaMetrics&, const PpaMetrics&) = default;
};

void validate_metrics(const PpaMetrics& m);

enum class Metric { kArea = 0, kPower = 1, kSlack = 2 };
inline constexpr std::array<Metric, 3> kAllMetrics = {
    Metric::kArea, Metric::kPower, Metric::kSlack};

std::string_view metric_name(Metric m);
// Accepts "area", "power"/"total_power", "slack".
Metric metric_from_name(std::string_view name);
double metric_value(const PpaMetrics& m, Metric which);

struct DesignRecord {
  std::string id;
  std::string instruction;
  // Absent for records ingested from exports that carry HDL text instead.
  std::optional<DesignParams> params;
  std::optional<std::string> design_text;
  PpaMetrics metrics;

  friend bool operator==(const DesignRecord&, const DesignRecord&) = default;
};

struct Corpus {
  std::vector<DesignRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

// Checks per-record invariants and id uniqueness.
void validate_corpus(const Corpus& corpus);

// JSONL persistence. Reals are written with round-trip precision.
Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus_jsonl(std::string_view text);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
std::string record_to_json_line(const DesignRecord& record);

// Analytic stand-in for synthesis + place-and-route:
//   area  = 120 d^2 w (1 - 0.08 m) + 400 t
//   power = 0.0009 d^2 w (1 - 0.12 m)
//   slack = 2.0 - 0.012 d w + 0.15 m
PpaMetrics cost_model(const DesignParams& params);

std::string render_instruction(const DesignParams& params);

Corpus generate_synthetic(std::int64_t count, std::uint64_t seed);

struct NormStats {
  std::array<double, 3> mean{};
  std::array<double, 3> sigma{};  // population (divisor N)
};

using PpaRow = std::array<double, 3>;

// Per-metric population statistics. Throws on < 2 records or a constant
// column.
NormStats metric_stats(const Corpus& corpus);

std::pair<std::vector<PpaRow>, NormStats> zscore_normalize(
    const Corpus& corpus);

struct TrainTestSplit {
  Corpus train;
  Corpus test;
};

// Seeded uniform selection of `test_size` records; both halves keep the
// input's relative order.
TrainTestSplit train_test_split(const Corpus& corpus, std::size_t test_size,
                                std::uint64_t seed);

Corpus concat(std::span<const Corpus> parts);

}  // namespace fedchip
