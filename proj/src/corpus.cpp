#include "fedchip/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <boost/random/uniform_int_distribution.hpp>
#include "json.hpp"

#include "fedchip/error.hpp"
#include "fedchip/rng.hpp"

namespace fedchip {

using nlohmann::json;

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const char* where) {
  for (const auto& [key, _] : obj.items()) {
    bool known = std::any_of(allowed.begin(), allowed.end(),
                             [&](const char* a) { return key == a; });
    if (!known) {
      throw validation_error(std::string("unknown key '") + key + "' in " + where);
    }
  }
}

const json& require(const json& obj, const char* key, const char* where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw validation_error(std::string("missing key '") + key + "' in " + where);
  }
  return *it;
}

int require_int(const json& obj, const char* key) {
  const json& v = require(obj, key, "params");
  if (!v.is_number_integer()) {
    throw validation_error(std::string("params.") + key + " must be an integer");
  }
  return v.get<int>();
}

double require_number(const json& obj, const char* key) {
  const json& v = require(obj, key, "metrics");
  if (!v.is_number()) {
    throw validation_error(std::string("metrics.") + key + " must be a number");
  }
  return v.get<double>();
}

DesignRecord record_from_json(const json& j) {
  if (!j.is_object()) throw validation_error("record must be a JSON object");
  reject_unknown_keys(j, {"id", "instruction", "params", "design_text", "metrics"},
                      "record");
  DesignRecord r;
  const json& id = require(j, "id", "record");
  const json& instr = require(j, "instruction", "record");
  if (!id.is_string()) throw validation_error("id must be a string");
  if (!instr.is_string()) throw validation_error("instruction must be a string");
  r.id = id.get<std::string>();
  r.instruction = instr.get<std::string>();

  if (auto it = j.find("params"); it != j.end()) {
    if (!it->is_object()) throw validation_error("params must be an object");
    reject_unknown_keys(*it, {"array_dim", "data_width", "approx_mode", "tiling"},
                        "params");
    DesignParams p;
    p.array_dim = require_int(*it, "array_dim");
    p.data_width = require_int(*it, "data_width");
    p.approx_mode = require_int(*it, "approx_mode");
    p.tiling = require_int(*it, "tiling");
    validate_params(p);
    r.params = p;
  }
  if (auto it = j.find("design_text"); it != j.end()) {
    if (!it->is_string()) throw validation_error("design_text must be a string");
    r.design_text = it->get<std::string>();
  }

  const json& m = require(j, "metrics", "record");
  if (!m.is_object()) throw validation_error("metrics must be an object");
  reject_unknown_keys(m, {"area_um2", "total_power_w", "slack_ns"}, "metrics");
  r.metrics.area = require_number(m, "area_um2");
  r.metrics.total_power = require_number(m, "total_power_w");
  r.metrics.slack = require_number(m, "slack_ns");
  validate_metrics(r.metrics);
  return r;
}

json record_to_json(const DesignRecord& r) {
  json j;
  j["id"] = r.id;
  j["instruction"] = r.instruction;
  if (r.params) {
    j["params"] = {{"array_dim", r.params->array_dim},
                   {"data_width", r.params->data_width},
                   {"approx_mode", r.params->approx_mode},
                   {"tiling", r.params->tiling}};
  }
  if (r.design_text) j["design_text"] = *r.design_text;
  j["metrics"] = {{"area_um2", r.metrics.area},
                  {"total_power_w", r.metrics.total_power},
                  {"slack_ns", r.metrics.slack}};
  return j;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  });
}

}  // namespace

void validate_params(const DesignParams& p) {
  if (!is_power_of_two(p.array_dim) || p.array_dim < 4 || p.array_dim > 256) {
    throw validation_error("array_dim must be a power of two in [4, 256], got " +
                           std::to_string(p.array_dim));
  }
  if (p.data_width < kMinDataWidth || p.data_width > kMaxDataWidth) {
    throw validation_error("data_width must be in [4, 32], got " +
                           std::to_string(p.data_width));
  }
  if (p.approx_mode < 0 || p.approx_mode >= kNumApproxModes) {
    throw validation_error("approx_mode must be in {0, 1, 2}, got " +
                           std::to_string(p.approx_mode));
  }
  if (p.tiling < 1) {
    throw validation_error("tiling must be >= 1, got " + std::to_string(p.tiling));
  }
}

void validate_metrics(const PpaMetrics& m) {
  if (!std::isfinite(m.area) || !(m.area > 0.0)) {
    throw validation_error("area must be positive");
  }
  if (!std::isfinite(m.total_power) || !(m.total_power > 0.0)) {
    throw validation_error("total_power must be positive");
  }
  if (!std::isfinite(m.slack)) throw validation_error("slack must be finite");
}

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::kArea:
      return "area";
    case Metric::kPower:
      return "total_power";
    case Metric::kSlack:
      return "slack";
  }
  return "unknown";
}

Metric metric_from_name(std::string_view name) {
  if (name == "area") return Metric::kArea;
  if (name == "power" || name == "total_power") return Metric::kPower;
  if (name == "slack") return Metric::kSlack;
  throw validation_error("unknown metric: " + std::string(name));
}

double metric_value(const PpaMetrics& m, Metric which) {
  switch (which) {
    case Metric::kArea:
      return m.area;
    case Metric::kPower:
      return m.total_power;
    case Metric::kSlack:
      return m.slack;
  }
  return 0.0;
}

void validate_corpus(const Corpus& corpus) {
  std::set<std::string_view> seen;
  for (const auto& r : corpus.records) {
    if (r.params) validate_params(*r.params);
    validate_metrics(r.metrics);
    if (!seen.insert(r.id).second) {
      throw validation_error("duplicate id: " + r.id);
    }
  }
}

Corpus parse_corpus_jsonl(std::string_view text) {
  Corpus corpus;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (is_blank(line)) {
      if (end == text.size()) break;
      continue;
    }
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw parse_error("line " + std::to_string(line_no) + ": " + e.what());
    }
    DesignRecord r;
    try {
      r = record_from_json(j);
    } catch (const Error& e) {
      throw Error(e.kind(), "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!seen.insert(r.id).second) {
      throw validation_error("line " + std::to_string(line_no) +
                             ": duplicate id: " + r.id);
    }
    corpus.records.push_back(std::move(r));
    if (end == text.size()) break;
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open corpus file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw io_error("failed reading corpus file: " + path.string());
  return parse_corpus_jsonl(ss.str());
}

std::string record_to_json_line(const DesignRecord& record) {
  return record_to_json(record).dump();
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  validate_corpus(corpus);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot write corpus file: " + path.string());
  for (const auto& r : corpus.records) out << record_to_json_line(r) << '\n';
  out.flush();
  if (!out) throw io_error("failed writing corpus file: " + path.string());
}

PpaMetrics cost_model(const DesignParams& params) {
  validate_params(params);
  const double d = params.array_dim;
  const double w = params.data_width;
  const double m = params.approx_mode;
  const double t = params.tiling;
  PpaMetrics out;
  out.area = 120.0 * d * d * w * (1.0 - 0.08 * m) + 400.0 * t;
  out.total_power = 0.0009 * d * d * w * (1.0 - 0.12 * m);
  out.slack = 2.0 - 0.012 * d * w + 0.15 * m;
  return out;
}

std::string render_instruction(const DesignParams& p) {
  char buf[192];
  std::snprintf(buf, sizeof(buf),
                "Generate a systolic array accelerator with array dimension %d, "
                "data width %d bits, approximation mode %d and memory tiling "
                "factor %d.",
                p.array_dim, p.data_width, p.approx_mode, p.tiling);
  return buf;
}

Corpus generate_synthetic(std::int64_t count, std::uint64_t seed) {
  if (count < 1) throw validation_error("count must be ≥ 1");
  Rng rng = make_rng({seed, key(Stream::kGenerate)});
  boost::random::uniform_int_distribution<int> dim_idx(0, kArrayDims.size() - 1);
  boost::random::uniform_int_distribution<int> width(kMinDataWidth, kMaxDataWidth);
  boost::random::uniform_int_distribution<int> mode(0, kNumApproxModes - 1);
  boost::random::uniform_int_distribution<int> tiling(1, kMaxGeneratedTiling);

  Corpus corpus;
  corpus.records.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    DesignParams p;
    p.array_dim = kArrayDims[dim_idx(rng)];
    p.data_width = width(rng);
    p.approx_mode = mode(rng);
    p.tiling = tiling(rng);
    char id[32];
    std::snprintf(id, sizeof(id), "syn-%06lld", static_cast<long long>(i));
    DesignRecord r;
    r.id = id;
    r.instruction = render_instruction(p);
    r.params = p;
    r.metrics = cost_model(p);
    corpus.records.push_back(std::move(r));
  }
  return corpus;
}

NormStats metric_stats(const Corpus& corpus) {
  if (corpus.size() < 2) {
    throw validation_error("at least 2 records are required, got " +
                           std::to_string(corpus.size()));
  }
  NormStats stats;
  const double n = static_cast<double>(corpus.size());
  for (Metric m : kAllMetrics) {
    const auto c = static_cast<std::size_t>(m);
    double sum = 0.0;
    for (const auto& r : corpus.records) sum += metric_value(r.metrics, m);
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& r : corpus.records) {
      const double d = metric_value(r.metrics, m) - mean;
      ss += d * d;
    }
    const double sigma = std::sqrt(ss / n);
    if (!(sigma > 0.0)) {
      throw validation_error("constant metric column: " +
                             std::string(metric_name(m)));
    }
    stats.mean[c] = mean;
    stats.sigma[c] = sigma;
  }
  return stats;
}

std::pair<std::vector<PpaRow>, NormStats> zscore_normalize(const Corpus& corpus) {
  NormStats stats = metric_stats(corpus);
  std::vector<PpaRow> rows;
  rows.reserve(corpus.size());
  for (const auto& r : corpus.records) {
    PpaRow row;
    for (Metric m : kAllMetrics) {
      const auto c = static_cast<std::size_t>(m);
      row[c] = (metric_value(r.metrics, m) - stats.mean[c]) / stats.sigma[c];
    }
    rows.push_back(row);
  }
  return {std::move(rows), stats};
}

TrainTestSplit train_test_split(const Corpus& corpus, std::size_t test_size,
                                std::uint64_t seed) {
  if (test_size >= corpus.size() && !(test_size == 0 && corpus.empty())) {
    throw validation_error("test_size (" + std::to_string(test_size) +
                           ") must be smaller than the corpus (" +
                           std::to_string(corpus.size()) + ")");
  }
  std::vector<std::size_t> idx(corpus.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng = make_rng({seed, key(Stream::kSplit)});
  // Partial Fisher-Yates: the first test_size slots are a uniform sample.
  for (std::size_t i = 0; i < test_size; ++i) {
    boost::random::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::vector<bool> in_test(corpus.size(), false);
  for (std::size_t i = 0; i < test_size; ++i) in_test[idx[i]] = true;

  TrainTestSplit out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    (in_test[i] ? out.test : out.train).records.push_back(corpus.records[i]);
  }
  return out;
}

Corpus concat(std::span<const Corpus> parts) {
  Corpus out;
  for (const auto& p : parts) {
    out.records.insert(out.records.end(), p.records.begin(), p.records.end());
  }
  return out;
}

}  // namespace fedchip
