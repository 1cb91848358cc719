#include "fedchip/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "json.hpp"

#include "fedchip/csv.hpp"
#include "fedchip/divergence.hpp"
#include "fedchip/error.hpp"
#include "fedchip/rng.hpp"

namespace fedchip {

namespace pt = boost::property_tree;

// ---------------------------------------------------------------------------
// Config

namespace {

template <typename T>
T parse_value(const std::string& section, const std::string& key, const std::string& raw) {
  const std::string where = section + "." + key;
  std::string s = raw;
  s.erase(0, s.find_first_not_of(" \t"));
  s.erase(s.find_last_not_of(" \t") + 1);
  T v{};
  if constexpr (std::is_same_v<T, bool>) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw validation_error(where + ": expected a boolean, got '" + raw + "'");
  } else {
    if constexpr (std::is_unsigned_v<T>) {
      if (!s.empty() && s.front() == '-') {
        throw validation_error(where + ": expected a non-negative integer, got '" + raw + "'");
      }
    }
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
      throw validation_error(where + ": cannot parse '" + raw + "'");
    }
    return v;
  }
}

std::vector<std::size_t> parse_list(const std::string& where, const std::string& raw) {
  std::vector<std::size_t> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_value<std::size_t>("eval", where, item));
  if (out.empty()) throw validation_error("eval." + where + ": empty list");
  return out;
}

}  // namespace

SimConfig parse_sim_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw parse_error(std::string("config: ") + e.what());
  }

  SimConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw validation_error("config: key '" + section + "' must live in a section");
    }
    for (const auto& [k, node] : body) {
      const std::string& v = node.data();
      if (section == "data") {
        if (k == "count") cfg.data.count = parse_value<std::size_t>(section, k, v);
        else if (k == "seed") cfg.data.seed = parse_value<std::uint64_t>(section, k, v);
        else if (k == "corpus") {
          std::filesystem::path p = v;
          cfg.data.corpus = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
        } else throw validation_error("config: unknown key data." + k);
      } else if (section == "partition") {
        auto& s = cfg.partition;
        if (k == "mode") {
          if (v == "kmeans_dirichlet") s.mode = PartitionMode::kKMeansDirichlet;
          else if (v == "iid") s.mode = PartitionMode::kIid;
          else throw validation_error("config: partition.mode must be kmeans_dirichlet or iid");
        } else if (k == "k") s.k = parse_value<std::size_t>(section, k, v);
        else if (k == "fraction") s.fraction = parse_value<double>(section, k, v);
        else if (k == "alpha") s.alpha = parse_value<double>(section, k, v);
        else if (k == "per_point") s.per_point = parse_value<bool>(section, k, v);
        else if (k == "seed") s.seed = parse_value<std::uint64_t>(section, k, v);
        else if (k == "max_iters") s.max_iters = parse_value<std::size_t>(section, k, v);
        else if (k == "tol") s.tol = parse_value<double>(section, k, v);
        else throw validation_error("config: unknown key partition." + k);
      } else if (section == "train") {
        auto& t = cfg.train;
        if (k == "rounds") t.rounds = parse_value<std::size_t>(section, k, v);
        else if (k == "local_epochs") t.local_epochs = parse_value<std::size_t>(section, k, v);
        else if (k == "batch_size") t.batch_size = parse_value<std::size_t>(section, k, v);
        else if (k == "learning_rate") t.learning_rate = parse_value<double>(section, k, v);
        else if (k == "lora_rank") t.lora_rank = parse_value<std::size_t>(section, k, v);
        else if (k == "lora_alpha") t.lora_alpha = parse_value<double>(section, k, v);
        else if (k == "weight_decay") t.weight_decay = parse_value<double>(section, k, v);
        else if (k == "seed") t.seed = parse_value<std::uint64_t>(section, k, v);
        else if (k == "temperature") t.temperature = parse_value<double>(section, k, v);
        else if (k == "n_candidates") t.n_candidates = parse_value<std::size_t>(section, k, v);
        else throw validation_error("config: unknown key train." + k);
      } else if (section == "eval") {
        auto& e = cfg.eval;
        if (k == "test_size") e.test_size = parse_value<std::size_t>(section, k, v);
        else if (k == "k") e.ks = parse_list(k, v);
        else if (k == "slack_mode") e.slack_mode = slack_mode_from_name(v);
        else if (k == "seed") e.seed = parse_value<std::uint64_t>(section, k, v);
        else if (k == "every_round") e.every_round = parse_value<bool>(section, k, v);
        else throw validation_error("config: unknown key eval." + k);
      } else {
        throw validation_error("config: unknown section [" + section + "]");
      }
    }
  }
  validate_sim_config(cfg);
  return cfg;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
  return parse_sim_config(read_text(path), path.parent_path());
}

void override_seeds(SimConfig& cfg, std::uint64_t seed) {
  cfg.data.seed = seed;
  cfg.partition.seed = seed;
  cfg.train.seed = seed;
  cfg.eval.seed = seed;
}

void validate_sim_config(const SimConfig& cfg) {
  if (!cfg.data.corpus && cfg.data.count < 2) {
    throw validation_error("config: data.count must be >= 2");
  }
  if (cfg.partition.k == 0) throw validation_error("config: partition.k must be >= 1");
  validate_dirichlet({cfg.partition.alpha, cfg.partition.fraction, cfg.partition.per_point});
  validate_train_config(cfg.train);
  for (std::size_t k : cfg.eval.ks) {
    if (k == 0 || k > cfg.train.n_candidates) {
      throw validation_error("config: every eval.k must be in [1, train.n_candidates]");
    }
  }
  if (std::find(cfg.eval.ks.begin(), cfg.eval.ks.end(), 1) == cfg.eval.ks.end()) {
    throw validation_error("config: eval.k must include 1");
  }
}

// ---------------------------------------------------------------------------
// Simulation

std::vector<CandidateSet> sample_candidate_sets(const Corpus& test,
                                                const SurrogateModel& model,
                                                const LoraAdapter& adapter,
                                                const Featurizer& featurizer,
                                                std::size_t n, double temperature,
                                                std::uint64_t seed) {
  std::vector<CandidateSet> sets;
  sets.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    const DesignRecord& r = test.records[i];
    CandidateSet set;
    set.description_id = r.id;
    set.gt = r.metrics;
    for (const auto& c : generate_candidates(model, adapter, featurizer, r.instruction, n,
                                             temperature, derive_seed(seed, i))) {
      set.candidates.push_back(c.metrics);
    }
    sets.push_back(std::move(set));
  }
  return sets;
}

Simulation run_simulation(const SimConfig& cfg, const RunOptions& extra) {
  validate_sim_config(cfg);
  Corpus corpus = cfg.data.corpus ? load_corpus(*cfg.data.corpus)
                                  : generate_synthetic(static_cast<std::int64_t>(cfg.data.count),
                                                       cfg.data.seed);
  const auto& p = cfg.partition;
  PartitionResult parts;
  if (p.mode == PartitionMode::kIid) {
    parts = iid_partition(corpus, p.k, p.seed);
  } else {
    PartitionOptions opts;
    opts.k = p.k;
    opts.spec = {p.alpha, p.fraction, p.per_point};
    opts.seed = p.seed;
    opts.max_iters = p.max_iters;
    opts.tol = p.tol;
    parts = partition_corpus(corpus, opts);
  }

  Simulation sim;
  sim.clients = parts.clients;
  std::vector<Corpus> tests;
  for (std::size_t c = 0; c < sim.clients.size(); ++c) {
    const Corpus& client = sim.clients[c];
    if (client.size() <= cfg.eval.test_size) {
      throw validation_error("client " + std::to_string(c) + " has " +
                             std::to_string(client.size()) +
                             " records, not enough for eval.test_size " +
                             std::to_string(cfg.eval.test_size));
    }
    TrainTestSplit split = train_test_split(client, cfg.eval.test_size,
                                            derive_seed(cfg.eval.seed, c));
    sim.train.push_back(std::move(split.train));
    tests.push_back(std::move(split.test));
  }
  sim.test = concat(tests);
  sim.thresholds = sigma_thresholds(corpus);

  const Featurizer featurizer;
  const SurrogateModel model = make_base_model(head_sizes(), featurizer.dim(), cfg.train.seed);
  const auto& tc = cfg.train;

  auto evaluate = [&](const LoraAdapter& adapter) {
    auto sets = sample_candidate_sets(sim.test, model, adapter, featurizer, tc.n_candidates,
                                      tc.temperature, cfg.eval.seed);
    return std::pair{chip_at_k(sets, sim.thresholds, cfg.eval.ks, cfg.eval.slack_mode),
                     std::move(sets)};
  };
  RunOptions opts = extra;
  if (cfg.eval.every_round) {
    opts.scorer = [&](const LoraAdapter& a) {
      auto sets = sample_candidate_sets(sim.test, model, a, featurizer, tc.n_candidates,
                                        tc.temperature, cfg.eval.seed);
      const std::size_t one = 1;
      return chip_at_k(sets, sim.thresholds, std::span(&one, 1), cfg.eval.slack_mode)
          .chip_at_k.at(1);
    };
  }

  sim.federated.name = "federated";
  sim.federated.run = run_federated(sim.train, model, featurizer, tc, opts);
  auto [fed_report, fed_sets] = evaluate(sim.federated.run.adapter);
  sim.federated.report = std::move(fed_report);
  sim.federated_candidates = std::move(fed_sets);

  RunOptions quiet = opts;
  quiet.wire_tap = {};
  sim.centralized.name = "centralized";
  sim.centralized.run = run_centralized(sim.train, model, featurizer, tc, quiet);
  sim.centralized.report = evaluate(sim.centralized.run.adapter).first;

  auto independent = run_independent(sim.train, model, featurizer, tc, quiet);
  for (std::size_t i = 0; i < independent.size(); ++i) {
    ScenarioOutcome s;
    s.name = "independent_" + std::to_string(i);
    s.report = evaluate(independent[i].adapter).first;
    s.run = std::move(independent[i]);
    sim.independent.push_back(std::move(s));
  }
  return sim;
}

std::string history_csv(const std::vector<HistoryRow>& rows) {
  std::string out = "round,client_id,loss,chip_at_1\n";
  for (const auto& r : rows) {
    out += std::to_string(r.round) + "," + std::to_string(r.client_id) + "," +
           format_double(r.loss) + "," + (r.chip_at_1 ? format_double(*r.chip_at_1) : "") +
           "\n";
  }
  return out;
}

std::string summary_json(const Simulation& sim) {
  nlohmann::ordered_json j;
  j["metric"] = "chip@1";
  j["centralized"] = sim.chip_at_1(sim.centralized);
  j["federated"] = sim.chip_at_1(sim.federated);
  nlohmann::ordered_json ind = nlohmann::ordered_json::array();
  for (const auto& s : sim.independent) ind.push_back(sim.chip_at_1(s));
  j["independent"] = std::move(ind);
  j["test_descriptions"] = sim.test.size();
  return j.dump(2);
}

void write_simulation(const Simulation& sim, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "clients", ec);
  if (ec) throw io_error("cannot create " + out_dir.string() + ": " + ec.message());
  for (std::size_t c = 0; c < sim.clients.size(); ++c) {
    save_corpus(sim.clients[c], out_dir / "clients" / ("client_" + std::to_string(c) + ".jsonl"));
  }

  write_text(out_dir / "history_federated.csv", history_csv(sim.federated.run.history));
  write_text(out_dir / "history_centralized.csv", history_csv(sim.centralized.run.history));
  std::vector<HistoryRow> ind;
  for (const auto& s : sim.independent) {
    ind.insert(ind.end(), s.run.history.begin(), s.run.history.end());
  }
  std::stable_sort(ind.begin(), ind.end(), [](const HistoryRow& a, const HistoryRow& b) {
    return a.round < b.round;
  });
  write_text(out_dir / "history_independent.csv", history_csv(ind));

  std::vector<const ScenarioOutcome*> all = {&sim.centralized, &sim.federated};
  for (const auto& s : sim.independent) all.push_back(&s);
  for (const auto* s : all) {
    write_text(out_dir / ("eval_" + s->name + ".csv"), eval_report_csv(s->report));
    write_text(out_dir / ("eval_" + s->name + ".json"), eval_report_json(s->report) + "\n");
  }

  std::string cands =
      "description_id,candidate,gt_area_um2,gt_total_power_w,gt_slack_ns,area_um2,"
      "total_power_w,slack_ns\n";
  for (const auto& set : sim.federated_candidates) {
    for (std::size_t i = 0; i < set.candidates.size(); ++i) {
      const auto& c = set.candidates[i];
      cands += csv_field(set.description_id) + "," + std::to_string(i) + "," +
               format_double(set.gt.area) + "," + format_double(set.gt.total_power) + "," +
               format_double(set.gt.slack) + "," + format_double(c.area) + "," +
               format_double(c.total_power) + "," + format_double(c.slack) + "\n";
    }
  }
  write_text(out_dir / "candidates_federated.csv", cands);
  write_text(out_dir / "candidates_federated.jsonl",
             candidate_sets_jsonl(sim.federated_candidates));
  write_text(out_dir / "summary.json", summary_json(sim) + "\n");
}

// ---------------------------------------------------------------------------
// Report bundle

namespace {

double parse_double_field(const std::string& f, const std::string& where) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (f.empty() || ec != std::errc() || p != f.data() + f.size()) {
    throw parse_error(where + ": bad number '" + f + "'");
  }
  return v;
}

}  // namespace

void emit_report(const std::filesystem::path& results_dir,
                 const std::filesystem::path& out_dir, std::size_t bins) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(results_dir)) {
    throw io_error("results directory not found: " + results_dir.string());
  }
  const fs::path cands_path = results_dir / "candidates_federated.csv";
  if (!fs::exists(cands_path)) {
    throw io_error("missing " + cands_path.string() + " (is this a completed run?)");
  }
  std::vector<Corpus> clients = load_clients(results_dir / "clients");

  // Scenario order: centralized, federated, independent_0..n.
  std::vector<std::string> scenarios = {"centralized", "federated"};
  for (std::size_t i = 0; fs::exists(results_dir / ("eval_independent_" + std::to_string(i) + ".csv")); ++i) {
    scenarios.push_back("independent_" + std::to_string(i));
  }
  std::string chip = "scenario,k,value\n";
  for (const auto& name : scenarios) {
    const fs::path p = results_dir / ("eval_" + name + ".csv");
    if (!fs::exists(p)) throw io_error("missing " + p.string());
    auto scores = parse_scores_csv(read_text(p));
    if (scores.empty()) throw validation_error(p.string() + " has no descriptions");
    std::size_t max_k = scores[0].n;
    for (const auto& s : scores) max_k = std::min(max_k, s.n);
    for (std::size_t k = 1; k <= max_k; ++k) {
      chip += name + "," + std::to_string(k) + "," +
              format_double(chip_at_k_from_scores(scores, k)) + "\n";
    }
  }

  std::string scatter = "description_id,metric,ground_truth,generated\n";
  auto rows = parse_csv(read_text(cands_path));
  if (rows.empty()) throw parse_error(cands_path.string() + " is empty");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 8) throw parse_error(cands_path.string() + ": row needs 8 fields");
    if (row[1] != "0") continue;  // top-1 candidate per description
    const std::string where = cands_path.string() + " row " + std::to_string(r + 1);
    for (std::size_t m = 0; m < 3; ++m) {
      scatter += csv_field(row[0]) + "," +
                 std::string(metric_name(kAllMetrics[m])) + "," +
                 format_double(parse_double_field(row[2 + m], where)) + "," +
                 format_double(parse_double_field(row[5 + m], where)) + "\n";
    }
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw io_error("cannot create " + out_dir.string() + ": " + ec.message());
  write_text(out_dir / "divergence.csv", divergence_csv(clients, bins, false));
  write_text(out_dir / "chip_at_k.csv", chip);
  write_text(out_dir / "scatter.csv", scatter);
}

// ---------------------------------------------------------------------------
// Candidate files

std::string candidate_sets_jsonl(std::span<const CandidateSet> sets) {
  auto metrics_json = [](const PpaMetrics& m) {
    nlohmann::ordered_json j;
    j["area_um2"] = m.area;
    j["total_power_w"] = m.total_power;
    j["slack_ns"] = m.slack;
    return j;
  };
  std::string out;
  for (const auto& set : sets) {
    nlohmann::ordered_json j;
    j["description_id"] = set.description_id;
    j["gt"] = metrics_json(set.gt);
    j["candidates"] = nlohmann::ordered_json::array();
    for (const auto& c : set.candidates) j["candidates"].push_back(metrics_json(c));
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<CandidateSet> load_candidate_sets(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  std::vector<CandidateSet> out;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto metrics_of = [](const nlohmann::json& j) {
    PpaMetrics m{j.at("area_um2").get<double>(), j.at("total_power_w").get<double>(),
                 j.at("slack_ns").get<double>()};
    validate_metrics(m);
    return m;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      CandidateSet set;
      set.description_id = j.at("description_id").get<std::string>();
      set.gt = metrics_of(j.at("gt"));
      for (const auto& c : j.at("candidates")) set.candidates.push_back(metrics_of(c));
      if (set.candidates.empty()) throw validation_error("no candidates");
      if (!seen.insert(set.description_id).second) {
        throw validation_error("duplicate description_id " + set.description_id);
      }
      out.push_back(std::move(set));
    } catch (const nlohmann::json::exception& e) {
      throw parse_error(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.kind(), path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw io_error("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace fedchip
