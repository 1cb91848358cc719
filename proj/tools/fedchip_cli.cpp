// fedchip command-line driver. Talks to the library only through fedchip.h.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedchip/fedchip.h"

namespace {

constexpr std::uint64_t kDefaultSeed = 7;

constexpr const char* kConfigHelp = R"(
Config file (INI sections; every key optional, defaults shown):
  [data]       count=3000  seed=7  corpus=<path, replaces generation>
  [partition]  mode=kmeans_dirichlet|iid  k=3  fraction=0.2  alpha=1.0
               per_point=true  seed=7  max_iters=300  tol=1e-9
  [train]      rounds=20  local_epochs=1  batch_size=16  learning_rate=0.01
               lora_rank=8  lora_alpha=16  weight_decay=0.01  seed=7
               temperature=1.0  n_candidates=10
  [eval]       test_size=100 (per client)  k=1,5,10  slack_mode=literal
               seed=7  every_round=true
See configs/run.ini for an annotated example.)";

// Exit codes: 0 success, 1 invalid input, 2 I/O failure.
int exit_code(fc_status s) {
  switch (s) {
    case FC_OK: return 0;
    case FC_ERR_IO: return 2;
    default: return 1;
  }
}

struct Failure {
  int code;
};

void check(fc_status s) {
  if (s != FC_OK) {
    std::cerr << "error: " << fc_last_error() << "\n";
    throw Failure{exit_code(s)};
  }
}

struct StringDeleter {
  void operator()(char* p) const { fc_string_free(p); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text) || !out.flush()) {
    std::cerr << "error: cannot write " << path.string() << "\n";
    throw Failure{2};
  }
}

void emit(const std::optional<std::string>& out, const std::string& text) {
  if (out) {
    write_file(*out, text);
  } else {
    std::cout << text;
  }
}

// --seed beats FEDCHIP_SEED, which beats the built-in default.
std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("FEDCHIP_SEED");
  if (!v || !*v) return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long s = std::stoull(v, &used);
    if (used != std::string(v).size()) throw std::invalid_argument(v);
    return s;
  } catch (const std::exception&) {
    std::cerr << "error: FEDCHIP_SEED is not an unsigned integer: " << v << "\n";
    throw Failure{1};
  }
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (auto s = env_seed()) return *s;
  return kDefaultSeed;
}

template <class T, class D>
using Handle = std::unique_ptr<T, D>;

struct CorpusFree {
  void operator()(fc_corpus* p) const { fc_corpus_free(p); }
};
struct PartitionFree {
  void operator()(fc_partition* p) const { fc_partition_free(p); }
};
struct ConfigFree {
  void operator()(fc_sim_config* p) const { fc_sim_config_free(p); }
};
struct SimulationFree {
  void operator()(fc_simulation* p) const { fc_simulation_free(p); }
};

Handle<fc_corpus, CorpusFree> load_corpus(const std::string& path) {
  fc_corpus* c = nullptr;
  check(fc_corpus_load(path.c_str(), &c));
  return Handle<fc_corpus, CorpusFree>(c);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fedchip: federated fine-tuning simulator and Chip@k evaluation"};
  app.require_subcommand(1, 1);
  app.option_defaults()->always_capture_default();
  app.footer("Exit codes: 0 success, 1 invalid input, 2 I/O error.\n"
             "Seeds: --seed, else $FEDCHIP_SEED, else 7.");

  std::optional<std::uint64_t> seed;
  auto add_seed = [&](CLI::App* sub, const std::string& what) {
    sub->add_option("--seed", seed, what + " (default: $FEDCHIP_SEED, else 7)");
  };

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic design corpus (JSONL)");
  std::int64_t gen_count = 3000;
  std::string gen_out;
  gen->add_option("--count", gen_count, "Number of records");
  gen->add_option("--out", gen_out, "Output JSONL path")->required();
  add_seed(gen, "Generation seed");

  // partition
  auto* part = app.add_subcommand(
      "partition", "K-means + Dirichlet reassignment into per-client corpora");
  std::string part_in, part_out;
  fc_partition_options popts;
  fc_partition_options_default(&popts);
  popts.k = 3;
  bool shared_dirichlet = false;
  part->add_option("--in", part_in, "Input corpus JSONL")->required();
  part->add_option("--out-dir", part_out, "Directory for client_<i>.jsonl + partition.json")
      ->required();
  part->add_option("--k", popts.k, "Number of clusters (clients)");
  part->add_option("--fraction", popts.fraction, "Fraction of points reassigned");
  part->add_option("--alpha", popts.alpha, "Dirichlet concentration");
  part->add_flag("--shared-dirichlet", shared_dirichlet,
                 "Draw one Dirichlet vector for all reassigned points "
                 "(default: one draw per point)");
  part->add_option("--max-iters", popts.max_iters, "K-means iteration cap");
  part->add_option("--tol", popts.tol, "K-means centroid-shift tolerance");
  add_seed(part, "Partition seed");

  // analyze
  auto* analyze = app.add_subcommand(
      "analyze", "KL/JS divergence matrices between client metric histograms");
  std::string an_in;
  std::optional<std::string> an_out;
  std::size_t an_bins = 50;
  bool an_bits = false;
  analyze->add_option("--in", an_in, "Directory with client_<i>.jsonl")->required();
  analyze->add_option("--bins", an_bins, "Histogram bins per metric");
  analyze->add_flag("--bits", an_bits, "Report in bits instead of nats");
  analyze->add_option("--out", an_out, "Output CSV (default: stdout)");

  // simulate
  auto* sim = app.add_subcommand(
      "simulate", "Centralized vs federated vs independent training + Chip@k");
  std::optional<std::string> sim_config;
  std::string sim_out;
  sim->add_option("--config", sim_config, "Run config (INI); built-in defaults if omitted");
  sim->add_option("--out", sim_out, "Results directory")->required();
  sim->add_option("--seed", seed,
                  "Override every seed in the config (default: $FEDCHIP_SEED, else the "
                  "config's seeds)");
  sim->footer(kConfigHelp);

  // evaluate
  auto* eval = app.add_subcommand(
      "evaluate", "Chip@k scoring: a results bundle, or candidates vs a reference corpus");
  std::optional<std::string> ev_results, ev_candidates, ev_reference;
  std::string ev_out;
  std::vector<std::size_t> ev_ks = {1, 5, 10};
  std::string ev_slack = "literal";
  std::size_t ev_bins = 50;
  auto* ev_results_opt =
      eval->add_option("--results", ev_results,
                       "Results directory from `simulate`; writes divergence.csv, "
                       "chip_at_k.csv, scatter.csv");
  auto* ev_cand_opt = eval->add_option(
      "--candidates", ev_candidates,
      "Candidates JSONL {description_id, gt, candidates[]}; writes eval.json, eval.csv");
  auto* ev_ref_opt =
      eval->add_option("--reference", ev_reference, "Corpus JSONL defining the sigma thresholds");
  eval->add_option("--out", ev_out, "Output directory")->required();
  eval->add_option("--k", ev_ks, "k values for Chip@k (with --candidates)")->delimiter(',');
  eval->add_option("--slack-mode", ev_slack, "Slack acceptance rule")
      ->check(CLI::IsMember({"literal", "direction_aware"}));
  eval->add_option("--bins", ev_bins, "Histogram bins (with --results)");
  ev_results_opt->excludes(ev_cand_opt)->excludes(ev_ref_opt);
  ev_cand_opt->needs(ev_ref_opt);
  ev_ref_opt->needs(ev_cand_opt);

  // parse-report
  auto* parse = app.add_subcommand("parse-report",
                                   "Extract area/power/slack from synthesis reports (JSONL)");
  std::vector<std::string> pr_files;
  std::optional<std::string> pr_out;
  parse->add_option("files", pr_files, "Report files")->required();
  parse->add_option("--out", pr_out, "Output JSONL (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (gen->parsed()) {
      fc_corpus* c = nullptr;
      check(fc_corpus_generate(gen_count, resolve_seed(seed), &c));
      Handle<fc_corpus, CorpusFree> corpus(c);
      check(fc_corpus_save(corpus.get(), gen_out.c_str()));
      std::cout << "wrote " << fc_corpus_size(corpus.get()) << " records to " << gen_out
                << "\n";
    } else if (part->parsed()) {
      auto corpus = load_corpus(part_in);
      popts.seed = resolve_seed(seed);
      popts.per_point = shared_dirichlet ? 0 : 1;
      fc_partition* p = nullptr;
      check(fc_partition_run(corpus.get(), &popts, &p));
      Handle<fc_partition, PartitionFree> result(p);
      check(fc_partition_save(result.get(), part_out.c_str()));
      std::cout << "clients:";
      for (std::size_t i = 0; i < fc_partition_client_count(result.get()); ++i) {
        std::cout << " " << fc_partition_client_size(result.get(), i);
      }
      std::cout << "  reassigned: " << fc_partition_reassigned_count(result.get()) << "\n";
    } else if (analyze->parsed()) {
      char* csv = nullptr;
      check(fc_analyze_clients(an_in.c_str(), an_bins, an_bits ? 1 : 0, &csv));
      OwnedString owned(csv);
      emit(an_out, csv);
    } else if (sim->parsed()) {
      fc_sim_config* c = nullptr;
      if (sim_config) {
        check(fc_sim_config_load(sim_config->c_str(), &c));
      } else {
        check(fc_sim_config_default(&c));
      }
      Handle<fc_sim_config, ConfigFree> cfg(c);
      std::optional<std::uint64_t> s = seed ? seed : env_seed();
      if (s) fc_sim_config_set_seed(cfg.get(), *s);
      fc_simulation* r = nullptr;
      check(fc_simulate(cfg.get(), &r));
      Handle<fc_simulation, SimulationFree> run(r);
      check(fc_simulation_write(run.get(), sim_out.c_str()));
      std::cout << "chip@1 centralized " << fmt(fc_simulation_centralized(run.get()))
                << " federated " << fmt(fc_simulation_federated(run.get())) << " independent";
      for (std::size_t i = 0; i < fc_simulation_client_count(run.get()); ++i) {
        std::cout << " " << fmt(fc_simulation_independent(run.get(), i));
      }
      std::cout << "\n";
    } else if (eval->parsed()) {
      if (ev_results) {
        check(fc_emit_report(ev_results->c_str(), ev_out.c_str(), ev_bins));
      } else if (ev_candidates) {
        auto reference = load_corpus(*ev_reference);
        char* json = nullptr;
        char* csv = nullptr;
        check(fc_evaluate_candidates(ev_candidates->c_str(), reference.get(), ev_ks.data(),
                                     ev_ks.size(),
                                     ev_slack == "literal" ? FC_SLACK_LITERAL
                                                           : FC_SLACK_DIRECTION_AWARE,
                                     &json, &csv));
        OwnedString j(json), v(csv);
        const std::filesystem::path dir = ev_out;
        write_file(dir / "eval.json", json);
        write_file(dir / "eval.csv", csv);
        std::cout << json;
      } else {
        std::cerr << "error: evaluate needs --results, or --candidates with --reference\n";
        return 1;
      }
    } else if (parse->parsed()) {
      std::vector<const char*> paths;
      for (const auto& f : pr_files) {
        std::error_code ec;
        if (!std::filesystem::is_regular_file(f, ec)) {
          std::cerr << "error: cannot open report: " << f << "\n";
          return 2;
        }
        paths.push_back(f.c_str());
      }
      char* rows = nullptr;
      char* errors = nullptr;
      std::size_t failed = 0;
      check(fc_parse_reports_jsonl(paths.data(), paths.size(), &rows, &errors, &failed));
      OwnedString r(rows), e(errors);
      emit(pr_out, rows);
      if (failed > 0) {
        std::cerr << errors;
        return 1;
      }
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return 0;
}
