#include "fedchip/fedchip.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>
#include <vector>

#include "fedchip/corpus.hpp"
#include "fedchip/divergence.hpp"
#include "fedchip/error.hpp"
#include "fedchip/evaluator.hpp"
#include "fedchip/experiment.hpp"
#include "fedchip/partitioner.hpp"
#include "fedchip/report_parser.hpp"

struct fc_corpus {
  fedchip::Corpus corpus;
};
struct fc_partition {
  fedchip::PartitionResult result;
};
struct fc_sim_config {
  fedchip::SimConfig cfg;
};
struct fc_simulation {
  fedchip::Simulation sim;
};

namespace {

thread_local std::string g_last_error;

fc_status fail(fc_status s, const char* msg) {
  g_last_error = msg;
  return s;
}

fc_status map_kind(fedchip::ErrorKind k) {
  switch (k) {
    case fedchip::ErrorKind::kValidation: return FC_ERR_VALIDATION;
    case fedchip::ErrorKind::kParse: return FC_ERR_PARSE;
    case fedchip::ErrorKind::kIo: return FC_ERR_IO;
    case fedchip::ErrorKind::kDomain: return FC_ERR_DOMAIN;
  }
  return FC_ERR_INTERNAL;
}

// Runs `f`, translating exceptions into status codes and the thread's error.
template <class F>
fc_status guard(F&& f) {
  try {
    g_last_error.clear();
    f();
    return FC_OK;
  } catch (const fedchip::Error& e) {
    return fail(map_kind(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(FC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(FC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(FC_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void require(const void* p, const char* what) {
  if (!p) throw fedchip::validation_error(std::string(what) + " must not be NULL");
}

fc_ppa to_c(const fedchip::PpaMetrics& m) { return {m.area, m.total_power, m.slack}; }

}  // namespace

extern "C" {

const char* fc_version(void) { return "0.1.0"; }

const char* fc_last_error(void) { return g_last_error.c_str(); }

void fc_string_free(char* s) { std::free(s); }

fc_status fc_corpus_generate(int64_t count, uint64_t seed, fc_corpus** out) {
  return guard([&] {
    require(out, "out");
    *out = new fc_corpus{fedchip::generate_synthetic(count, seed)};
  });
}

fc_status fc_corpus_load(const char* path, fc_corpus** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new fc_corpus{fedchip::load_corpus(path)};
  });
}

fc_status fc_corpus_save(const fc_corpus* corpus, const char* path) {
  return guard([&] {
    require(corpus, "corpus");
    require(path, "path");
    fedchip::save_corpus(corpus->corpus, path);
  });
}

size_t fc_corpus_size(const fc_corpus* corpus) { return corpus ? corpus->corpus.size() : 0; }

void fc_corpus_free(fc_corpus* corpus) { delete corpus; }

fc_status fc_cost_model(const fc_design_params* params, fc_ppa* out) {
  return guard([&] {
    require(params, "params");
    require(out, "out");
    fedchip::DesignParams p{params->array_dim, params->data_width, params->approx_mode,
                            params->tiling};
    *out = to_c(fedchip::cost_model(p));
  });
}

void fc_partition_options_default(fc_partition_options* opts) {
  if (!opts) return;
  fedchip::PartitionOptions d;
  opts->k = d.k;
  opts->fraction = d.spec.fraction;
  opts->alpha = d.spec.alpha;
  opts->per_point = d.spec.per_point ? 1 : 0;
  opts->seed = d.seed;
  opts->max_iters = d.max_iters;
  opts->tol = d.tol;
}

fc_status fc_partition_run(const fc_corpus* corpus, const fc_partition_options* opts,
                           fc_partition** out) {
  return guard([&] {
    require(corpus, "corpus");
    require(opts, "opts");
    require(out, "out");
    fedchip::PartitionOptions o;
    o.k = opts->k;
    o.spec.fraction = opts->fraction;
    o.spec.alpha = opts->alpha;
    o.spec.per_point = opts->per_point != 0;
    o.seed = opts->seed;
    o.max_iters = opts->max_iters;
    o.tol = opts->tol;
    *out = new fc_partition{fedchip::partition_corpus(corpus->corpus, o)};
  });
}

size_t fc_partition_client_count(const fc_partition* part) {
  return part ? part->result.clients.size() : 0;
}

size_t fc_partition_client_size(const fc_partition* part, size_t client) {
  if (!part || client >= part->result.clients.size()) return 0;
  return part->result.clients[client].size();
}

size_t fc_partition_reassigned_count(const fc_partition* part) {
  return part ? part->result.partition.reassigned_ids.size() : 0;
}

fc_status fc_partition_save(const fc_partition* part, const char* dir) {
  return guard([&] {
    require(part, "partition");
    require(dir, "dir");
    fedchip::save_partition(part->result, dir);
  });
}

void fc_partition_free(fc_partition* part) { delete part; }

fc_status fc_analyze_clients(const char* clients_dir, size_t bins, int bits, char** csv_out) {
  return guard([&] {
    require(clients_dir, "clients_dir");
    require(csv_out, "csv_out");
    const auto clients = fedchip::load_clients(clients_dir);
    *csv_out = dup_string(fedchip::divergence_csv(clients, bins, bits != 0));
  });
}

fc_status fc_chip_at_k(size_t n, size_t c, size_t k, double* out) {
  return guard([&] {
    require(out, "out");
    *out = fedchip::chip_at_k_single(n, c, k);
  });
}

fc_status fc_sigma_thresholds(const fc_corpus* reference, fc_ppa* out) {
  return guard([&] {
    require(reference, "reference");
    require(out, "out");
    const auto t = fedchip::sigma_thresholds(reference->corpus);
    *out = {t.sigma_area, t.sigma_power, t.sigma_slack};
  });
}

fc_status fc_evaluate_candidates(const char* candidates_path, const fc_corpus* reference,
                                 const size_t* ks, size_t n_ks, fc_slack_mode mode,
                                 char** json_out, char** csv_out) {
  return guard([&] {
    require(candidates_path, "candidates_path");
    require(reference, "reference");
    if (n_ks == 0) throw fedchip::validation_error("at least one k is required");
    require(ks, "ks");
    if (mode != FC_SLACK_LITERAL && mode != FC_SLACK_DIRECTION_AWARE) {
      throw fedchip::validation_error("unknown slack mode");
    }
    const auto sets = fedchip::load_candidate_sets(candidates_path);
    const auto t = fedchip::sigma_thresholds(reference->corpus);
    const std::vector<std::size_t> kv(ks, ks + n_ks);
    const auto report = fedchip::chip_at_k(sets, t, kv,
                                           mode == FC_SLACK_LITERAL
                                               ? fedchip::SlackMode::kLiteral
                                               : fedchip::SlackMode::kDirectionAware);
    std::string json = fedchip::eval_report_json(report);
    std::string csv = fedchip::eval_report_csv(report);
    char* j = json_out ? dup_string(json) : nullptr;
    try {
      if (csv_out) *csv_out = dup_string(csv);
    } catch (...) {
      std::free(j);
      throw;
    }
    if (json_out) *json_out = j;
  });
}

fc_status fc_sim_config_default(fc_sim_config** out) {
  return guard([&] {
    require(out, "out");
    *out = new fc_sim_config{};
  });
}

fc_status fc_sim_config_load(const char* path, fc_sim_config** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new fc_sim_config{fedchip::load_sim_config(path)};
  });
}

void fc_sim_config_set_seed(fc_sim_config* cfg, uint64_t seed) {
  if (cfg) fedchip::override_seeds(cfg->cfg, seed);
}

void fc_sim_config_free(fc_sim_config* cfg) { delete cfg; }

fc_status fc_simulate(const fc_sim_config* cfg, fc_simulation** out) {
  return guard([&] {
    require(cfg, "config");
    require(out, "out");
    *out = new fc_simulation{fedchip::run_simulation(cfg->cfg)};
  });
}

double fc_simulation_centralized(const fc_simulation* sim) {
  return sim ? sim->sim.chip_at_1(sim->sim.centralized) : 0.0;
}

double fc_simulation_federated(const fc_simulation* sim) {
  return sim ? sim->sim.chip_at_1(sim->sim.federated) : 0.0;
}

size_t fc_simulation_client_count(const fc_simulation* sim) {
  return sim ? sim->sim.independent.size() : 0;
}

double fc_simulation_independent(const fc_simulation* sim, size_t client) {
  if (!sim || client >= sim->sim.independent.size()) return 0.0;
  return sim->sim.chip_at_1(sim->sim.independent[client]);
}

fc_status fc_simulation_write(const fc_simulation* sim, const char* out_dir) {
  return guard([&] {
    require(sim, "simulation");
    require(out_dir, "out_dir");
    fedchip::write_simulation(sim->sim, out_dir);
  });
}

void fc_simulation_free(fc_simulation* sim) { delete sim; }

fc_status fc_emit_report(const char* results_dir, const char* out_dir, size_t bins) {
  return guard([&] {
    require(results_dir, "results_dir");
    require(out_dir, "out_dir");
    fedchip::emit_report(results_dir, out_dir, bins);
  });
}

fc_status fc_parse_report_text(const char* text, const char* source_name, fc_ppa* out) {
  return guard([&] {
    require(text, "text");
    require(out, "out");
    fedchip::ReportDoc doc{text, source_name ? source_name : "<text>"};
    *out = to_c(fedchip::parse_ppa(doc));
  });
}

fc_status fc_parse_report_file(const char* path, fc_ppa* out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = to_c(fedchip::parse_ppa(fedchip::read_report(path)));
  });
}

fc_status fc_parse_reports_jsonl(const char* const* paths, size_t n_paths, char** jsonl_out,
                                 char** errors_out, size_t* n_failed) {
  return guard([&] {
    require(jsonl_out, "jsonl_out");
    if (n_paths > 0) require(paths, "paths");
    std::vector<std::filesystem::path> files;
    for (size_t i = 0; i < n_paths; ++i) {
      require(paths[i], "path");
      files.emplace_back(paths[i]);
    }
    std::string rows, errors;
    size_t failed = 0;
    for (const auto& r : fedchip::parse_batch(files)) {
      if (r.metrics) {
        rows += fedchip::batch_row_json(r.source, *r.metrics);
        rows += '\n';
      } else {
        errors += r.error;
        errors += '\n';
        ++failed;
      }
    }
    char* e = errors_out ? dup_string(errors) : nullptr;
    try {
      *jsonl_out = dup_string(rows);
    } catch (...) {
      std::free(e);
      throw;
    }
    if (errors_out) *errors_out = e;
    if (n_failed) *n_failed = failed;
  });
}

}  // extern "C"
