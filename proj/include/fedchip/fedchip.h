/* C interface to the fedchip library.
 *
 * Every fallible call returns an fc_status. On failure the message for the
 * calling thread is available from fc_last_error() until the next call.
 * Strings returned through char** out-parameters are heap allocated and must
 * be released with fc_string_free(). Handles are released with their
 * matching *_free function; passing NULL to any *_free is a no-op.
 */
#ifndef FEDCHIP_FEDCHIP_H
#define FEDCHIP_FEDCHIP_H

#include <stddef.h>
#include <stdint.h>

#if defined(FEDCHIP_BUILDING_LIBRARY)
#define FC_API __attribute__((visibility("default")))
#else
#define FC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fc_status {
  FC_OK = 0,
  FC_ERR_VALIDATION = 1,
  FC_ERR_IO = 2,
  FC_ERR_PARSE = 3,
  FC_ERR_DOMAIN = 4,
  FC_ERR_INTERNAL = 5
} fc_status;

typedef enum fc_slack_mode {
  FC_SLACK_LITERAL = 0,
  FC_SLACK_DIRECTION_AWARE = 1
} fc_slack_mode;

typedef struct fc_design_params {
  int array_dim;
  int data_width;
  int approx_mode;
  int tiling;
} fc_design_params;

typedef struct fc_ppa {
  double area_um2;
  double total_power_w;
  double slack_ns;
} fc_ppa;

typedef struct fc_partition_options {
  size_t k;
  double fraction;
  double alpha;
  int per_point; /* nonzero: one Dirichlet draw per reassigned point */
  uint64_t seed;
  size_t max_iters;
  double tol;
} fc_partition_options;

typedef struct fc_corpus fc_corpus;
typedef struct fc_partition fc_partition;
typedef struct fc_sim_config fc_sim_config;
typedef struct fc_simulation fc_simulation;

FC_API const char* fc_version(void);
FC_API const char* fc_last_error(void);
FC_API void fc_string_free(char* s);

/* Corpus */
FC_API fc_status fc_corpus_generate(int64_t count, uint64_t seed, fc_corpus** out);
FC_API fc_status fc_corpus_load(const char* path, fc_corpus** out);
FC_API fc_status fc_corpus_save(const fc_corpus* corpus, const char* path);
FC_API size_t fc_corpus_size(const fc_corpus* corpus);
FC_API void fc_corpus_free(fc_corpus* corpus);
FC_API fc_status fc_cost_model(const fc_design_params* params, fc_ppa* out);

/* Partitioning */
FC_API void fc_partition_options_default(fc_partition_options* opts);
FC_API fc_status fc_partition_run(const fc_corpus* corpus, const fc_partition_options* opts,
                                  fc_partition** out);
FC_API size_t fc_partition_client_count(const fc_partition* part);
FC_API size_t fc_partition_client_size(const fc_partition* part, size_t client);
FC_API size_t fc_partition_reassigned_count(const fc_partition* part);
/* Writes client_<i>.jsonl and partition.json into dir (created if needed). */
FC_API fc_status fc_partition_save(const fc_partition* part, const char* dir);
FC_API void fc_partition_free(fc_partition* part);

/* Divergence CSV (metric,measure,cluster_i,cluster_j,value) over the
 * client_<i>.jsonl files in clients_dir. */
FC_API fc_status fc_analyze_clients(const char* clients_dir, size_t bins, int bits,
                                    char** csv_out);

/* Evaluation */
FC_API fc_status fc_chip_at_k(size_t n, size_t c, size_t k, double* out);
FC_API fc_status fc_sigma_thresholds(const fc_corpus* reference, fc_ppa* out);
/* Scores a candidates JSONL file against sigma thresholds taken from the
 * reference corpus. Returns the report as JSON ({"1": v, ...}) and per
 * description CSV; either out-parameter may be NULL. */
FC_API fc_status fc_evaluate_candidates(const char* candidates_path,
                                        const fc_corpus* reference, const size_t* ks,
                                        size_t n_ks, fc_slack_mode mode, char** json_out,
                                        char** csv_out);

/* Simulation */
FC_API fc_status fc_sim_config_default(fc_sim_config** out);
FC_API fc_status fc_sim_config_load(const char* path, fc_sim_config** out);
FC_API void fc_sim_config_set_seed(fc_sim_config* cfg, uint64_t seed);
FC_API void fc_sim_config_free(fc_sim_config* cfg);
FC_API fc_status fc_simulate(const fc_sim_config* cfg, fc_simulation** out);
FC_API double fc_simulation_centralized(const fc_simulation* sim);
FC_API double fc_simulation_federated(const fc_simulation* sim);
FC_API size_t fc_simulation_client_count(const fc_simulation* sim);
FC_API double fc_simulation_independent(const fc_simulation* sim, size_t client);
FC_API fc_status fc_simulation_write(const fc_simulation* sim, const char* out_dir);
FC_API void fc_simulation_free(fc_simulation* sim);
/* divergence.csv, chip_at_k.csv and scatter.csv from a results directory. */
FC_API fc_status fc_emit_report(const char* results_dir, const char* out_dir, size_t bins);

/* Synthesis reports */
FC_API fc_status fc_parse_report_text(const char* text, const char* source_name, fc_ppa* out);
FC_API fc_status fc_parse_report_file(const char* path, fc_ppa* out);
/* One JSONL row per successfully parsed file. Failures are collected as
 * "source: message" lines in errors_out (may be NULL); *n_failed counts them. */
FC_API fc_status fc_parse_reports_jsonl(const char* const* paths, size_t n_paths,
                                        char** jsonl_out, char** errors_out,
                                        size_t* n_failed);

#ifdef __cplusplus
}
#endif

#endif /* FEDCHIP_FEDCHIP_H */
