#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "fedchip/corpus.hpp"

namespace fedchip {

// ---------------------------------------------------------------------------
// Features

// Bag-of-token encoder over the synthetic instruction grammar.
//
// Tokens are lower-cased and stripped of surrounding punctuation; features
// are binary presence. Numbers are plain tokens, so "8" reads the same
// whether it names the array dimension, the data width or the tiling factor
// and the model has to learn which field a number usually belongs to. Slot 0
// is a constant bias, slot 1 collects every token outside the vocabulary.
class Featurizer {
 public:
  Featurizer();

  std::size_t dim() const { return 2 + vocab_.size(); }
  Eigen::VectorXd featurize(std::string_view instruction) const;
  // Feature slot owned by a token key, if it is in the vocabulary.
  std::optional<std::size_t> slot(std::string_view token_key) const;
  static std::vector<std::string> token_keys(std::string_view instruction);

  static constexpr std::size_t kBias = 0;
  static constexpr std::size_t kOov = 1;

 private:
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::size_t> index_;
};

// The four categorical outputs and their value sets.
enum class Head : std::size_t { kArrayDim = 0, kDataWidth, kApproxMode, kTiling };
inline constexpr std::size_t kNumHeads = 4;

std::vector<std::size_t> head_sizes();
// Throws if a parameter lies outside the surrogate's value sets.
std::vector<std::size_t> encode_params(const DesignParams& p);
DesignParams decode_params(std::span<const std::size_t> indices);

// ---------------------------------------------------------------------------
// Model

// Frozen base weights, one (V_h x F) matrix per head.
struct SurrogateModel {
  std::vector<Eigen::MatrixXd> base;

  std::size_t feature_dim() const { return base.empty() ? 0 : base[0].cols(); }
  std::size_t heads() const { return base.size(); }
};

SurrogateModel make_base_model(std::span<const std::size_t> head_sizes,
                               std::size_t feature_dim, std::uint64_t seed);

// Low-rank delta per head: (alpha / rank) * B * A, A is r x F, B is V_h x r.
struct LoraAdapter {
  std::size_t rank = 8;
  double alpha = 16.0;
  std::vector<Eigen::MatrixXd> a;
  std::vector<Eigen::MatrixXd> b;

  double scale() const { return alpha / static_cast<double>(rank); }
  friend bool operator==(const LoraAdapter&, const LoraAdapter&) = default;
};

// A ~ N(0, 1/F), B = 0: the initial delta is exactly zero.
LoraAdapter make_adapter(const SurrogateModel& model, std::size_t rank, double alpha,
                         std::uint64_t seed);

void check_shapes(const SurrogateModel& model, const LoraAdapter& adapter);

using HeadProbs = std::vector<Eigen::VectorXd>;
using Targets = std::vector<std::size_t>;

std::vector<Eigen::VectorXd> logits(const SurrogateModel& model, const LoraAdapter& adapter,
                                    const Eigen::VectorXd& features);
HeadProbs forward(const SurrogateModel& model, const LoraAdapter& adapter,
                  const Eigen::VectorXd& features);

inline constexpr double kProbabilityFloor = 1e-12;

// -(1/N) sum_i sum_h log p_i,h[target]. Probabilities below kProbabilityFloor
// are clamped; `clamped` (if given) is incremented for each occurrence.
double cross_entropy(std::span<const HeadProbs> probs, std::span<const Targets> targets,
                     std::size_t* clamped = nullptr);

struct Example {
  Eigen::VectorXd features;
  Targets targets;
};

std::vector<Example> make_examples(const Corpus& corpus, const Featurizer& featurizer);

struct AdapterGrad {
  std::vector<Eigen::MatrixXd> a;
  std::vector<Eigen::MatrixXd> b;
  double loss = 0.0;
};

// Gradient of the batch-mean cross-entropy with respect to A and B only.
AdapterGrad grad(const SurrogateModel& model, const LoraAdapter& adapter,
                 std::span<const Example> batch);

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  std::size_t rounds = 20;
  std::size_t local_epochs = 1;
  std::size_t batch_size = 16;
  double learning_rate = 1e-2;
  std::size_t lora_rank = 8;
  double lora_alpha = 16.0;
  double weight_decay = 0.01;
  std::uint64_t seed = 7;
  double temperature = 1.0;
  std::size_t n_candidates = 10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

void validate_train_config(const TrainConfig& cfg);

struct AdamState {
  std::vector<Eigen::MatrixXd> m_a, v_a, m_b, v_b;
  std::uint64_t step = 0;
};

AdamState make_adam_state(const LoraAdapter& adapter);

// One decoupled-weight-decay Adam update of A and B.
void adamw_step(LoraAdapter& adapter, const AdapterGrad& g, AdamState& state,
                const TrainConfig& cfg);

struct ClientState {
  std::size_t client_id = 0;
  Corpus corpus;
  std::vector<Example> examples;  // featurized corpus, never leaves the client
  LoraAdapter adapter;
  AdamState optimizer;
};

ClientState make_client(std::size_t client_id, Corpus corpus, const Featurizer& featurizer);

struct LocalResult {
  LoraAdapter adapter;
  std::vector<double> loss_trace;  // one entry per optimizer step
};

// local_epochs passes of shuffled mini-batches starting from client.adapter.
// The optimizer restarts every call; batch order is keyed on
// (seed, client_id, round).
LocalResult local_train(ClientState& client, const SurrogateModel& model,
                        const TrainConfig& cfg, std::size_t round);

// Weighted mean of A and B separately, accumulated in list order.
LoraAdapter fedavg(std::span<const LoraAdapter> adapters, std::span<const double> weights);

// ---------------------------------------------------------------------------
// Wire

// The only payload a client sends to the server.
struct ClientUpdate {
  std::size_t client_id = 0;
  std::size_t round = 0;
  std::size_t num_examples = 0;
  LoraAdapter adapter;
};

std::string serialize_update(const ClientUpdate& update);
ClientUpdate deserialize_update(std::string_view bytes);

// In-process client -> server transport. Every message crosses the
// serialization boundary; an optional tap sees the raw bytes.
class UpdateChannel {
 public:
  using Tap = std::function<void(std::string_view)>;

  explicit UpdateChannel(Tap tap = {}) : tap_(std::move(tap)) {}

  void send(const ClientUpdate& update);
  std::vector<ClientUpdate> drain();

 private:
  Tap tap_;
  std::vector<std::string> pending_;
};

// ---------------------------------------------------------------------------
// Regimes

struct HistoryRow {
  std::size_t round = 0;
  std::size_t client_id = 0;
  double loss = 0.0;
  std::optional<double> chip_at_1;
};

// Scores an adapter (e.g. Chip@1 on a held-out set).
using AdapterScorer = std::function<double(const LoraAdapter&)>;

struct RunResult {
  LoraAdapter adapter;
  std::vector<HistoryRow> history;
};

struct RunOptions {
  AdapterScorer scorer;         // evaluated after every round when set
  UpdateChannel::Tap wire_tap;  // observes serialized client updates
};

// Rounds of broadcast -> local_train -> FedAvg weighted by client size.
RunResult run_federated(std::span<const Corpus> corpora, const SurrogateModel& model,
                        const Featurizer& featurizer, const TrainConfig& cfg,
                        const RunOptions& opts = {});

// One site trained on the concatenation, same schedule as a federated run.
RunResult run_centralized(std::span<const Corpus> corpora, const SurrogateModel& model,
                          const Featurizer& featurizer, const TrainConfig& cfg,
                          const RunOptions& opts = {});

// Each client alone, keyed by its own client id.
std::vector<RunResult> run_independent(std::span<const Corpus> corpora,
                                       const SurrogateModel& model,
                                       const Featurizer& featurizer, const TrainConfig& cfg,
                                       const RunOptions& opts = {});

// ---------------------------------------------------------------------------
// Generation

struct Candidate {
  DesignParams params;
  PpaMetrics metrics;
};

// Samples every head from softmax(logits / temperature), n times.
std::vector<Candidate> generate_candidates(const SurrogateModel& model,
                                           const LoraAdapter& adapter,
                                           const Featurizer& featurizer,
                                           std::string_view instruction, std::size_t n,
                                           double temperature, std::uint64_t seed);

}  // namespace fedchip
