#include "fedchip/fedsim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "json.hpp"

#include "fedchip/error.hpp"
#include "fedchip/rng.hpp"

namespace fedchip {

namespace {

std::string strip_punct(std::string_view t) {
  auto punct = [](unsigned char c) {
    return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' ||
           c == '(' || c == ')' || c == '"' || c == '\'';
  };
  while (!t.empty() && punct(t.front())) t.remove_prefix(1);
  while (!t.empty() && punct(t.back())) t.remove_suffix(1);
  std::string out(t);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
  const double mx = z.maxCoeff();
  Eigen::VectorXd e = (z.array() - mx).exp().matrix();
  return e / e.sum();
}

}  // namespace

// ---------------------------------------------------------------------------
// Features

Featurizer::Featurizer() {
  for (const char* w : {"generate", "a", "systolic", "array", "accelerator", "with",
                        "dimension", "data", "width", "bits", "approximation", "mode",
                        "and", "memory", "tiling", "factor"}) {
    vocab_.emplace_back(w);
  }
  for (int v = 0; v <= kMaxDataWidth; ++v) vocab_.push_back(std::to_string(v));
  for (int d : kArrayDims) {
    if (d > kMaxDataWidth) vocab_.push_back(std::to_string(d));
  }
  for (std::size_t i = 0; i < vocab_.size(); ++i) index_.emplace(vocab_[i], 2 + i);
}

std::vector<std::string> Featurizer::token_keys(std::string_view instruction) {
  std::vector<std::string> keys;
  std::size_t pos = 0;
  while (pos < instruction.size()) {
    while (pos < instruction.size() &&
           std::isspace(static_cast<unsigned char>(instruction[pos]))) {
      ++pos;
    }
    std::size_t end = pos;
    while (end < instruction.size() &&
           !std::isspace(static_cast<unsigned char>(instruction[end]))) {
      ++end;
    }
    if (end == pos) break;
    std::string tok = strip_punct(instruction.substr(pos, end - pos));
    pos = end;
    if (!tok.empty()) keys.push_back(std::move(tok));
  }
  return keys;
}

std::optional<std::size_t> Featurizer::slot(std::string_view token_key) const {
  auto it = index_.find(std::string(token_key));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Eigen::VectorXd Featurizer::featurize(std::string_view instruction) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim()));
  x[kBias] = 1.0;
  for (const auto& k : token_keys(instruction)) {
    auto s = slot(k);
    x[static_cast<Eigen::Index>(s ? *s : kOov)] = 1.0;
  }
  return x;
}

std::vector<std::size_t> head_sizes() {
  return {kArrayDims.size(), static_cast<std::size_t>(kMaxDataWidth - kMinDataWidth + 1),
          static_cast<std::size_t>(kNumApproxModes),
          static_cast<std::size_t>(kMaxGeneratedTiling)};
}

std::vector<std::size_t> encode_params(const DesignParams& p) {
  validate_params(p);
  auto dim_it = std::find(kArrayDims.begin(), kArrayDims.end(), p.array_dim);
  if (p.tiling > kMaxGeneratedTiling) {
    throw validation_error("tiling " + std::to_string(p.tiling) +
                           " exceeds the surrogate's value set (max " +
                           std::to_string(kMaxGeneratedTiling) + ")");
  }
  return {static_cast<std::size_t>(dim_it - kArrayDims.begin()),
          static_cast<std::size_t>(p.data_width - kMinDataWidth),
          static_cast<std::size_t>(p.approx_mode), static_cast<std::size_t>(p.tiling - 1)};
}

DesignParams decode_params(std::span<const std::size_t> idx) {
  const auto sizes = head_sizes();
  if (idx.size() != kNumHeads) throw validation_error("expected 4 head indices");
  for (std::size_t h = 0; h < kNumHeads; ++h) {
    if (idx[h] >= sizes[h]) throw validation_error("head index out of range");
  }
  DesignParams p;
  p.array_dim = kArrayDims[idx[0]];
  p.data_width = kMinDataWidth + static_cast<int>(idx[1]);
  p.approx_mode = static_cast<int>(idx[2]);
  p.tiling = 1 + static_cast<int>(idx[3]);
  return p;
}

// ---------------------------------------------------------------------------
// Model

SurrogateModel make_base_model(std::span<const std::size_t> sizes, std::size_t feature_dim,
                               std::uint64_t seed) {
  if (feature_dim == 0 || sizes.empty()) throw validation_error("empty model shape");
  Rng rng = make_rng({seed, key(Stream::kBaseModel)});
  boost::random::normal_distribution<double> noise(0.0, 0.1);
  SurrogateModel m;
  for (std::size_t v : sizes) {
    Eigen::MatrixXd w(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(feature_dim));
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = noise(rng);
    }
    m.base.push_back(std::move(w));
  }
  return m;
}

LoraAdapter make_adapter(const SurrogateModel& model, std::size_t rank, double alpha,
                         std::uint64_t seed) {
  if (rank == 0) throw validation_error("lora rank must be >= 1");
  if (!(alpha > 0.0)) throw validation_error("lora alpha must be > 0");
  Rng rng = make_rng({seed, key(Stream::kAdapterInit)});
  const auto f = static_cast<Eigen::Index>(model.feature_dim());
  boost::random::normal_distribution<double> noise(0.0, 1.0 / std::sqrt(double(f)));
  LoraAdapter ad;
  ad.rank = rank;
  ad.alpha = alpha;
  const auto r = static_cast<Eigen::Index>(rank);
  for (const auto& w : model.base) {
    Eigen::MatrixXd a(r, f);
    for (Eigen::Index c = 0; c < f; ++c) {
      for (Eigen::Index i = 0; i < r; ++i) a(i, c) = noise(rng);
    }
    ad.a.push_back(std::move(a));
    ad.b.push_back(Eigen::MatrixXd::Zero(w.rows(), r));
  }
  return ad;
}

void check_shapes(const SurrogateModel& model, const LoraAdapter& adapter) {
  const auto f = static_cast<Eigen::Index>(model.feature_dim());
  const auto r = static_cast<Eigen::Index>(adapter.rank);
  if (adapter.a.size() != model.heads() || adapter.b.size() != model.heads()) {
    throw validation_error("adapter head count does not match the model");
  }
  for (std::size_t h = 0; h < model.heads(); ++h) {
    if (adapter.a[h].rows() != r || adapter.a[h].cols() != f ||
        adapter.b[h].rows() != model.base[h].rows() || adapter.b[h].cols() != r) {
      throw validation_error("adapter shape mismatch in head " + std::to_string(h));
    }
  }
}

std::vector<Eigen::VectorXd> logits(const SurrogateModel& model, const LoraAdapter& adapter,
                                    const Eigen::VectorXd& x) {
  if (x.size() != static_cast<Eigen::Index>(model.feature_dim())) {
    throw validation_error("feature vector has the wrong dimension");
  }
  std::vector<Eigen::VectorXd> out;
  out.reserve(model.heads());
  const double s = adapter.scale();
  for (std::size_t h = 0; h < model.heads(); ++h) {
    Eigen::VectorXd z = adapter.a[h] * x;
    out.push_back(model.base[h] * x + s * (adapter.b[h] * z));
  }
  return out;
}

HeadProbs forward(const SurrogateModel& model, const LoraAdapter& adapter,
                  const Eigen::VectorXd& x) {
  check_shapes(model, adapter);
  HeadProbs p;
  for (auto& z : logits(model, adapter, x)) p.push_back(softmax(z));
  return p;
}

double cross_entropy(std::span<const HeadProbs> probs, std::span<const Targets> targets,
                     std::size_t* clamped) {
  if (probs.empty()) throw validation_error("cross-entropy of an empty batch");
  if (probs.size() != targets.size()) {
    throw validation_error("batch probabilities and targets differ in length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i].size() != targets[i].size()) {
      throw validation_error("head count mismatch between probabilities and targets");
    }
    for (std::size_t h = 0; h < probs[i].size(); ++h) {
      const auto t = static_cast<Eigen::Index>(targets[i][h]);
      if (t >= probs[i][h].size()) throw validation_error("target index out of range");
      double p = probs[i][h][t];
      if (p < kProbabilityFloor) {
        p = kProbabilityFloor;
        if (clamped) ++*clamped;
      }
      total -= std::log(p);
    }
  }
  return total / static_cast<double>(probs.size());
}

std::vector<Example> make_examples(const Corpus& corpus, const Featurizer& featurizer) {
  std::vector<Example> out;
  out.reserve(corpus.size());
  for (const auto& r : corpus.records) {
    if (!r.params) {
      throw validation_error("record " + r.id +
                             " has no params; surrogate training needs design parameters");
    }
    out.push_back(Example{featurizer.featurize(r.instruction), encode_params(*r.params)});
  }
  return out;
}

AdapterGrad grad(const SurrogateModel& model, const LoraAdapter& adapter,
                 std::span<const Example> batch) {
  if (batch.empty()) throw validation_error("gradient of an empty batch");
  check_shapes(model, adapter);
  const double s = adapter.scale();
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  AdapterGrad g;
  for (std::size_t h = 0; h < model.heads(); ++h) {
    g.a.push_back(Eigen::MatrixXd::Zero(adapter.a[h].rows(), adapter.a[h].cols()));
    g.b.push_back(Eigen::MatrixXd::Zero(adapter.b[h].rows(), adapter.b[h].cols()));
  }
  double loss = 0.0;
  for (const auto& ex : batch) {
    if (ex.targets.size() != model.heads()) throw validation_error("target count mismatch");
    for (std::size_t h = 0; h < model.heads(); ++h) {
      const Eigen::VectorXd z = adapter.a[h] * ex.features;
      Eigen::VectorXd p = softmax(model.base[h] * ex.features + s * (adapter.b[h] * z));
      const auto t = static_cast<Eigen::Index>(ex.targets[h]);
      if (t >= p.size()) throw validation_error("target index out of range");
      loss -= std::log(std::max(p[t], kProbabilityFloor));
      p[t] -= 1.0;  // dL/dlogits = p - onehot
      // logits = W0 x + s B (A x)
      g.b[h].noalias() += (s * inv_n) * p * z.transpose();
      g.a[h].noalias() += (s * inv_n) * (adapter.b[h].transpose() * p) * ex.features.transpose();
    }
  }
  g.loss = loss * inv_n;
  return g;
}

// ---------------------------------------------------------------------------
// Training

void validate_train_config(const TrainConfig& c) {
  if (c.rounds == 0) throw validation_error("train.rounds must be >= 1");
  if (c.batch_size == 0) throw validation_error("train.batch_size must be >= 1");
  if (!(c.learning_rate > 0.0)) throw validation_error("train.learning_rate must be > 0");
  if (c.lora_rank == 0) throw validation_error("train.lora_rank must be >= 1");
  if (!(c.lora_alpha > 0.0)) throw validation_error("train.lora_alpha must be > 0");
  if (!(c.weight_decay >= 0.0)) throw validation_error("train.weight_decay must be >= 0");
  if (!(c.temperature > 0.0)) throw validation_error("train.temperature must be > 0");
  if (c.n_candidates == 0) throw validation_error("train.n_candidates must be >= 1");
  if (!(c.beta1 >= 0.0 && c.beta1 < 1.0 && c.beta2 >= 0.0 && c.beta2 < 1.0)) {
    throw validation_error("adam betas must be in [0, 1)");
  }
}

AdamState make_adam_state(const LoraAdapter& adapter) {
  AdamState st;
  for (std::size_t h = 0; h < adapter.a.size(); ++h) {
    st.m_a.push_back(Eigen::MatrixXd::Zero(adapter.a[h].rows(), adapter.a[h].cols()));
    st.v_a.push_back(st.m_a.back());
    st.m_b.push_back(Eigen::MatrixXd::Zero(adapter.b[h].rows(), adapter.b[h].cols()));
    st.v_b.push_back(st.m_b.back());
  }
  return st;
}

void adamw_step(LoraAdapter& adapter, const AdapterGrad& g, AdamState& st,
                const TrainConfig& cfg) {
  ++st.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
  auto update = [&](Eigen::MatrixXd& w, const Eigen::MatrixXd& grad_w, Eigen::MatrixXd& m,
                    Eigen::MatrixXd& v) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad_w;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad_w.cwiseProduct(grad_w);
    w *= 1.0 - cfg.learning_rate * cfg.weight_decay;
    w.array() -= cfg.learning_rate * (m.array() / bc1) /
                 ((v.array() / bc2).sqrt() + cfg.epsilon);
  };
  for (std::size_t h = 0; h < adapter.a.size(); ++h) {
    update(adapter.a[h], g.a[h], st.m_a[h], st.v_a[h]);
    update(adapter.b[h], g.b[h], st.m_b[h], st.v_b[h]);
  }
}

ClientState make_client(std::size_t client_id, Corpus corpus, const Featurizer& featurizer) {
  ClientState c;
  c.client_id = client_id;
  c.examples = make_examples(corpus, featurizer);
  c.corpus = std::move(corpus);
  return c;
}

LocalResult local_train(ClientState& client, const SurrogateModel& model,
                        const TrainConfig& cfg, std::size_t round) {
  validate_train_config(cfg);
  check_shapes(model, client.adapter);
  if (client.examples.size() < cfg.batch_size) {
    throw validation_error("client " + std::to_string(client.client_id) + " has " +
                           std::to_string(client.examples.size()) +
                           " examples, fewer than batch_size " +
                           std::to_string(cfg.batch_size));
  }
  LocalResult out;
  out.adapter = client.adapter;
  client.optimizer = make_adam_state(out.adapter);
  Rng rng = make_rng({cfg.seed, client.client_id, round, key(Stream::kBatchOrder)});

  std::vector<std::size_t> order(client.examples.size());
  std::vector<Example> batch;
  for (std::size_t epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      boost::random::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
      std::swap(order[i], order[pick(rng)]);
    }
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(client.examples[order[i]]);
      AdapterGrad g = grad(model, out.adapter, batch);
      out.loss_trace.push_back(g.loss);
      adamw_step(out.adapter, g, client.optimizer, cfg);
    }
  }
  client.adapter = out.adapter;
  return out;
}

LoraAdapter fedavg(std::span<const LoraAdapter> adapters, std::span<const double> weights) {
  if (adapters.empty()) throw validation_error("fedavg of an empty adapter list");
  if (adapters.size() != weights.size()) {
    throw validation_error("fedavg needs one weight per adapter");
  }
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw validation_error("fedavg weights must be > 0");
  }
  const LoraAdapter& first = adapters[0];
  for (const auto& ad : adapters) {
    bool same = ad.rank == first.rank && ad.alpha == first.alpha &&
                ad.a.size() == first.a.size() && ad.b.size() == first.b.size();
    for (std::size_t h = 0; same && h < first.a.size(); ++h) {
      same = ad.a[h].rows() == first.a[h].rows() && ad.a[h].cols() == first.a[h].cols() &&
             ad.b[h].rows() == first.b[h].rows() && ad.b[h].cols() == first.b[h].cols();
    }
    if (!same) throw validation_error("fedavg adapters have mismatched shapes");
  }
  if (adapters.size() == 1) return first;

  double total = 0.0;
  for (double w : weights) total += w;
  LoraAdapter out = first;
  for (std::size_t h = 0; h < first.a.size(); ++h) {
    out.a[h].setZero();
    out.b[h].setZero();
    for (std::size_t i = 0; i < adapters.size(); ++i) {
      const double coef = weights[i] / total;
      out.a[h] += coef * adapters[i].a[h];
      out.b[h] += coef * adapters[i].b[h];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Wire

namespace {

nlohmann::ordered_json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::ordered_json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data(m.data(), m.data() + m.size());  // column-major
  j["data"] = std::move(data);
  return j;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw parse_error("matrix payload size does not match its shape");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows * cols; ++i) m.data()[i] = data[i].get<double>();
  return m;
}

}  // namespace

std::string serialize_update(const ClientUpdate& u) {
  nlohmann::ordered_json j;
  j["client_id"] = u.client_id;
  j["round"] = u.round;
  j["num_examples"] = u.num_examples;
  j["rank"] = u.adapter.rank;
  j["alpha"] = u.adapter.alpha;
  nlohmann::ordered_json heads = nlohmann::ordered_json::array();
  for (std::size_t h = 0; h < u.adapter.a.size(); ++h) {
    heads.push_back({{"a", matrix_json(u.adapter.a[h])}, {"b", matrix_json(u.adapter.b[h])}});
  }
  j["heads"] = std::move(heads);
  return j.dump();
}

ClientUpdate deserialize_update(std::string_view bytes) {
  try {
    auto j = nlohmann::json::parse(bytes);
    ClientUpdate u;
    u.client_id = j.at("client_id").get<std::size_t>();
    u.round = j.at("round").get<std::size_t>();
    u.num_examples = j.at("num_examples").get<std::size_t>();
    u.adapter.rank = j.at("rank").get<std::size_t>();
    u.adapter.alpha = j.at("alpha").get<double>();
    for (const auto& h : j.at("heads")) {
      u.adapter.a.push_back(matrix_from_json(h.at("a")));
      u.adapter.b.push_back(matrix_from_json(h.at("b")));
    }
    return u;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("malformed client update: ") + e.what());
  }
}

void UpdateChannel::send(const ClientUpdate& update) {
  std::string bytes = serialize_update(update);
  if (tap_) tap_(bytes);
  pending_.push_back(std::move(bytes));
}

std::vector<ClientUpdate> UpdateChannel::drain() {
  std::vector<ClientUpdate> out;
  out.reserve(pending_.size());
  for (const auto& b : pending_) out.push_back(deserialize_update(b));
  pending_.clear();
  return out;
}

// ---------------------------------------------------------------------------
// Regimes

namespace {

RunResult train_sites(std::vector<ClientState> clients, const SurrogateModel& model,
                      const TrainConfig& cfg, const RunOptions& opts) {
  validate_train_config(cfg);
  if (clients.empty()) throw validation_error("no clients to train");
  LoraAdapter global = make_adapter(model, cfg.lora_rank, cfg.lora_alpha, cfg.seed);
  UpdateChannel channel(opts.wire_tap);
  RunResult res;
  for (std::size_t round = 0; round < cfg.rounds; ++round) {
    std::vector<double> losses;
    for (auto& client : clients) {
      client.adapter = global;  // broadcast
      LocalResult local = local_train(client, model, cfg, round);
      double mean = 0.0;
      for (double l : local.loss_trace) mean += l;
      losses.push_back(local.loss_trace.empty()
                           ? 0.0
                           : mean / static_cast<double>(local.loss_trace.size()));
      channel.send(ClientUpdate{client.client_id, round, client.examples.size(),
                                std::move(local.adapter)});
    }
    std::vector<ClientUpdate> updates = channel.drain();
    std::vector<LoraAdapter> adapters;
    std::vector<double> weights;
    for (auto& u : updates) {
      weights.push_back(static_cast<double>(u.num_examples));
      adapters.push_back(std::move(u.adapter));
    }
    global = fedavg(adapters, weights);

    std::optional<double> score;
    if (opts.scorer) score = opts.scorer(global);
    for (std::size_t i = 0; i < clients.size(); ++i) {
      res.history.push_back({round, clients[i].client_id, losses[i], score});
    }
  }
  res.adapter = std::move(global);
  return res;
}

void require_clients(std::span<const Corpus> corpora) {
  if (corpora.empty()) throw validation_error("at least one client corpus is required");
}

}  // namespace

RunResult run_federated(std::span<const Corpus> corpora, const SurrogateModel& model,
                        const Featurizer& featurizer, const TrainConfig& cfg,
                        const RunOptions& opts) {
  require_clients(corpora);
  std::vector<ClientState> clients;
  for (std::size_t i = 0; i < corpora.size(); ++i) {
    clients.push_back(make_client(i, corpora[i], featurizer));
  }
  return train_sites(std::move(clients), model, cfg, opts);
}

RunResult run_centralized(std::span<const Corpus> corpora, const SurrogateModel& model,
                          const Featurizer& featurizer, const TrainConfig& cfg,
                          const RunOptions& opts) {
  require_clients(corpora);
  std::vector<ClientState> site;
  site.push_back(make_client(0, concat(corpora), featurizer));
  return train_sites(std::move(site), model, cfg, opts);
}

std::vector<RunResult> run_independent(std::span<const Corpus> corpora,
                                       const SurrogateModel& model,
                                       const Featurizer& featurizer, const TrainConfig& cfg,
                                       const RunOptions& opts) {
  require_clients(corpora);
  std::vector<RunResult> out;
  for (std::size_t i = 0; i < corpora.size(); ++i) {
    std::vector<ClientState> site;
    site.push_back(make_client(i, corpora[i], featurizer));
    out.push_back(train_sites(std::move(site), model, cfg, opts));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generation

std::vector<Candidate> generate_candidates(const SurrogateModel& model,
                                           const LoraAdapter& adapter,
                                           const Featurizer& featurizer,
                                           std::string_view instruction, std::size_t n,
                                           double temperature, std::uint64_t seed) {
  if (n == 0) throw validation_error("n must be >= 1");
  if (!(temperature > 0.0)) throw validation_error("temperature must be > 0");
  check_shapes(model, adapter);
  const Eigen::VectorXd x = featurizer.featurize(instruction);
  std::vector<Eigen::VectorXd> probs;
  for (auto& z : logits(model, adapter, x)) probs.push_back(softmax(z / temperature));

  Rng rng = make_rng({seed, key(Stream::kSampling)});
  boost::random::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Candidate> out;
  out.reserve(n);
  std::vector<std::size_t> idx(probs.size());
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t h = 0; h < probs.size(); ++h) {
      const double u = unit(rng);
      double acc = 0.0;
      // Default to the most probable value so rounding in the cumulative sum
      // can never select a zero-probability entry.
      Eigen::Index best = 0;
      probs[h].maxCoeff(&best);
      idx[h] = static_cast<std::size_t>(best);
      for (Eigen::Index v = 0; v < probs[h].size(); ++v) {
        acc += probs[h][v];
        if (u < acc) {
          if (probs[h][v] > 0.0) idx[h] = static_cast<std::size_t>(v);
          break;
        }
      }
    }
    DesignParams p = decode_params(idx);
    out.push_back(Candidate{p, cost_model(p)});
  }
  return out;
}

}  // namespace fedchip
