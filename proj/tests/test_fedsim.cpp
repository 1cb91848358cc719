#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fedchip/error.hpp"
#include "fedchip/fedsim.hpp"
#include "fedchip/partitioner.hpp"
#include "privacy_audit.hpp"

using namespace fedchip;

namespace {

const Featurizer& featurizer() {
  static const Featurizer f;
  return f;
}

SurrogateModel default_model(std::uint64_t seed = 7) {
  return make_base_model(head_sizes(), featurizer().dim(), seed);
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.rounds = 3;
  cfg.batch_size = 8;
  return cfg;
}

Eigen::MatrixXd random_matrix(std::mt19937_64& gen, Eigen::Index r, Eigen::Index c,
                              double scale) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = n(gen);
  }
  return m;
}

// Batch-mean cross-entropy computed through the public forward pass only.
double loss_of(const SurrogateModel& model, const LoraAdapter& adapter,
               const std::vector<Example>& batch) {
  std::vector<HeadProbs> probs;
  std::vector<Targets> targets;
  for (const auto& e : batch) {
    probs.push_back(forward(model, adapter, e.features));
    targets.push_back(e.targets);
  }
  return cross_entropy(probs, targets);
}

struct Instance {
  SurrogateModel model;
  LoraAdapter adapter;
  std::vector<Example> batch;
};

Instance random_instance(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  const std::vector<std::size_t> sizes = {3, 4, 2};
  const Eigen::Index f = 5;
  Instance in;
  in.model = make_base_model(sizes, f, seed);
  in.adapter.rank = 2;
  in.adapter.alpha = 3.0;
  for (auto v : sizes) {
    in.adapter.a.push_back(random_matrix(gen, 2, f, 0.5));
    in.adapter.b.push_back(random_matrix(gen, static_cast<Eigen::Index>(v), 2, 0.5));
  }
  for (int i = 0; i < 4; ++i) {
    Example e;
    e.features = random_matrix(gen, f, 1, 1.0);
    for (auto v : sizes) e.targets.push_back(gen() % v);
    in.batch.push_back(e);
  }
  return in;
}

double max_abs(const std::vector<Eigen::MatrixXd>& ms) {
  double m = 0.0;
  for (const auto& x : ms) m = std::max(m, x.cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

TEST(Featurize, DeterministicAndBias) {
  const auto& f = featurizer();
  const std::string s = render_instruction({16, 9, 1, 3});
  EXPECT_EQ(f.featurize(s), f.featurize(s));
  const Eigen::VectorXd empty = f.featurize("");
  EXPECT_EQ(empty[Featurizer::kBias], 1.0);
  EXPECT_EQ(empty.sum(), 1.0);
}

TEST(Featurize, ArrayDimTokenOwnsItsSlots) {
  const auto& f = featurizer();
  const Eigen::VectorXd a = f.featurize(render_instruction({64, 9, 1, 3}));
  const Eigen::VectorXd b = f.featurize(render_instruction({128, 9, 1, 3}));
  const std::size_t s64 = *f.slot("64");
  const std::size_t s128 = *f.slot("128");
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (static_cast<std::size_t>(i) == s64 || static_cast<std::size_t>(i) == s128) {
      EXPECT_NE(a[i], b[i]);
    } else {
      EXPECT_EQ(a[i], b[i]) << "slot " << i;
    }
  }
}

TEST(Featurize, UnknownTokensShareOov) {
  const auto& f = featurizer();
  const Eigen::VectorXd x = f.featurize("Quantum widgets, please!");
  EXPECT_EQ(x[Featurizer::kOov], 1.0);
  EXPECT_EQ(x.sum(), 2.0);
  EXPECT_FALSE(f.slot("quantum").has_value());
}

TEST(Params, EncodeDecodeRoundTrip) {
  for (const auto& r : generate_synthetic(200, 5).records) {
    const auto idx = encode_params(*r.params);
    EXPECT_EQ(decode_params(idx), *r.params);
  }
  EXPECT_THROW(encode_params({4, 8, 0, 9}), Error);
}

TEST(Forward, FreshAdapterEqualsBase) {
  const auto model = default_model();
  const auto adapter = make_adapter(model, 8, 16.0, 3);
  const Eigen::VectorXd x = featurizer().featurize(render_instruction({8, 8, 0, 1}));
  const auto lg = logits(model, adapter, x);
  for (std::size_t h = 0; h < kNumHeads; ++h) EXPECT_EQ(lg[h], model.base[h] * x);
}

TEST(Forward, AlphaScalesDeltaLinearly) {
  Instance in = random_instance(3);
  const Eigen::VectorXd x = in.batch[0].features;
  SurrogateModel zero = in.model;
  for (auto& w : zero.base) w.setZero();
  const auto d1 = logits(zero, in.adapter, x);
  LoraAdapter doubled = in.adapter;
  doubled.alpha *= 2.0;
  const auto d2 = logits(zero, doubled, x);
  for (std::size_t h = 0; h < d1.size(); ++h) {
    EXPECT_LT((d2[h] - 2.0 * d1[h]).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Forward, ProbabilitiesSumToOne) {
  Instance in = random_instance(4);
  for (const auto& e : in.batch) {
    for (const auto& p : forward(in.model, in.adapter, e.features)) {
      EXPECT_NEAR(p.sum(), 1.0, 1e-9);
      EXPECT_GE(p.minCoeff(), 0.0);
    }
  }
}

TEST(Forward, ShapeMismatch) {
  const auto model = default_model();
  auto adapter = make_adapter(model, 4, 8.0, 1);
  adapter.b[2] = Eigen::MatrixXd::Zero(5, 4);
  EXPECT_THROW(forward(model, adapter, featurizer().featurize("")), Error);
  EXPECT_THROW(make_adapter(model, 0, 8.0, 1), Error);
}

TEST(CrossEntropy, Examples) {
  HeadProbs perfect = {Eigen::Vector3d(0, 1, 0)};
  std::vector<HeadProbs> probs = {perfect};
  std::vector<Targets> targets = {{1}};
  EXPECT_EQ(cross_entropy(probs, targets), 0.0);

  probs = {{Eigen::Vector4d::Constant(0.25)}};
  targets = {{2}};
  EXPECT_NEAR(cross_entropy(probs, targets), std::log(4.0), 1e-15);

  probs = {{Eigen::Vector2d(0.5, 0.5)}, {Eigen::Vector2d(0.5, 0.5)}};
  targets = {{0}, {1}};
  EXPECT_NEAR(cross_entropy(probs, targets), 0.693147180559945, 1e-12);
}

TEST(CrossEntropy, ClampsZeroProbability) {
  std::vector<HeadProbs> probs = {{Eigen::Vector2d(1.0, 0.0)}};
  std::vector<Targets> targets = {{1}};
  std::size_t clamped = 0;
  const double l = cross_entropy(probs, targets, &clamped);
  EXPECT_EQ(clamped, 1u);
  EXPECT_NEAR(l, -std::log(kProbabilityFloor), 1e-9);
}

TEST(CrossEntropy, EmptyBatch) {
  std::vector<HeadProbs> probs;
  std::vector<Targets> targets;
  EXPECT_THROW(cross_entropy(probs, targets), Error);
}

TEST(Grad, MatchesCentralDifferences) {
  const double h = 1e-5;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Instance in = random_instance(seed);
    const AdapterGrad g = grad(in.model, in.adapter, in.batch);
    EXPECT_NEAR(g.loss, loss_of(in.model, in.adapter, in.batch), 1e-12);
    double diff2 = 0.0, norm2 = 0.0;
    auto probe = [&](std::vector<Eigen::MatrixXd> LoraAdapter::*field,
                     const std::vector<Eigen::MatrixXd>& analytic) {
      for (std::size_t head = 0; head < analytic.size(); ++head) {
        for (Eigen::Index i = 0; i < analytic[head].rows(); ++i) {
          for (Eigen::Index j = 0; j < analytic[head].cols(); ++j) {
            LoraAdapter plus = in.adapter, minus = in.adapter;
            (plus.*field)[head](i, j) += h;
            (minus.*field)[head](i, j) -= h;
            const double fd = (loss_of(in.model, plus, in.batch) -
                               loss_of(in.model, minus, in.batch)) / (2 * h);
            diff2 += (fd - analytic[head](i, j)) * (fd - analytic[head](i, j));
            norm2 += fd * fd;
          }
        }
      }
    };
    probe(&LoraAdapter::a, g.a);
    probe(&LoraAdapter::b, g.b);
    EXPECT_LT(std::sqrt(diff2) / std::max(std::sqrt(norm2), 1e-300), 1e-4) << "seed " << seed;
  }
}

TEST(Grad, VanishesAtPerfectPrediction) {
  Instance in = random_instance(9);
  // Base logits put p(target) >= 1 - 1e-9 on every example.
  for (auto& e : in.batch) e.features = Eigen::VectorXd::Unit(5, 0);
  for (auto& e : in.batch) e.targets = in.batch[0].targets;
  for (std::size_t h = 0; h < in.model.base.size(); ++h) {
    in.model.base[h].setZero();
    in.model.base[h](static_cast<Eigen::Index>(in.batch[0].targets[h]), 0) = 40.0;
  }
  for (auto& b : in.adapter.b) b.setZero();
  for (const auto& p : forward(in.model, in.adapter, in.batch[0].features)) {
    EXPECT_GE(p.maxCoeff(), 1.0 - 1e-9);
  }
  const AdapterGrad g = grad(in.model, in.adapter, in.batch);
  double n2 = 0.0;
  for (const auto& m : g.a) n2 += m.squaredNorm();
  for (const auto& m : g.b) n2 += m.squaredNorm();
  EXPECT_LT(std::sqrt(n2), 1e-8);
}

TEST(Grad, BatchIsMeanOfExamples) {
  Instance in = random_instance(17);
  const AdapterGrad whole = grad(in.model, in.adapter, in.batch);
  std::vector<Eigen::MatrixXd> a(whole.a.size()), b(whole.b.size());
  for (std::size_t h = 0; h < a.size(); ++h) {
    a[h] = Eigen::MatrixXd::Zero(whole.a[h].rows(), whole.a[h].cols());
    b[h] = Eigen::MatrixXd::Zero(whole.b[h].rows(), whole.b[h].cols());
  }
  for (const auto& e : in.batch) {
    const AdapterGrad one = grad(in.model, in.adapter, std::span(&e, 1));
    for (std::size_t h = 0; h < a.size(); ++h) {
      a[h] += one.a[h] / static_cast<double>(in.batch.size());
      b[h] += one.b[h] / static_cast<double>(in.batch.size());
    }
  }
  for (std::size_t h = 0; h < a.size(); ++h) {
    EXPECT_LT((a[h] - whole.a[h]).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((b[h] - whole.b[h]).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Optimizer, AdamWFirstStep) {
  // With zeroed moments the first bias-corrected step is lr * sign(g)
  // (up to eps), after the decoupled decay w *= 1 - lr * wd.
  LoraAdapter ad;
  ad.rank = 1;
  ad.alpha = 1.0;
  ad.a = {Eigen::MatrixXd::Constant(1, 1, 2.0)};
  ad.b = {Eigen::MatrixXd::Constant(1, 1, -1.0)};
  AdapterGrad g;
  g.a = {Eigen::MatrixXd::Constant(1, 1, 0.5)};
  g.b = {Eigen::MatrixXd::Constant(1, 1, -3.0)};
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.weight_decay = 0.01;
  AdamState st = make_adam_state(ad);
  adamw_step(ad, g, st, cfg);
  EXPECT_NEAR(ad.a[0](0, 0), 2.0 * (1 - 0.1 * 0.01) - 0.1, 1e-7);
  EXPECT_NEAR(ad.b[0](0, 0), -1.0 * (1 - 0.1 * 0.01) + 0.1, 1e-7);
  EXPECT_EQ(st.step, 1u);
}

TEST(LocalTrain, ZeroEpochsIsIdentity) {
  const auto model = default_model();
  ClientState c = make_client(0, generate_synthetic(40, 1), featurizer());
  c.adapter = make_adapter(model, 8, 16.0, 2);
  const LoraAdapter before = c.adapter;
  TrainConfig cfg = small_config();
  cfg.local_epochs = 0;
  const auto r = local_train(c, model, cfg, 0);
  EXPECT_EQ(r.adapter, before);
  EXPECT_TRUE(r.loss_trace.empty());
}

TEST(LocalTrain, LossDecreases) {
  const auto model = default_model();
  ClientState c = make_client(0, generate_synthetic(800, 1), featurizer());
  c.adapter = make_adapter(model, 8, 16.0, 2);
  TrainConfig cfg;
  cfg.local_epochs = 5;  // 250 steps
  const auto r = local_train(c, model, cfg, 0);
  ASSERT_GE(r.loss_trace.size(), 200u);
  const std::size_t w = 25;
  double lead = 0.0, trail = 0.0;
  for (std::size_t i = 0; i < w; ++i) {
    lead += r.loss_trace[i];
    trail += r.loss_trace[r.loss_trace.size() - 1 - i];
  }
  EXPECT_LT(trail, lead);
}

TEST(LocalTrain, Deterministic) {
  const auto model = default_model();
  const Corpus data = generate_synthetic(100, 3);
  auto run = [&] {
    ClientState c = make_client(4, data, featurizer());
    c.adapter = make_adapter(model, 8, 16.0, 2);
    return local_train(c, model, small_config(), 5);
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a.adapter, b.adapter);
  EXPECT_EQ(a.loss_trace, b.loss_trace);
}

TEST(LocalTrain, TooFewExamples) {
  const auto model = default_model();
  ClientState c = make_client(0, generate_synthetic(5, 1), featurizer());
  c.adapter = make_adapter(model, 8, 16.0, 2);
  EXPECT_THROW(local_train(c, model, small_config(), 0), Error);
}

TEST(FedAvg, SingleAdapterUnchanged) {
  Instance in = random_instance(1);
  const std::vector<LoraAdapter> one = {in.adapter};
  const std::vector<double> w = {7.0};
  EXPECT_EQ(fedavg(one, w), in.adapter);
}

TEST(FedAvg, WeightedScalarMean) {
  LoraAdapter x, y;
  x.rank = y.rank = 1;
  x.a = {Eigen::MatrixXd::Constant(1, 1, 0.0)};
  y.a = {Eigen::MatrixXd::Constant(1, 1, 4.0)};
  x.b = {Eigen::MatrixXd::Constant(1, 1, 0.0)};
  y.b = {Eigen::MatrixXd::Constant(1, 1, 4.0)};
  const std::vector<LoraAdapter> both = {x, y};
  const std::vector<double> w = {1.0, 3.0};
  const LoraAdapter m = fedavg(both, w);
  EXPECT_EQ(m.a[0](0, 0), 3.0);
  EXPECT_EQ(m.b[0](0, 0), 3.0);
}

TEST(FedAvg, ScalingAndPermutation) {
  const std::vector<LoraAdapter> ads = {random_instance(1).adapter, random_instance(2).adapter,
                                        random_instance(3).adapter};
  const std::vector<double> w = {2.0, 5.0, 11.0};
  const std::vector<double> w10 = {20.0, 50.0, 110.0};
  const std::vector<LoraAdapter> rev = {ads[2], ads[1], ads[0]};
  const std::vector<double> wrev = {11.0, 5.0, 2.0};
  const LoraAdapter base = fedavg(ads, w);
  const LoraAdapter scaled = fedavg(ads, w10);
  const LoraAdapter permuted = fedavg(rev, wrev);
  for (std::size_t h = 0; h < base.a.size(); ++h) {
    EXPECT_LT((base.a[h] - scaled.a[h]).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((base.b[h] - scaled.b[h]).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((base.a[h] - permuted.a[h]).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((base.b[h] - permuted.b[h]).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(FedAvg, FactorAveragingDiffersFromDeltaAveraging) {
  const std::vector<LoraAdapter> ads = {random_instance(5).adapter, random_instance(6).adapter};
  const std::vector<double> w = {1.0, 1.0};
  const LoraAdapter m = fedavg(ads, w);
  for (std::size_t h = 0; h < m.a.size(); ++h) {
    const Eigen::MatrixXd of_factors = m.b[h] * m.a[h];
    const Eigen::MatrixXd of_deltas = 0.5 * (ads[0].b[h] * ads[0].a[h] + ads[1].b[h] * ads[1].a[h]);
    const double gap = (of_factors - of_deltas).norm();
    EXPECT_GT(gap, 0.0);
    EXPECT_TRUE(std::isfinite(gap));
  }
}

TEST(FedAvg, Errors) {
  const std::vector<LoraAdapter> none;
  const std::vector<double> nw;
  EXPECT_THROW(fedavg(none, nw), Error);
  const std::vector<LoraAdapter> mixed = {random_instance(1).adapter,
                                          make_adapter(default_model(), 8, 16.0, 1)};
  const std::vector<double> w = {1.0, 1.0};
  EXPECT_THROW(fedavg(mixed, w), Error);
  const std::vector<LoraAdapter> two = {random_instance(1).adapter, random_instance(2).adapter};
  const std::vector<double> bad = {1.0, 0.0};
  EXPECT_THROW(fedavg(two, bad), Error);
}

TEST(Wire, RoundTripIsExact) {
  ClientUpdate u;
  u.client_id = 2;
  u.round = 9;
  u.num_examples = 123;
  u.adapter = random_instance(8).adapter;
  const ClientUpdate back = deserialize_update(serialize_update(u));
  EXPECT_EQ(back.client_id, 2u);
  EXPECT_EQ(back.round, 9u);
  EXPECT_EQ(back.num_examples, 123u);
  EXPECT_EQ(back.adapter, u.adapter);
  EXPECT_THROW(deserialize_update("{\"client_id\": 1}"), Error);
}

TEST(Regimes, OneClientOneRoundEqualsLocalTraining) {
  const auto model = default_model();
  const Corpus data = generate_synthetic(60, 2);
  TrainConfig cfg = small_config();
  cfg.rounds = 1;
  const std::vector<Corpus> one = {data};
  const RunResult fed = run_federated(one, model, featurizer(), cfg);
  ClientState c = make_client(0, data, featurizer());
  c.adapter = make_adapter(model, cfg.lora_rank, cfg.lora_alpha, cfg.seed);
  EXPECT_EQ(fed.adapter, local_train(c, model, cfg, 0).adapter);
}

TEST(Regimes, IdenticalClientsAverageToTheirUpdate) {
  const auto model = default_model();
  const Corpus data = generate_synthetic(48, 2);
  TrainConfig cfg = small_config();
  cfg.rounds = 1;
  // Same corpus, same stream (client id 0) for all three.
  std::vector<LoraAdapter> updates;
  for (int i = 0; i < 3; ++i) {
    ClientState c = make_client(0, data, featurizer());
    c.adapter = make_adapter(model, cfg.lora_rank, cfg.lora_alpha, cfg.seed);
    updates.push_back(local_train(c, model, cfg, 0).adapter);
  }
  const std::vector<double> w = {48.0, 48.0, 48.0};
  const LoraAdapter avg = fedavg(updates, w);
  for (std::size_t h = 0; h < avg.a.size(); ++h) {
    EXPECT_LT((avg.a[h] - updates[1].a[h]).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((avg.b[h] - updates[1].b[h]).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Regimes, CentralizedOnOneClientEqualsIndependent) {
  const auto model = default_model();
  const std::vector<Corpus> one = {generate_synthetic(64, 4)};
  const TrainConfig cfg = small_config();
  const RunResult central = run_centralized(one, model, featurizer(), cfg);
  const auto ind = run_independent(one, model, featurizer(), cfg);
  ASSERT_EQ(ind.size(), 1u);
  EXPECT_EQ(central.adapter, ind[0].adapter);
  EXPECT_THROW(run_centralized(std::vector<Corpus>{}, model, featurizer(), cfg), Error);
  EXPECT_THROW(run_federated(std::vector<Corpus>{}, model, featurizer(), cfg), Error);
}

TEST(Regimes, IndependentClientsAreIsolated) {
  const auto model = default_model();
  const Corpus shared = generate_synthetic(64, 4);
  const TrainConfig cfg = small_config();
  const std::vector<Corpus> first = {generate_synthetic(50, 1), shared};
  const std::vector<Corpus> second = {generate_synthetic(70, 9), shared};
  const auto a = run_independent(first, model, featurizer(), cfg);
  const auto b = run_independent(second, model, featurizer(), cfg);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[1].adapter, b[1].adapter);
  EXPECT_NE(a[0].adapter, b[0].adapter);
}

TEST(Regimes, FederatedRunIsDeterministic) {
  const auto model = default_model();
  PartitionOptions opts;
  opts.seed = 1;
  const auto clients = partition_corpus(generate_synthetic(300, 1), opts).clients;
  const TrainConfig cfg = small_config();
  const RunResult a = run_federated(clients, model, featurizer(), cfg);
  const RunResult b = run_federated(clients, model, featurizer(), cfg);
  EXPECT_EQ(a.adapter, b.adapter);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].loss, b.history[i].loss);
    EXPECT_EQ(a.history[i].client_id, b.history[i].client_id);
  }
  EXPECT_EQ(a.history.size(), cfg.rounds * clients.size());
}

TEST(Regimes, ScorerRunsEveryRound) {
  const auto model = default_model();
  const std::vector<Corpus> clients = {generate_synthetic(40, 1), generate_synthetic(40, 2)};
  const TrainConfig cfg = small_config();
  int calls = 0;
  RunOptions opts;
  opts.scorer = [&](const LoraAdapter&) { return static_cast<double>(++calls); };
  const RunResult r = run_federated(clients, model, featurizer(), cfg, opts);
  EXPECT_EQ(calls, static_cast<int>(cfg.rounds));
  for (const auto& row : r.history) EXPECT_TRUE(row.chip_at_1.has_value());
}

TEST(Privacy, WireCarriesOnlyAdapters) {
  const auto model = default_model();
  PartitionOptions opts;
  opts.seed = 3;
  const auto clients = partition_corpus(generate_synthetic(300, 3), opts).clients;
  std::vector<std::string> wire;
  RunOptions ro;
  ro.wire_tap = [&](std::string_view bytes) { wire.emplace_back(bytes); };
  const TrainConfig cfg = small_config();
  run_federated(clients, model, featurizer(), cfg, ro);
  ASSERT_EQ(wire.size(), cfg.rounds * clients.size());
  const auto audit = fedchip::testing::audit_messages(wire, clients);
  EXPECT_GT(audit.numbers_checked, 0u);
  EXPECT_TRUE(audit.findings.empty()) << audit.findings.front();
}

TEST(Privacy, AuditCatchesALeak) {
  const std::vector<Corpus> clients = {generate_synthetic(5, 3)};
  ClientUpdate u;
  u.adapter = random_instance(1).adapter;
  u.adapter.a[0](0, 0) = clients[0].records[2].metrics.area;
  const auto audit = fedchip::testing::audit_messages({serialize_update(u)}, clients);
  EXPECT_FALSE(audit.findings.empty());
}

TEST(Generation, DeterministicAndConsistent) {
  const auto model = default_model();
  const auto adapter = make_adapter(model, 8, 16.0, 1);
  const std::string ins = render_instruction({32, 16, 1, 4});
  const auto a = generate_candidates(model, adapter, featurizer(), ins, 10, 1.0, 5);
  const auto b = generate_candidates(model, adapter, featurizer(), ins, 10, 1.0, 5);
  ASSERT_EQ(a.size(), 10u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].params, b[i].params);
    EXPECT_EQ(a[i].metrics, cost_model(a[i].params));
  }
}

TEST(Generation, ColdTemperatureIsGreedy) {
  const auto model = default_model();
  const auto adapter = make_adapter(model, 8, 16.0, 1);
  const std::string ins = render_instruction({32, 16, 1, 4});
  const auto c = generate_candidates(model, adapter, featurizer(), ins, 10, 1e-6, 5);
  for (const auto& x : c) EXPECT_EQ(x.params, c[0].params);
  EXPECT_THROW(generate_candidates(model, adapter, featurizer(), ins, 0, 1.0, 5), Error);
  EXPECT_THROW(generate_candidates(model, adapter, featurizer(), ins, 3, 0.0, 5), Error);
}
