#include "fedchip/partitioner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "json.hpp"

#include "fedchip/error.hpp"
#include "fedchip/rng.hpp"

namespace fedchip {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t nearest(const Point& p, const std::vector<Point>& centroids, double* dist) {
  std::size_t best = 0;
  double best_d = kInf;
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(p, centroids[c]);
    if (d < best_d) {  // strict: ties keep the lower index
      best_d = d;
      best = c;
    }
  }
  if (dist) *dist = best_d;
  return best;
}

std::vector<Point> kmeanspp_init(std::span<const Point> points, std::size_t k, Rng& rng) {
  std::vector<Point> centroids;
  centroids.reserve(k);
  boost::random::uniform_int_distribution<std::size_t> first(0, points.size() - 1);
  centroids.push_back(points[first(rng)]);

  std::vector<double> d2(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    d2[i] = squared_distance(points[i], centroids[0]);
  }
  boost::random::uniform_real_distribution<double> unit(0.0, 1.0);
  while (centroids.size() < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t chosen = 0;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      chosen = points.size() - 1;
      for (std::size_t i = 0; i < points.size(); ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          chosen = i;
          break;
        }
      }
      // Guard the rounding tail: never pick a point that is already a centre.
      while (d2[chosen] == 0.0 && chosen > 0) --chosen;
    } else {
      chosen = first(rng);
    }
    centroids.push_back(points[chosen]);
    for (std::size_t i = 0; i < points.size(); ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i], centroids.back()));
    }
  }
  return centroids;
}

}  // namespace

double squared_distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

KMeansResult kmeans(std::span<const Point> points, const KMeansOptions& opts) {
  const std::size_t k = opts.k;
  if (k == 0) throw validation_error("k must be >= 1");
  if (points.size() < k) {
    throw validation_error("k-means needs at least k points (k=" + std::to_string(k) +
                           ", points=" + std::to_string(points.size()) + ")");
  }
  const std::size_t dim = points[0].size();
  for (const auto& p : points) {
    if (p.size() != dim) throw validation_error("k-means points differ in dimension");
  }

  Rng rng = make_rng({opts.seed, key(Stream::kKMeans)});
  KMeansResult res;
  res.centroids = kmeanspp_init(points, k, rng);
  res.labels.assign(points.size(), 0);
  std::vector<double> dist(points.size());

  for (std::size_t iter = 0; iter < opts.max_iters; ++iter) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      res.labels[i] = nearest(points[i], res.centroids, &dist[i]);
      inertia += dist[i];
    }
    res.inertia_trace.push_back(inertia);
    res.iterations = iter + 1;

    std::vector<std::size_t> counts(k, 0);
    for (std::size_t l : res.labels) ++counts[l];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = points.size();
      double far_d = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (counts[res.labels[i]] > 1 && dist[i] > far_d) {
          far_d = dist[i];
          far = i;
        }
      }
      --counts[res.labels[far]];
      res.labels[far] = c;
      dist[far] = 0.0;
      counts[c] = 1;
    }

    std::vector<Point> next(k, Point(dim, 0.0));
    for (std::size_t i = 0; i < points.size(); ++i) {
      Point& acc = next[res.labels[i]];
      for (std::size_t d = 0; d < dim; ++d) acc[d] += points[i][d];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t d = 0; d < dim; ++d) next[c][d] /= static_cast<double>(counts[c]);
      shift = std::max(shift, std::sqrt(squared_distance(next[c], res.centroids[c])));
    }
    res.centroids = std::move(next);
    if (shift < opts.tol) break;
  }

  res.inertia = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    double d = 0.0;
    res.labels[i] = nearest(points[i], res.centroids, &d);
    res.inertia += d;
  }
  return res;
}

void validate_dirichlet(const DirichletSpec& spec) {
  if (!(spec.alpha > 0.0) || !std::isfinite(spec.alpha)) {
    throw validation_error("dirichlet alpha must be > 0");
  }
  if (!(spec.fraction >= 0.0 && spec.fraction <= 1.0)) {
    throw validation_error("reassignment fraction must be in [0, 1]");
  }
}

std::size_t reassignment_count(double fraction, std::size_t t) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(t)));
}

Reassignment dirichlet_reassign(std::span<const std::size_t> labels, std::size_t k,
                                const DirichletSpec& spec, std::uint64_t seed) {
  validate_dirichlet(spec);
  if (k == 0) throw validation_error("k must be >= 1");
  for (std::size_t l : labels) {
    if (l >= k) throw validation_error("label out of range for k");
  }
  Reassignment out;
  out.labels.assign(labels.begin(), labels.end());
  const std::size_t t = labels.size();
  const std::size_t m = std::min(reassignment_count(spec.fraction, t), t);
  if (m == 0) return out;

  Rng rng = make_rng({seed, key(Stream::kDirichlet)});
  std::vector<std::size_t> idx(t);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < m; ++i) {
    boost::random::uniform_int_distribution<std::size_t> pick(i, t - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  out.reassigned.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m));
  std::sort(out.reassigned.begin(), out.reassigned.end());

  boost::random::gamma_distribution<double> gamma(spec.alpha, 1.0);
  boost::random::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> probs(k);
  auto draw_probs = [&] {
    double total = 0.0;
    for (auto& p : probs) {
      p = gamma(rng);
      total += p;
    }
    if (!(total > 0.0)) {
      // Every component underflowed (tiny alpha); fall back to uniform.
      std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(k));
      return;
    }
    for (auto& p : probs) p /= total;
  };
  if (!spec.per_point) draw_probs();

  for (std::size_t i : out.reassigned) {
    if (spec.per_point) draw_probs();
    const double u = unit(rng);
    double acc = 0.0;
    std::size_t label = k - 1;
    for (std::size_t c = 0; c < k; ++c) {
      acc += probs[c];
      if (u < acc) {
        label = c;
        break;
      }
    }
    out.labels[i] = label;
  }
  return out;
}

std::vector<Corpus> split_by_labels(const Corpus& corpus,
                                    std::span<const std::size_t> labels, std::size_t k) {
  if (labels.size() != corpus.size()) {
    throw validation_error("label count does not match corpus size");
  }
  std::vector<Corpus> out(k);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (labels[i] >= k) throw validation_error("label out of range for k");
    out[labels[i]].records.push_back(corpus.records[i]);
  }
  return out;
}

PartitionResult partition_corpus(const Corpus& corpus, const PartitionOptions& opts) {
  validate_dirichlet(opts.spec);
  auto [rows, stats] = zscore_normalize(corpus);
  std::vector<Point> points;
  points.reserve(rows.size());
  for (const auto& r : rows) points.emplace_back(r.begin(), r.end());

  KMeansOptions km;
  km.k = opts.k;
  km.seed = opts.seed;
  km.max_iters = opts.max_iters;
  km.tol = opts.tol;
  KMeansResult clusters = kmeans(points, km);
  Reassignment re = dirichlet_reassign(clusters.labels, opts.k, opts.spec, opts.seed);

  PartitionResult out;
  Partition& p = out.partition;
  p.labels = std::move(re.labels);
  p.k = opts.k;
  p.centroids = std::move(clusters.centroids);
  p.seed = opts.seed;
  p.spec = opts.spec;
  for (std::size_t i : re.reassigned) p.reassigned_ids.push_back(corpus.records[i].id);
  out.clients = split_by_labels(corpus, p.labels, p.k);
  return out;
}

PartitionResult iid_partition(const Corpus& corpus, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw validation_error("k must be >= 1");
  if (corpus.size() < k) throw validation_error("fewer records than clients");
  std::vector<std::size_t> idx(corpus.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng = make_rng({seed, key(Stream::kIidSplit)});
  for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
    boost::random::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  PartitionResult out;
  Partition& p = out.partition;
  p.k = k;
  p.seed = seed;
  p.spec.fraction = 0.0;
  p.labels.assign(corpus.size(), 0);
  for (std::size_t pos = 0; pos < idx.size(); ++pos) p.labels[idx[pos]] = pos % k;
  out.clients = split_by_labels(corpus, p.labels, k);
  return out;
}

std::string partition_to_json(const Partition& p) {
  nlohmann::ordered_json j;
  j["k"] = p.k;
  j["seed"] = p.seed;
  j["alpha"] = p.spec.alpha;
  j["fraction"] = p.spec.fraction;
  j["per_point"] = p.spec.per_point;
  j["labels"] = p.labels;
  j["centroids"] = p.centroids;
  j["reassigned_ids"] = p.reassigned_ids;
  return j.dump(2);
}

void save_partition(const PartitionResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw io_error("cannot create directory " + dir.string() + ": " + ec.message());
  {
    std::ofstream out(dir / "partition.json", std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot write " + (dir / "partition.json").string());
    out << partition_to_json(result.partition) << '\n';
  }
  for (std::size_t c = 0; c < result.clients.size(); ++c) {
    save_corpus(result.clients[c], dir / ("client_" + std::to_string(c) + ".jsonl"));
  }
}

std::vector<Corpus> load_clients(const std::filesystem::path& dir) {
  std::vector<Corpus> out;
  for (std::size_t c = 0;; ++c) {
    auto path = dir / ("client_" + std::to_string(c) + ".jsonl");
    if (!std::filesystem::exists(path)) break;
    out.push_back(load_corpus(path));
  }
  if (out.empty()) throw io_error("no client_*.jsonl files in " + dir.string());
  return out;
}

}  // namespace fedchip
