#include "probe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "probe/errors.hpp"
#include "probe/parallel.hpp"
#include "probe/summation.hpp"

namespace probe {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_non_empty(std::span<const RankRecord> records, const char* what) {
  if (records.empty()) throw InputError(std::string(what) + " of an empty record set is undefined");
}

}  // namespace

void MetricConfig::validate() const {
  if (!std::isfinite(alpha)) throw ConfigError("alpha must be finite");
  if (!std::isfinite(beta) || beta < 0.0) throw ConfigError("beta must be a finite value >= 0, got " + num(beta));
  if (!std::isfinite(epsilon) || epsilon <= 0.0) {
    throw ConfigError("epsilon must be a finite value > 0, got " + num(epsilon));
  }
  if (affine) {
    if (alpha <= 0.0) {
      throw DomainError("alpha must be > 0 for the affine rank transformer, got " + num(alpha) +
                        " (use --no-affine to evaluate alpha <= 0)");
    }
    if (entity_count < 2) {
      throw ConfigError("the affine rank transformer needs an entity count >= 2, got " +
                        std::to_string(entity_count));
    }
  }
}

double rt_raw(std::uint64_t rank, double alpha) {
  if (rank < 1) throw DomainError("rank must be >= 1");
  if (!std::isfinite(alpha)) throw DomainError("alpha must be finite");
  return std::pow(static_cast<double>(rank), -alpha);
}

double rt_affine(std::uint64_t rank, double alpha, std::uint64_t n_entities) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError("alpha must be > 0 for the affine rank transformer, got " + num(alpha));
  }
  if (n_entities < 2) throw DomainError("entity count must be >= 2, got " + std::to_string(n_entities));
  if (rank < 1 || rank > n_entities) {
    throw DomainError("rank " + std::to_string(rank) + " outside [1, " + std::to_string(n_entities) + "]");
  }
  // (r^-a - n^-a) / (1 - n^-a): the same map with no cancellation near the
  // pessimum, so rank 1 gives x / x = 1 and rank n gives 0 exactly.
  const double floor = std::pow(static_cast<double>(n_entities), -alpha);
  return (rt_raw(rank, alpha) - floor) / (1.0 - floor);
}

double weight(std::uint64_t delta, double beta, double epsilon) {
  if (!std::isfinite(epsilon) || epsilon <= 0.0) throw ConfigError("epsilon must be > 0, got " + num(epsilon));
  if (!std::isfinite(beta) || beta < 0.0) throw ConfigError("beta must be >= 0, got " + num(beta));
  return std::pow(epsilon + static_cast<double>(delta), -beta);
}

double aggregate(const ScoreSet& set) {
  if (set.scores.empty()) throw InputError("cannot aggregate an empty score set");
  if (set.scores.size() != set.weights.size()) throw InputError("score and weight vectors differ in length");
  CompensatedSum numerator;
  CompensatedSum total;
  for (std::size_t i = 0; i < set.scores.size(); ++i) {
    const double w = set.weights[i];
    if (!(w > 0.0) || !std::isfinite(w)) throw InputError("weight " + std::to_string(i) + " is not positive");
    numerator.add(w * set.scores[i]);
    total.add(w);
  }
  const double mean = numerator.value() / total.value();
  // Keep the result inside [min c, max c] despite rounding.
  const auto [lo, hi] = std::minmax_element(set.scores.begin(), set.scores.end());
  return std::clamp(mean, *lo, *hi);
}

ScoreSet transform(std::span<const RankRecord> records, const MetricConfig& config, unsigned threads) {
  config.validate();
  ScoreSet set;
  set.scores.resize(records.size());
  set.weights.resize(records.size());

  // Hoisted so each record costs two pow calls.
  const double floor = config.affine ? std::pow(static_cast<double>(config.entity_count), -config.alpha) : 0.0;
  const double span = 1.0 - floor;

  parallel_for(records.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto rank = records[i].rank;
      if (rank < 1) throw DomainError("rank must be >= 1");
      if (config.affine) {
        if (rank > config.entity_count) {
          throw DomainError("rank " + std::to_string(rank) + " exceeds the entity count " +
                            std::to_string(config.entity_count));
        }
        set.scores[i] = (std::pow(static_cast<double>(rank), -config.alpha) - floor) / span;
      } else {
        set.scores[i] = std::pow(static_cast<double>(rank), -config.alpha);
      }
      set.weights[i] = weight(records[i].query.gold_popularity, config.beta, config.epsilon);
    }
  });
  return set;
}

double probe_score(std::span<const RankRecord> records, const MetricConfig& config, unsigned threads) {
  require_non_empty(records, "probe score");
  return aggregate(transform(records, config, threads));
}

double mr(std::span<const RankRecord> records) {
  require_non_empty(records, "MR");
  CompensatedSum sum;
  for (const auto& r : records) sum.add(static_cast<double>(r.rank));
  return sum.value() / static_cast<double>(records.size());
}

double mrr(std::span<const RankRecord> records) {
  require_non_empty(records, "MRR");
  CompensatedSum sum;
  for (const auto& r : records) sum.add(1.0 / static_cast<double>(r.rank));
  return sum.value() / static_cast<double>(records.size());
}

double hits_at_k(std::span<const RankRecord> records, std::uint64_t k) {
  require_non_empty(records, "Hits@K");
  if (k < 1) throw ConfigError("Hits@K needs k >= 1");
  const auto hits = std::count_if(records.begin(), records.end(), [k](const RankRecord& r) { return r.rank <= k; });
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

std::vector<Stratum> stratified_breakdown(std::span<const RankRecord> records, std::span<const std::uint64_t> edges,
                                          const MetricConfig& config) {
  if (edges.empty() || edges.front() != 0) throw ConfigError("stratum edges must start at 0");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i] <= edges[i - 1]) throw ConfigError("stratum edges must be strictly ascending");
  }
  MetricConfig flat = config;
  flat.beta = 0.0;
  flat.validate();

  std::vector<std::vector<RankRecord>> buckets(edges.size());
  for (const auto& r : records) {
    const auto it = std::upper_bound(edges.begin(), edges.end(), r.query.gold_popularity);
    buckets[static_cast<std::size_t>(it - edges.begin()) - 1].push_back(r);
  }

  std::vector<Stratum> out(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    out[i].lo = edges[i];
    if (i + 1 < edges.size()) out[i].hi = edges[i + 1];
    out[i].count = buckets[i].size();
    if (!buckets[i].empty()) out[i].score = probe_score(buckets[i], flat);
  }
  return out;
}

std::vector<std::uint64_t> default_strata_edges(std::uint64_t delta_max) {
  std::vector<std::uint64_t> edges{0};
  if (delta_max == 0) return edges;
  std::uint64_t p = 1;
  edges.push_back(p);
  while (p < delta_max) {
    p *= 2;
    edges.push_back(p);
  }
  return edges;
}

}  // namespace probe
