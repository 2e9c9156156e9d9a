#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "probe/ranking.hpp"

namespace probe {

/// Evaluation settings for the sharpness/popularity-aware score.
///
/// `alpha` controls how hard non-top ranks are penalised, `beta` how strongly
/// predictions for popular gold entities are down-weighted, and `epsilon`
/// keeps the weight finite for entities with no training triples. With
/// `affine` set, transformed scores are rescaled so rank 1 maps to 1 and
/// rank |E| maps to 0; `entity_count` supplies |E| for that rescaling.
struct MetricConfig {
  double alpha = 1.0;
  double beta = 0.0;
  double epsilon = 1.0;
  bool affine = true;
  std::uint64_t entity_count = 0;

  /// Throws ConfigError/DomainError describing the first violated constraint:
  /// epsilon > 0, beta >= 0, finite values, and for affine mode alpha > 0 and
  /// entity_count >= 2.
  void validate() const;
};

/// r^(-alpha). Any finite alpha is accepted: alpha = 1 gives the reciprocal
/// rank, alpha = -1 the rank itself. Throws DomainError for rank < 1.
double rt_raw(std::uint64_t rank, double alpha);

/// Affine rescaling of rt_raw onto [0, 1]:
///   (rt_raw(r, alpha) - 1) / (1 - n^(-alpha)) + 1.
/// Requires alpha > 0, n >= 2 and 1 <= rank <= n; rank 1 yields exactly 1.
double rt_affine(std::uint64_t rank, double alpha, std::uint64_t n_entities);

/// (epsilon + delta)^(-beta). Throws ConfigError for epsilon <= 0 or beta < 0.
double weight(std::uint64_t delta, double beta, double epsilon);

/// Transformed scores with their aggregation weights.
struct ScoreSet {
  std::vector<double> scores;
  std::vector<double> weights;
};

/// Weighted mean sum(w_i * c_i) / sum(w_i), summed in index order with
/// compensation. Throws InputError on empty input, mismatched lengths or a
/// non-positive weight.
double aggregate(const ScoreSet& set);

/// Transform + weight + aggregate over `records`. The transform step may run
/// on `threads` workers; the reduction is always sequential, so the result
/// does not depend on `threads`. Throws for empty input or invalid config.
double probe_score(std::span<const RankRecord> records, const MetricConfig& config, unsigned threads = 1);

/// Builds the ScoreSet probe_score aggregates.
ScoreSet transform(std::span<const RankRecord> records, const MetricConfig& config, unsigned threads = 1);

double mr(std::span<const RankRecord> records);
double mrr(std::span<const RankRecord> records);
double hits_at_k(std::span<const RankRecord> records, std::uint64_t k);

inline constexpr std::uint64_t kDefaultHits[] = {1, 3, 10};

struct Stratum {
  std::uint64_t lo = 0;
  std::optional<std::uint64_t> hi;  // exclusive; nullopt = unbounded
  std::size_t count = 0;
  std::optional<double> score;  // nullopt for an empty bucket
};

/// Partitions records by gold popularity into [e0,e1), ..., [e_last, inf) and
/// scores each bucket with beta forced to 0. Edges must be strictly ascending
/// and start at 0.
std::vector<Stratum> stratified_breakdown(std::span<const RankRecord> records, std::span<const std::uint64_t> edges,
                                          const MetricConfig& config);

/// {0, 1, 2, 4, ..., 2^ceil(log2(delta_max))}; {0} when delta_max is 0.
std::vector<std::uint64_t> default_strata_edges(std::uint64_t delta_max);

}  // namespace probe
