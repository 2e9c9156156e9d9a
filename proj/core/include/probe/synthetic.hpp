#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "probe/metrics.hpp"
#include "probe/ranking.hpp"

namespace probe::synthetic {

// A fixed rank list, replayed verbatim. `popularities`, when non-empty,
// gives each record's gold popularity and overrides the profile rules.
struct ExplicitRanks {
  std::vector<std::uint64_t> ranks;
  std::vector<std::uint64_t> popularities;
};

// Rank 1 with probability p1, otherwise a geometric(tail) draw over
// [tail_min, n_entities], truncated and renormalised. tail = 1 puts all
// remaining mass on tail_min.
struct Mixture {
  double p1 = 0.0;
  double tail = 0.5;
  std::uint64_t tail_min = 2;
  std::uint64_t n_entities = 2;

  // Probability of drawing `rank`; sums to 1 over [1, n_entities].
  double probability(std::uint64_t rank) const;
};

// Gold popularity for records whose rank falls in [rank_lo, rank_hi]:
// uniform over [popularity_lo, popularity_hi] (equal bounds = constant).
struct PopularityRule {
  std::uint64_t rank_lo = 1;
  std::optional<std::uint64_t> rank_hi;  // inclusive; nullopt = no upper bound
  std::uint64_t popularity_lo = 0;
  std::uint64_t popularity_hi = 0;

  bool matches(std::uint64_t rank) const noexcept {
    return rank >= rank_lo && (!rank_hi || rank <= *rank_hi);
  }
};

struct RankProfile {
  std::variant<ExplicitRanks, Mixture> spec;
  // First matching rule wins; records matching none get popularity 0.
  std::vector<PopularityRule> popularity;

  void validate() const;
};

// JSON profile, either
//   {"ranks": [1, 2, 4], "popularities": [5, 0, 1]}
// or
//   {"p1": 0.6, "tail": 0.3, "tail_min": 2, "entities": 10000,
//    "popularity": [{"ranks": [1, 1], "value": 900},
//                   {"ranks": [2, null], "range": [0, 20]}]}
RankProfile parse_profile(std::string_view json);
RankProfile load_profile(const std::filesystem::path& path);

// n records drawn from the profile with std::mt19937_64 seeded by `seed`.
// Identical (profile, n, seed) give identical output on every platform.
// Explicit profiles require n == ranks.size(). Record i has query triple
// (2i, 0, 2i+1), tail-masked.
std::vector<RankRecord> generate(const RankProfile& profile, std::size_t n, std::uint64_t seed);

// Rank-file rows for generated records, labels `e<id>` / `r<id>`, with the
// popularity column.
void write_ranks(std::ostream& out, std::span<const RankRecord> records);

// The weighted transformed-rank mean, computed in one naive loop straight
// from the defining formulas. Independent of probe::probe_score; used as
// its reference.
double oracle_probe(std::span<const RankRecord> records, const MetricConfig& config);

}  // namespace probe::synthetic
