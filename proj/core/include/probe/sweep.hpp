#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "probe/metrics.hpp"
#include "probe/ranking.hpp"

namespace probe {

// (alpha, beta) evaluation grid with a reference cell.
struct SweepGrid {
  std::vector<double> alphas;
  std::vector<double> betas;
  double base_alpha = 1.0;
  double base_beta = 0.0;

  // alpha in {0.25, 0.5, 1, 2}, beta in {0, 0.2, 0.4, 0.8}, base (1, 0).
  static SweepGrid standard();

  // Alphas strictly ascending and > 0, betas strictly ascending and >= 0,
  // base cell on the grid.
  void validate() const;
};

// Two scores closer than this are a tie, never a flip.
inline constexpr double kScoreTieTolerance = 1e-12;

enum class PairOrder { FirstAhead, SecondAhead, Tie };

PairOrder compare_scores(double first, double second) noexcept;
std::string_view to_string(PairOrder order) noexcept;

struct SweepCell {
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<double> scores;       // indexed like SweepResult::models
  std::vector<std::size_t> order;   // model indices, best first; ties by name
  std::vector<bool> tied_with_next; // order[i] ties with order[i + 1]
};

// A model pair whose relative order at a cell differs from the base cell.
// Pairs are named in lexicographic order (first < second).
struct Flip {
  double alpha = 0.0;
  double beta = 0.0;
  std::string first;
  std::string second;
  PairOrder at_base = PairOrder::Tie;
  PairOrder at_cell = PairOrder::Tie;
};

struct SweepResult {
  std::vector<std::string> models;  // sorted by name
  std::vector<SweepCell> cells;     // alpha-major, both axes ascending
  std::size_t base_cell = 0;
  std::vector<Flip> flips;

  const SweepCell& cell(double alpha, double beta) const;
  double score(std::string_view model, double alpha, double beta) const;
};

using ModelRanks = std::map<std::string, std::vector<RankRecord>, std::less<>>;

// Scores every model at every grid cell, varying only alpha and beta of
// `base`. All models must rank the same query set; otherwise InputError
// names the first divergence. Cells run on up to `threads` workers; results
// do not depend on the worker count.
SweepResult run_sweep(const ModelRanks& models, const SweepGrid& grid, const MetricConfig& base, unsigned threads = 1);

// Throws InputError when the two record sets rank different queries.
void check_same_queries(std::string_view name_a, std::span<const RankRecord> a, std::string_view name_b,
                        std::span<const RankRecord> b);

struct RankHistogram {
  std::vector<std::uint64_t> edges;   // bin i = [edges[i], edges[i+1]); last bin unbounded
  std::vector<std::uint64_t> counts;  // same length as edges
};

inline constexpr std::uint64_t kDefaultRankBins[] = {1, 2, 6, 11, 101};

// Edges must start at 1 and be strictly ascending.
RankHistogram rank_histogram(std::span<const RankRecord> records, std::span<const std::uint64_t> edges);

struct SurfacePoint {
  std::string model;
  double alpha = 0.0;
  double beta = 0.0;
  double score = 0.0;

  friend bool operator==(const SurfacePoint&, const SurfacePoint&) = default;
};

// Long-format `model,alpha,beta,score`, sorted by (model, alpha, beta);
// scores carry 17 significant digits.
void write_surface_csv(std::ostream& out, const SweepResult& result);
void surface_export(const SweepResult& result, const std::filesystem::path& path);
std::vector<SurfacePoint> parse_surface_csv(std::string_view text);

// Serialized sweep reports (JSON text).
std::string rankings_json(const SweepResult& result);
std::string flips_json(const SweepResult& result);

// `model,lo,hi,count`; hi is empty for the unbounded bin.
void write_histogram_csv(std::ostream& out, const std::map<std::string, RankHistogram, std::less<>>& histograms);

// Shortest decimal text that reads back to the same double.
std::string format_shortest(double v);
// 17 significant digits.
std::string format_exact(double v);

}  // namespace probe
