#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "probe/kg_data.hpp"

namespace probe {

// Which slot of the test triple is masked: Head means (?, r, t).
enum class Direction { Head, Tail };

std::string_view to_string(Direction d) noexcept;
Direction parse_direction(std::string_view text);

struct Query {
  IdTriple triple;
  Direction direction = Direction::Tail;
  EntityId gold = 0;
  std::uint64_t gold_popularity = 0;
};

// Two queries per test triple, head-masked first, in test order.
std::vector<Query> make_queries(std::span<const IdTriple> test, const PopularityIndex& pop);

// Known-true completions of each (relation, entity) pair over train, valid
// and test. Built once per graph; lookups are read-only and thread-safe.
class FilterIndex {
 public:
  explicit FilterIndex(const KnowledgeGraph& graph);

  // Entities e' != gold for which substituting e' into the masked slot
  // yields a known triple. Sorted ascending.
  std::vector<EntityId> candidates(const Query& q) const;

  // Same set without the gold exclusion and without copying.
  std::span<const EntityId> completions(const Query& q) const;

 private:
  static std::uint64_t key(std::uint32_t a, std::uint32_t b) noexcept {
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }
  std::unordered_map<std::uint64_t, std::vector<EntityId>> heads_;  // (relation, tail) -> heads
  std::unordered_map<std::uint64_t, std::vector<EntityId>> tails_;  // (head, relation) -> tails
};

// One-off convenience; builds a FilterIndex internally.
std::vector<EntityId> filter_set(const Query& q, const KnowledgeGraph& graph);

enum class TieKind { Optimistic, Pessimistic, Average, Random };

struct TiePolicy {
  TieKind kind = TieKind::Average;
  std::optional<std::uint64_t> seed;  // required for Random

  static TiePolicy optimistic() { return {TieKind::Optimistic, std::nullopt}; }
  static TiePolicy pessimistic() { return {TieKind::Pessimistic, std::nullopt}; }
  static TiePolicy average() { return {TieKind::Average, std::nullopt}; }
  static TiePolicy random(std::uint64_t seed) { return {TieKind::Random, seed}; }

  // Accepts optimistic|pessimistic|average|random. Throws ConfigError for an
  // unknown name or a random policy without seed.
  static TiePolicy parse(std::string_view name, std::optional<std::uint64_t> seed);

  void validate() const;
};

std::string_view to_string(TieKind kind) noexcept;

struct ScoreRow {
  Query query;
  std::vector<double> scores;  // index = entity id
};

struct RankRecord {
  Query query;
  std::uint64_t rank = 1;
};

// Filtered rank of `gold` among all candidates not in `filter`:
//   1 + #{score > gold's} + tie adjustment over #{score == gold's}.
// `stream` selects the random tie draw so that rows ranked in any order or
// on any thread get the same draw. `filter` may be in any order.
// Throws InputError for non-finite scores and ContractError when gold is in
// the filter or out of range.
std::uint64_t rank_of_gold(std::span<const double> scores, EntityId gold, std::span<const EntityId> filter,
                           const TiePolicy& tie, std::uint64_t stream = 0);

RankRecord rank_of_gold(const ScoreRow& row, std::span<const EntityId> filter, const TiePolicy& tie,
                        std::uint64_t stream = 0);

// ---------------------------------------------------------------------------
// Rank files: head<TAB>relation<TAB>tail<TAB>direction<TAB>rank[<TAB>popularity]

struct RankFileRow {
  Triple labels;
  Direction direction = Direction::Tail;
  std::uint64_t rank = 1;
  std::optional<std::uint64_t> popularity;  // optional sixth column
};

std::vector<RankFileRow> parse_rank_file(std::string_view text, const std::string& source = "<memory>");
std::vector<RankFileRow> read_rank_file(const std::filesystem::path& path);

struct ResolveReport {
  std::size_t unknown_entities = 0;  // rows whose gold is not in the vocabulary
  std::size_t unknown_relations = 0;
};

// Entity id used for labels absent from the dataset vocabulary.
inline constexpr EntityId kUnknownId = 0xFFFFFFFFu;

// Attaches ids and gold popularity from the dataset. Unknown labels map to
// kUnknownId with popularity 0 and are counted in `report`.
std::vector<RankRecord> resolve_ranks(std::span<const RankFileRow> rows, const KnowledgeGraph& graph,
                                      const PopularityIndex& pop, ResolveReport* report = nullptr);

// Without a dataset: labels are interned into the given vocabularies (share
// them across files so query identities line up) and gold popularity comes
// from the sixth column, 0 when absent.
std::vector<RankRecord> resolve_ranks(std::span<const RankFileRow> rows, Vocabulary& entities,
                                      Vocabulary& relations);

std::vector<RankRecord> load_rank_file(const std::filesystem::path& path, const KnowledgeGraph& graph,
                                       const PopularityIndex& pop, ResolveReport* report = nullptr);

// Writes records using the vocabularies to recover labels. With
// `with_popularity`, appends the sixth column.
void write_rank_file(std::ostream& out, std::span<const RankRecord> records, const Vocabulary& entities,
                     const Vocabulary& relations, bool with_popularity = false);

// Throws InputError naming the first query of `expected` that `records`
// does not rank exactly once, or the first record outside `expected`.
void check_coverage(std::span<const RankRecord> records, std::span<const Query> expected);

}  // namespace probe
