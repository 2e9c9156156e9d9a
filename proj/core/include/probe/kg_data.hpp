#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace probe {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

enum class Split { Train, Valid, Test };

std::string_view to_string(Split split) noexcept;

// A fact as read from a split file. Labels are opaque byte strings.
struct Triple {
  std::string head;
  std::string relation;
  std::string tail;

  friend bool operator==(const Triple&, const Triple&) = default;
};

struct TripleSet {
  Split split = Split::Train;
  std::vector<Triple> triples;
  // Number of repeated lines dropped while loading.
  std::size_t duplicates_dropped = 0;
};

// Parses `head<TAB>relation<TAB>tail` lines. Blank lines are skipped, CRLF is
// accepted, surrounding whitespace of each field is trimmed. Throws
// ParseError (wrong field count, empty field) or IoError.
TripleSet load_split(const std::filesystem::path& path, Split split);

// Same as load_split, reading from an in-memory buffer. `source` names the
// buffer in error messages.
TripleSet parse_split(std::string_view text, Split split, const std::string& source = "<memory>");

// Writes triples back in the TSV layout load_split reads.
void write_split(std::ostream& out, const TripleSet& set);

struct IdTriple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;

  friend bool operator==(const IdTriple&, const IdTriple&) = default;
  friend auto operator<=>(const IdTriple&, const IdTriple&) = default;
};

// Dense label <-> id mapping. Ids are assigned in insertion order.
class Vocabulary {
 public:
  // Returns the existing id for `label` or assigns the next one.
  std::uint32_t intern(std::string_view label);

  std::optional<std::uint32_t> find(std::string_view label) const;

  const std::string& label(std::uint32_t id) const { return labels_.at(id); }
  std::size_t size() const noexcept { return labels_.size(); }
  std::span<const std::string> labels() const noexcept { return labels_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.labels_ == b.labels_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
  };
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::uint32_t, Hash, std::equal_to<>> ids_;
};

// G = (E, R, T) with the three evaluation splits stored by id. Immutable
// once built.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  const Vocabulary& entities() const noexcept { return entities_; }
  const Vocabulary& relations() const noexcept { return relations_; }

  std::span<const IdTriple> train() const noexcept { return train_; }
  std::span<const IdTriple> valid() const noexcept { return valid_; }
  std::span<const IdTriple> test() const noexcept { return test_; }
  std::span<const IdTriple> split(Split s) const noexcept;

  std::size_t entity_count() const noexcept { return entities_.size(); }
  std::size_t relation_count() const noexcept { return relations_.size(); }

 private:
  friend KnowledgeGraph build_graph(const TripleSet&, const TripleSet&, const TripleSet&);

  Vocabulary entities_;
  Vocabulary relations_;
  std::vector<IdTriple> train_;
  std::vector<IdTriple> valid_;
  std::vector<IdTriple> test_;
};

// Assigns ids in first-appearance order over train, valid, then test (head
// before tail within a triple). Duplicate id-triples within a split are
// dropped.
KnowledgeGraph build_graph(const TripleSet& train, const TripleSet& valid, const TripleSet& test);

// Per-entity number of training triples the entity appears in (a self-loop
// counts once). Entities that never occur in train have popularity 0.
class PopularityIndex {
 public:
  PopularityIndex() = default;
  explicit PopularityIndex(std::vector<std::uint64_t> counts) : counts_(std::move(counts)) {}

  std::uint64_t operator[](EntityId e) const { return counts_.at(e); }
  std::size_t size() const noexcept { return counts_.size(); }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }

 private:
  std::vector<std::uint64_t> counts_;
};

PopularityIndex compute_popularity(const KnowledgeGraph& graph);

struct DatasetStats {
  std::size_t n_entities = 0;
  std::size_t n_relations = 0;
  std::size_t n_triples = 0;  // training split
  std::uint64_t popularity_mass = 0;
  double delta_avg = 0.0;  // unrounded; popularity_mass / n_entities
  std::uint64_t delta_max = 0;
  bool delta_avg_defined = true;  // false when n_entities == 0

  // delta_avg rounded to one decimal, as printed in reports.
  double delta_avg_display() const;
};

DatasetStats dataset_stats(const KnowledgeGraph& graph, const PopularityIndex& pop);

// Aligned two-column text rendering of the stats.
std::string format_stats_text(const DatasetStats& stats);

// `label<TAB>id` per line, in id order.
void write_vocabulary(std::ostream& out, const Vocabulary& vocab);

struct DatasetFiles {
  std::filesystem::path train = "train.txt";
  std::filesystem::path valid = "valid.txt";
  std::filesystem::path test = "test.txt";
};

struct Dataset {
  KnowledgeGraph graph;
  PopularityIndex popularity;
  std::size_t duplicates_dropped = 0;
};

// Loads `dir/train.txt`, `dir/valid.txt`, `dir/test.txt` (names overridable;
// absolute names ignore `dir`).
Dataset load_dataset(const std::filesystem::path& dir, const DatasetFiles& files = {});

}  // namespace probe
