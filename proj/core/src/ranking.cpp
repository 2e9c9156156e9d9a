#include "probe/ranking.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <unordered_map>

#include "probe/errors.hpp"
#include "probe/random.hpp"
#include "text_util.hpp"

namespace probe {

std::string_view to_string(Direction d) noexcept { return d == Direction::Head ? "head" : "tail"; }

Direction parse_direction(std::string_view text) {
  if (text == "head") return Direction::Head;
  if (text == "tail") return Direction::Tail;
  throw InputError("direction must be 'head' or 'tail', got '" + std::string(text) + "'");
}

std::vector<Query> make_queries(std::span<const IdTriple> test, const PopularityIndex& pop) {
  std::vector<Query> out;
  out.reserve(test.size() * 2);
  for (const auto& t : test) {
    out.push_back({t, Direction::Head, t.head, pop[t.head]});
    out.push_back({t, Direction::Tail, t.tail, pop[t.tail]});
  }
  return out;
}

FilterIndex::FilterIndex(const KnowledgeGraph& graph) {
  for (auto split : {Split::Train, Split::Valid, Split::Test}) {
    for (const auto& t : graph.split(split)) {
      heads_[key(t.relation, t.tail)].push_back(t.head);
      tails_[key(t.head, t.relation)].push_back(t.tail);
    }
  }
  auto normalize = [](auto& map) {
    for (auto& [k, v] : map) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
  };
  normalize(heads_);
  normalize(tails_);
}

std::span<const EntityId> FilterIndex::completions(const Query& q) const {
  const auto& map = q.direction == Direction::Head ? heads_ : tails_;
  const auto k = q.direction == Direction::Head ? key(q.triple.relation, q.triple.tail)
                                                : key(q.triple.head, q.triple.relation);
  if (auto it = map.find(k); it != map.end()) return it->second;
  return {};
}

std::vector<EntityId> FilterIndex::candidates(const Query& q) const {
  const auto all = completions(q);
  std::vector<EntityId> out;
  out.reserve(all.size());
  for (auto e : all) {
    if (e != q.gold) out.push_back(e);
  }
  return out;
}

std::vector<EntityId> filter_set(const Query& q, const KnowledgeGraph& graph) {
  return FilterIndex(graph).candidates(q);
}

std::string_view to_string(TieKind kind) noexcept {
  switch (kind) {
    case TieKind::Optimistic: return "optimistic";
    case TieKind::Pessimistic: return "pessimistic";
    case TieKind::Average: return "average";
    case TieKind::Random: return "random";
  }
  return "unknown";
}

TiePolicy TiePolicy::parse(std::string_view name, std::optional<std::uint64_t> seed) {
  TiePolicy p;
  if (name == "optimistic") {
    p.kind = TieKind::Optimistic;
  } else if (name == "pessimistic") {
    p.kind = TieKind::Pessimistic;
  } else if (name == "average") {
    p.kind = TieKind::Average;
  } else if (name == "random") {
    p.kind = TieKind::Random;
  } else {
    throw ConfigError("unknown tie policy '" + std::string(name) +
                      "' (expected optimistic, pessimistic, average or random)");
  }
  p.seed = seed;
  p.validate();
  return p;
}

void TiePolicy::validate() const {
  if (kind == TieKind::Random && !seed) throw ConfigError("the random tie policy requires an explicit --seed");
}

std::uint64_t rank_of_gold(std::span<const double> scores, EntityId gold, std::span<const EntityId> filter,
                           const TiePolicy& tie, std::uint64_t stream) {
  tie.validate();
  if (gold >= scores.size()) {
    throw ContractError("gold entity " + std::to_string(gold) + " outside score row of length " +
                        std::to_string(scores.size()));
  }
  const double target = scores[gold];
  std::uint64_t greater = 0;
  std::uint64_t tied = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double s = scores[i];
    if (!std::isfinite(s)) throw InputError("non-finite score at candidate " + std::to_string(i));
    greater += s > target;
    tied += s == target;
  }
  --tied;  // gold itself

  std::vector<EntityId> sorted;
  if (!std::is_sorted(filter.begin(), filter.end()) ||
      std::adjacent_find(filter.begin(), filter.end()) != filter.end()) {
    sorted.assign(filter.begin(), filter.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    filter = sorted;
  }
  for (auto e : filter) {
    if (e == gold) throw ContractError("gold entity " + std::to_string(gold) + " is in the filter set");
    if (e >= scores.size()) throw ContractError("filter entity " + std::to_string(e) + " outside score row");
    greater -= scores[e] > target;
    tied -= scores[e] == target;
  }

  std::uint64_t adjust = 0;
  switch (tie.kind) {
    case TieKind::Optimistic: adjust = 0; break;
    case TieKind::Pessimistic: adjust = tied; break;
    case TieKind::Average: adjust = (tied + 1) / 2; break;
    case TieKind::Random: {
      Rng rng(mix_seed(*tie.seed, stream));
      adjust = rng.between(0, tied);
      break;
    }
  }
  return 1 + greater + adjust;
}

RankRecord rank_of_gold(const ScoreRow& row, std::span<const EntityId> filter, const TiePolicy& tie,
                        std::uint64_t stream) {
  return {row.query, rank_of_gold(row.scores, row.query.gold, filter, tie, stream)};
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t parse_uint(std::string_view text, const std::string& source, std::size_t line, const char* what) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end) {
    throw ParseError(source, line, std::string(what) + " is not a non-negative integer: '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::vector<RankFileRow> parse_rank_file(std::string_view text, const std::string& source) {
  std::vector<RankFileRow> rows;
  std::size_t line_no = 0;
  detail::for_each_line(text, [&](std::string_view line) {
    ++line_no;
    if (detail::trim(line).empty()) return;
    std::string_view f[6];
    const std::size_t n = detail::split_tabs(line, f);
    if (n != 5 && n != 6) {
      throw ParseError(source, line_no, "expected 5 or 6 tab-separated fields, found " + std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
      f[i] = detail::trim(f[i]);
      if (f[i].empty()) throw ParseError(source, line_no, "empty field");
    }
    RankFileRow row;
    row.labels = {std::string(f[0]), std::string(f[1]), std::string(f[2])};
    try {
      row.direction = parse_direction(f[3]);
    } catch (const InputError& e) {
      throw ParseError(source, line_no, e.what());
    }
    row.rank = parse_uint(f[4], source, line_no, "rank");
    if (row.rank < 1) {
      throw DomainError(source + ":" + std::to_string(line_no) + ": rank must be >= 1, got " + std::string(f[4]));
    }
    if (n == 6) row.popularity = parse_uint(f[5], source, line_no, "popularity");
    rows.push_back(std::move(row));
  });
  return rows;
}

std::vector<RankFileRow> read_rank_file(const std::filesystem::path& path) {
  return parse_rank_file(detail::read_file(path), path.string());
}

std::vector<RankRecord> resolve_ranks(std::span<const RankFileRow> rows, const KnowledgeGraph& graph,
                                      const PopularityIndex& pop, ResolveReport* report) {
  std::vector<RankRecord> out;
  out.reserve(rows.size());
  ResolveReport local;
  for (const auto& row : rows) {
    auto h = graph.entities().find(row.labels.head);
    auto r = graph.relations().find(row.labels.relation);
    auto t = graph.entities().find(row.labels.tail);
    RankRecord rec;
    rec.query.triple = {h.value_or(kUnknownId), r.value_or(kUnknownId), t.value_or(kUnknownId)};
    rec.query.direction = row.direction;
    const auto gold = row.direction == Direction::Head ? h : t;
    rec.query.gold = gold.value_or(kUnknownId);
    rec.query.gold_popularity = gold ? pop[*gold] : 0;
    local.unknown_entities += !gold;
    local.unknown_relations += !r;
    rec.rank = row.rank;
    out.push_back(rec);
  }
  if (report) *report = local;
  return out;
}

std::vector<RankRecord> resolve_ranks(std::span<const RankFileRow> rows, Vocabulary& entities,
                                      Vocabulary& relations) {
  std::vector<RankRecord> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    RankRecord rec;
    rec.query.triple = {entities.intern(row.labels.head), relations.intern(row.labels.relation),
                        entities.intern(row.labels.tail)};
    rec.query.direction = row.direction;
    rec.query.gold = row.direction == Direction::Head ? rec.query.triple.head : rec.query.triple.tail;
    rec.query.gold_popularity = row.popularity.value_or(0);
    rec.rank = row.rank;
    out.push_back(rec);
  }
  return out;
}

std::vector<RankRecord> load_rank_file(const std::filesystem::path& path, const KnowledgeGraph& graph,
                                       const PopularityIndex& pop, ResolveReport* report) {
  const auto rows = read_rank_file(path);
  return resolve_ranks(rows, graph, pop, report);
}

void write_rank_file(std::ostream& out, std::span<const RankRecord> records, const Vocabulary& entities,
                     const Vocabulary& relations, bool with_popularity) {
  for (const auto& r : records) {
    const auto& t = r.query.triple;
    out << entities.label(t.head) << '\t' << relations.label(t.relation) << '\t' << entities.label(t.tail) << '\t'
        << to_string(r.query.direction) << '\t' << r.rank;
    if (with_popularity) out << '\t' << r.query.gold_popularity;
    out << '\n';
  }
}

namespace {

struct QueryKey {
  IdTriple triple;
  Direction direction;
  friend bool operator==(const QueryKey&, const QueryKey&) = default;
};

struct QueryKeyHash {
  std::size_t operator()(const QueryKey& k) const noexcept {
    std::uint64_t h = mix_seed(k.triple.head, k.triple.relation);
    h = mix_seed(h, k.triple.tail);
    return static_cast<std::size_t>(mix_seed(h, static_cast<std::uint64_t>(k.direction)));
  }
};

std::string describe(const IdTriple& t, Direction d) {
  return "(" + std::to_string(t.head) + ", " + std::to_string(t.relation) + ", " + std::to_string(t.tail) + ")/" +
         std::string(to_string(d));
}

}  // namespace

void check_coverage(std::span<const RankRecord> records, std::span<const Query> expected) {
  std::unordered_map<QueryKey, std::size_t, QueryKeyHash> seen;
  seen.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& q = records[i].query;
    if (!seen.emplace(QueryKey{q.triple, q.direction}, i).second) {
      throw InputError("query " + describe(q.triple, q.direction) + " is ranked more than once (record " +
                       std::to_string(i + 1) + ")");
    }
  }
  std::size_t matched = 0;
  for (const auto& q : expected) {
    if (!seen.contains(QueryKey{q.triple, q.direction})) {
      throw InputError("test query " + describe(q.triple, q.direction) + " has no rank; every test query must be ranked");
    }
    ++matched;
  }
  if (matched != records.size()) {
    std::unordered_map<QueryKey, char, QueryKeyHash> want;
    for (const auto& q : expected) want.emplace(QueryKey{q.triple, q.direction}, 0);
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& q = records[i].query;
      if (!want.contains(QueryKey{q.triple, q.direction})) {
        throw InputError("record " + std::to_string(i + 1) + " ranks " + describe(q.triple, q.direction) +
                         ", which is not a test query");
      }
    }
  }
}

}  // namespace probe
