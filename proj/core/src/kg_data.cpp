#include "probe/kg_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "probe/errors.hpp"
#include "text_util.hpp"

namespace probe {

std::string_view to_string(Split split) noexcept {
  switch (split) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
  }
  return "unknown";
}

TripleSet parse_split(std::string_view text, Split split, const std::string& source) {
  TripleSet set;
  set.split = split;
  std::unordered_set<std::string> seen;
  std::string key;

  std::size_t line_no = 0;
  detail::for_each_line(text, [&](std::string_view line) {
    ++line_no;
    if (detail::trim(line).empty()) return;
    std::string_view fields[3];
    const std::size_t n = detail::split_tabs(line, fields);
    if (n != 3) {
      throw ParseError(source, line_no, "expected 3 tab-separated fields, found " + std::to_string(n));
    }
    for (auto& f : fields) {
      f = detail::trim(f);
      if (f.empty()) throw ParseError(source, line_no, "empty field");
    }
    key.assign(fields[0]).append(1, '\t').append(fields[1]).append(1, '\t').append(fields[2]);
    if (!seen.insert(key).second) {
      ++set.duplicates_dropped;
      return;
    }
    set.triples.push_back({std::string(fields[0]), std::string(fields[1]), std::string(fields[2])});
  });
  return set;
}

TripleSet load_split(const std::filesystem::path& path, Split split) {
  return parse_split(detail::read_file(path), split, path.string());
}

void write_split(std::ostream& out, const TripleSet& set) {
  for (const auto& t : set.triples) out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
}

std::uint32_t Vocabulary::intern(std::string_view label) {
  if (auto it = ids_.find(label); it != ids_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(labels_.size());
  labels_.emplace_back(label);
  ids_.emplace(labels_.back(), id);
  return id;
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view label) const {
  if (auto it = ids_.find(label); it != ids_.end()) return it->second;
  return std::nullopt;
}

std::span<const IdTriple> KnowledgeGraph::split(Split s) const noexcept {
  switch (s) {
    case Split::Train: return train_;
    case Split::Valid: return valid_;
    case Split::Test: return test_;
  }
  return {};
}

namespace {

void intern_split(const TripleSet& in, Vocabulary& entities, Vocabulary& relations,
                  std::vector<IdTriple>& out) {
  out.reserve(in.triples.size());
  for (const auto& t : in.triples) {
    IdTriple id;
    id.head = entities.intern(t.head);
    id.relation = relations.intern(t.relation);
    id.tail = entities.intern(t.tail);
    out.push_back(id);
  }
  // TripleSets built outside load_split may still carry repeats.
  std::vector<IdTriple> sorted = out;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end()) return;

  std::set<IdTriple> seen;
  std::erase_if(out, [&](const IdTriple& t) { return !seen.insert(t).second; });
}

}  // namespace

KnowledgeGraph build_graph(const TripleSet& train, const TripleSet& valid, const TripleSet& test) {
  KnowledgeGraph g;
  intern_split(train, g.entities_, g.relations_, g.train_);
  intern_split(valid, g.entities_, g.relations_, g.valid_);
  intern_split(test, g.entities_, g.relations_, g.test_);
  return g;
}

PopularityIndex compute_popularity(const KnowledgeGraph& graph) {
  std::vector<std::uint64_t> counts(graph.entity_count(), 0);
  for (const auto& t : graph.train()) {
    ++counts[t.head];
    if (t.tail != t.head) ++counts[t.tail];
  }
  return PopularityIndex(std::move(counts));
}

double DatasetStats::delta_avg_display() const { return std::round(delta_avg * 10.0) / 10.0; }

DatasetStats dataset_stats(const KnowledgeGraph& graph, const PopularityIndex& pop) {
  DatasetStats s;
  s.n_entities = graph.entity_count();
  s.n_relations = graph.relation_count();
  s.n_triples = graph.train().size();
  for (auto c : pop.counts()) {
    s.popularity_mass += c;
    s.delta_max = std::max(s.delta_max, c);
  }
  if (s.n_entities == 0) {
    s.delta_avg_defined = false;
    s.delta_avg = 0.0;
  } else {
    s.delta_avg = static_cast<double>(s.popularity_mass) / static_cast<double>(s.n_entities);
  }
  return s;
}

std::string format_stats_text(const DatasetStats& s) {
  std::ostringstream out;
  auto row = [&](std::string_view name, const std::string& value) {
    out << std::left << std::setw(12) << name << std::right << std::setw(12) << value << '\n';
  };
  std::ostringstream avg;
  avg << std::fixed << std::setprecision(1) << s.delta_avg_display();
  row("|E|", std::to_string(s.n_entities));
  row("|R|", std::to_string(s.n_relations));
  row("|T|", std::to_string(s.n_triples));
  row("delta_avg", s.delta_avg_defined ? avg.str() : std::string("n/a"));
  row("delta_max", std::to_string(s.delta_max));
  return out.str();
}

void write_vocabulary(std::ostream& out, const Vocabulary& vocab) {
  const auto labels = vocab.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) out << labels[i] << '\t' << i << '\n';
}

Dataset load_dataset(const std::filesystem::path& dir, const DatasetFiles& files) {
  auto resolve = [&](const std::filesystem::path& p) { return p.is_absolute() ? p : dir / p; };
  const auto train = load_split(resolve(files.train), Split::Train);
  const auto valid = load_split(resolve(files.valid), Split::Valid);
  const auto test = load_split(resolve(files.test), Split::Test);

  Dataset d;
  d.graph = build_graph(train, valid, test);
  d.popularity = compute_popularity(d.graph);
  d.duplicates_dropped = train.duplicates_dropped + valid.duplicates_dropped + test.duplicates_dropped;
  return d;
}

}  // namespace probe
