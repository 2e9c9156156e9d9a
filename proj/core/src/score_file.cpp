#include "probe/score_file.hpp"

#include <exception>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "probe/errors.hpp"
#include "probe/parallel.hpp"
#include "probe/random.hpp"
#include "text_util.hpp"

namespace probe {

namespace {

std::string field_string(const nlohmann::json& obj, const char* name, const std::string& source, std::size_t line) {
  auto it = obj.find(name);
  if (it == obj.end() || !it->is_string()) {
    throw ParseError(source, line, std::string("missing or non-string field '") + name + "'");
  }
  return it->get<std::string>();
}

struct IdTripleHash {
  std::size_t operator()(const IdTriple& t) const noexcept {
    return static_cast<std::size_t>(mix_seed(mix_seed(t.head, t.relation), t.tail));
  }
};

}  // namespace

ScoreLine parse_score_line(std::string_view text, const std::string& source, std::size_t line) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source, line, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError(source, line, "expected a JSON object");

  ScoreLine out;
  out.labels = {field_string(obj, "head", source, line), field_string(obj, "relation", source, line),
                field_string(obj, "tail", source, line)};
  try {
    out.direction = parse_direction(field_string(obj, "direction", source, line));
  } catch (const ParseError&) {
    throw;
  } catch (const InputError& e) {
    throw ParseError(source, line, e.what());
  }

  auto it = obj.find("scores");
  if (it == obj.end() || !it->is_array()) throw ParseError(source, line, "missing or non-array field 'scores'");
  out.scores.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_number()) throw ParseError(source, line, "non-numeric entry in 'scores'");
    out.scores.push_back(v.get<double>());
  }
  return out;
}

std::vector<RankRecord> rank_score_file(const std::filesystem::path& path, const Dataset& dataset,
                                        const RankingOptions& options) {
  options.tie.validate();
  const auto& graph = dataset.graph;
  const std::string source = path.string();

  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + source);

  std::unordered_map<IdTriple, std::size_t, IdTripleHash> test_index;
  const auto test = graph.test();
  for (std::size_t i = 0; i < test.size(); ++i) test_index.emplace(test[i], i);
  std::vector<char> ranked(test.size() * 2, 0);

  const FilterIndex filter(graph);
  const std::size_t n_entities = graph.entity_count();

  struct Pending {
    std::string text;
    std::size_t line = 0;
  };
  std::vector<Pending> batch;
  std::vector<RankRecord> records;

  auto rank_one = [&](const Pending& p) -> RankRecord {
    auto parsed = parse_score_line(p.text, source, p.line);
    auto lookup = [&](const Vocabulary& v, const std::string& label, const char* what) {
      auto id = v.find(label);
      if (!id) throw ParseError(source, p.line, std::string("unknown ") + what + " '" + label + "'");
      return *id;
    };
    const IdTriple triple{lookup(graph.entities(), parsed.labels.head, "entity"),
                          lookup(graph.relations(), parsed.labels.relation, "relation"),
                          lookup(graph.entities(), parsed.labels.tail, "entity")};
    if (!test_index.contains(triple)) {
      throw InputError(source + ":" + std::to_string(p.line) + ": triple is not in the test split");
    }
    if (parsed.scores.size() != n_entities) {
      throw InputError(source + ":" + std::to_string(p.line) + ": scores has " + std::to_string(parsed.scores.size()) +
                       " entries, expected |E| = " + std::to_string(n_entities));
    }
    ScoreRow row;
    row.query.triple = triple;
    row.query.direction = parsed.direction;
    row.query.gold = parsed.direction == Direction::Head ? triple.head : triple.tail;
    row.query.gold_popularity = dataset.popularity[row.query.gold];
    row.scores = std::move(parsed.scores);

    std::vector<EntityId> excluded;
    if (options.filtered) excluded = filter.candidates(row.query);
    try {
      return rank_of_gold(row, excluded, options.tie, records.size() + (&p - batch.data()));
    } catch (const ContractError&) {
      throw;
    } catch (const InputError& e) {
      throw InputError(source + ":" + std::to_string(p.line) + ": " + e.what());
    }
  };

  auto flush = [&] {
    std::vector<RankRecord> out(batch.size());
    std::vector<std::exception_ptr> errors(batch.size());
    parallel_for(batch.size(), options.threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        try {
          out[i] = rank_one(batch[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (errors[i]) std::rethrow_exception(errors[i]);
      const auto& q = out[i].query;
      const std::size_t slot = test_index.at(q.triple) * 2 + (q.direction == Direction::Tail ? 1 : 0);
      if (ranked[slot]) {
        throw InputError(source + ":" + std::to_string(batch[i].line) + ": query ranked more than once");
      }
      ranked[slot] = 1;
      records.push_back(out[i]);
    }
    batch.clear();
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    batch.push_back({std::move(line), line_no});
    line.clear();
    if (batch.size() >= options.batch_lines) flush();
  }
  if (in.bad()) throw IoError("read failed: " + source);
  flush();
  return records;
}

}  // namespace probe
