#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "probe/kg_data.hpp"
#include "probe/ranking.hpp"

namespace probe {

// One JSON-lines score record:
//   {"head": ..., "relation": ..., "tail": ..., "direction": "head"|"tail",
//    "scores": [s_0, ..., s_{|E|-1}]}
// Entity order of `scores` follows the exported vocabulary.
struct ScoreLine {
  Triple labels;
  Direction direction = Direction::Tail;
  std::vector<double> scores;
};

// Throws ParseError (with `line`) for invalid JSON, missing fields or
// non-numeric scores.
ScoreLine parse_score_line(std::string_view json, const std::string& source, std::size_t line);

struct RankingOptions {
  TiePolicy tie = TiePolicy::average();
  bool filtered = true;
  unsigned threads = 1;
  std::size_t batch_lines = 256;
};

// Streams a score file and ranks every row against `dataset`. Records come
// back in file order. Each row must name a distinct test query and carry
// exactly |E| finite scores. The random tie draw of a row depends only on
// the seed and the row's position in the file.
std::vector<RankRecord> rank_score_file(const std::filesystem::path& path, const Dataset& dataset,
                                        const RankingOptions& options);

}  // namespace probe
