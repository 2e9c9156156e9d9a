#include "probe/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "probe/errors.hpp"
#include "probe/parallel.hpp"
#include "text_util.hpp"

namespace probe {

std::string format_shortest(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string format_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

SweepGrid SweepGrid::standard() { return {{0.25, 0.5, 1.0, 2.0}, {0.0, 0.2, 0.4, 0.8}, 1.0, 0.0}; }

void SweepGrid::validate() const {
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!std::isfinite(alphas[i]) || alphas[i] <= 0.0) throw ConfigError("grid alphas must be > 0");
    if (i > 0 && alphas[i] <= alphas[i - 1]) throw ConfigError("grid alphas must be strictly ascending");
  }
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!std::isfinite(betas[i]) || betas[i] < 0.0) throw ConfigError("grid betas must be >= 0");
    if (i > 0 && betas[i] <= betas[i - 1]) throw ConfigError("grid betas must be strictly ascending");
  }
  if (alphas.empty() && betas.empty()) return;
  const bool on_grid = std::find(alphas.begin(), alphas.end(), base_alpha) != alphas.end() &&
                       std::find(betas.begin(), betas.end(), base_beta) != betas.end();
  if (!on_grid) {
    throw ConfigError("base cell (" + format_shortest(base_alpha) + ", " + format_shortest(base_beta) +
                      ") is not on the grid");
  }
}

PairOrder compare_scores(double first, double second) noexcept {
  if (std::fabs(first - second) <= kScoreTieTolerance) return PairOrder::Tie;
  return first > second ? PairOrder::FirstAhead : PairOrder::SecondAhead;
}

std::string_view to_string(PairOrder order) noexcept {
  switch (order) {
    case PairOrder::FirstAhead: return "first_ahead";
    case PairOrder::SecondAhead: return "second_ahead";
    case PairOrder::Tie: return "tie";
  }
  return "unknown";
}

const SweepCell& SweepResult::cell(double alpha, double beta) const {
  for (const auto& c : cells) {
    if (c.alpha == alpha && c.beta == beta) return c;
  }
  throw InputError("no sweep cell at (" + format_shortest(alpha) + ", " + format_shortest(beta) + ")");
}

double SweepResult::score(std::string_view model, double alpha, double beta) const {
  const auto it = std::find(models.begin(), models.end(), model);
  if (it == models.end()) throw InputError("unknown model '" + std::string(model) + "'");
  return cell(alpha, beta).scores[static_cast<std::size_t>(it - models.begin())];
}

namespace {

struct Key {
  IdTriple triple;
  Direction direction;
  friend auto operator<=>(const Key&, const Key&) = default;
};

std::vector<Key> sorted_keys(std::span<const RankRecord> records) {
  std::vector<Key> keys;
  keys.reserve(records.size());
  for (const auto& r : records) keys.push_back({r.query.triple, r.query.direction});
  std::sort(keys.begin(), keys.end());
  return keys;
}

std::string describe(const Key& k) {
  return "(" + std::to_string(k.triple.head) + ", " + std::to_string(k.triple.relation) + ", " +
         std::to_string(k.triple.tail) + ")/" + std::string(to_string(k.direction));
}

}  // namespace

void check_same_queries(std::string_view name_a, std::span<const RankRecord> a, std::string_view name_b,
                        std::span<const RankRecord> b) {
  if (a.size() != b.size()) {
    throw InputError("models '" + std::string(name_a) + "' and '" + std::string(name_b) + "' rank " +
                     std::to_string(a.size()) + " and " + std::to_string(b.size()) + " queries");
  }
  const auto ka = sorted_keys(a);
  const auto kb = sorted_keys(b);
  const auto [ia, ib] = std::mismatch(ka.begin(), ka.end(), kb.begin());
  if (ia == ka.end()) return;
  const bool a_first = *ia < *ib;
  const auto& missing = a_first ? *ia : *ib;
  throw InputError("query " + describe(missing) + " is ranked by model '" +
                   std::string(a_first ? name_a : name_b) + "' but not by '" + std::string(a_first ? name_b : name_a) +
                   "'");
}

SweepResult run_sweep(const ModelRanks& models, const SweepGrid& grid, const MetricConfig& base, unsigned threads) {
  grid.validate();
  SweepResult result;
  for (const auto& [name, records] : models) result.models.push_back(name);
  if (models.size() > 1) {
    const auto& [first_name, first] = *models.begin();
    for (auto it = std::next(models.begin()); it != models.end(); ++it) {
      check_same_queries(first_name, first, it->first, it->second);
    }
  }

  std::vector<const std::vector<RankRecord>*> record_sets;
  for (const auto& [name, records] : models) record_sets.push_back(&records);

  for (double a : grid.alphas) {
    for (double b : grid.betas) {
      SweepCell cell;
      cell.alpha = a;
      cell.beta = b;
      cell.scores.assign(models.size(), 0.0);
      if (a == grid.base_alpha && b == grid.base_beta) result.base_cell = result.cells.size();
      result.cells.push_back(std::move(cell));
    }
  }

  const std::size_t n_models = models.size();
  parallel_for(result.cells.size() * n_models, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t job = begin; job < end; ++job) {
      auto& cell = result.cells[job / n_models];
      const std::size_t m = job % n_models;
      MetricConfig config = base;
      config.alpha = cell.alpha;
      config.beta = cell.beta;
      cell.scores[m] = probe_score(*record_sets[m], config);
    }
  });

  for (auto& cell : result.cells) {
    cell.order.resize(n_models);
    for (std::size_t i = 0; i < n_models; ++i) cell.order[i] = i;
    // Names are sorted, so index order breaks exact ties lexicographically.
    std::stable_sort(cell.order.begin(), cell.order.end(),
                     [&](std::size_t x, std::size_t y) { return cell.scores[x] > cell.scores[y]; });
    cell.tied_with_next.assign(n_models, false);
    for (std::size_t i = 0; i + 1 < n_models; ++i) {
      cell.tied_with_next[i] =
          compare_scores(cell.scores[cell.order[i]], cell.scores[cell.order[i + 1]]) == PairOrder::Tie;
    }
  }

  if (result.cells.empty()) return result;
  const auto& base_cell = result.cells[result.base_cell];
  for (const auto& cell : result.cells) {
    for (std::size_t i = 0; i < n_models; ++i) {
      for (std::size_t j = i + 1; j < n_models; ++j) {
        const auto before = compare_scores(base_cell.scores[i], base_cell.scores[j]);
        const auto now = compare_scores(cell.scores[i], cell.scores[j]);
        if (before == PairOrder::Tie || now == PairOrder::Tie || before == now) continue;
        result.flips.push_back({cell.alpha, cell.beta, result.models[i], result.models[j], before, now});
      }
    }
  }
  return result;
}

RankHistogram rank_histogram(std::span<const RankRecord> records, std::span<const std::uint64_t> edges) {
  if (edges.empty() || edges.front() != 1) throw ConfigError("histogram bin edges must start at 1");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i] <= edges[i - 1]) throw ConfigError("histogram bin edges must be strictly ascending");
  }
  RankHistogram h;
  h.edges.assign(edges.begin(), edges.end());
  h.counts.assign(edges.size(), 0);
  for (const auto& r : records) {
    const auto it = std::upper_bound(edges.begin(), edges.end(), r.rank);
    if (it == edges.begin()) throw DomainError("rank must be >= 1");
    ++h.counts[static_cast<std::size_t>(it - edges.begin()) - 1];
  }
  return h;
}

void write_surface_csv(std::ostream& out, const SweepResult& result) {
  out << "model,alpha,beta,score\n";
  for (std::size_t m = 0; m < result.models.size(); ++m) {
    for (const auto& cell : result.cells) {
      out << result.models[m] << ',' << format_shortest(cell.alpha) << ',' << format_shortest(cell.beta) << ','
          << format_exact(cell.scores[m]) << '\n';
    }
  }
}

void surface_export(const SweepResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_surface_csv(out, result);
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<SurfacePoint> parse_surface_csv(std::string_view text) {
  std::vector<SurfacePoint> points;
  std::size_t line_no = 0;
  auto parse_double = [&](std::string_view s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
      throw ParseError("surface.csv", line_no, "not a number: '" + std::string(s) + "'");
    }
    return v;
  };
  detail::for_each_line(text, [&](std::string_view line) {
    ++line_no;
    if (line_no == 1) {
      if (line != "model,alpha,beta,score") throw ParseError("surface.csv", 1, "unexpected header");
      return;
    }
    if (line.empty()) return;
    std::vector<std::string_view> f;
    std::size_t pos = 0;
    while (true) {
      const auto c = line.find(',', pos);
      f.push_back(line.substr(pos, c == std::string_view::npos ? c : c - pos));
      if (c == std::string_view::npos) break;
      pos = c + 1;
    }
    if (f.size() != 4) throw ParseError("surface.csv", line_no, "expected 4 fields");
    points.push_back({std::string(f[0]), parse_double(f[1]), parse_double(f[2]), parse_double(f[3])});
  });
  return points;
}

std::string rankings_json(const SweepResult& result) {
  nlohmann::ordered_json doc;
  doc["models"] = result.models;
  if (!result.cells.empty()) {
    const auto& base = result.cells[result.base_cell];
    doc["base"] = {{"alpha", base.alpha}, {"beta", base.beta}};
  }
  auto cells = nlohmann::ordered_json::array();
  for (const auto& cell : result.cells) {
    nlohmann::ordered_json c;
    c["alpha"] = cell.alpha;
    c["beta"] = cell.beta;
    auto ranking = nlohmann::ordered_json::array();
    auto ties = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < cell.order.size(); ++i) {
      const auto m = cell.order[i];
      ranking.push_back({{"model", result.models[m]},
                         {"score", cell.scores[m]},
                         {"tied_with_next", static_cast<bool>(cell.tied_with_next[i])}});
      if (cell.tied_with_next[i]) ties.push_back({result.models[m], result.models[cell.order[i + 1]]});
    }
    c["ranking"] = std::move(ranking);
    c["ties"] = std::move(ties);
    cells.push_back(std::move(c));
  }
  doc["cells"] = std::move(cells);
  return doc.dump(2) + "\n";
}

std::string flips_json(const SweepResult& result) {
  nlohmann::ordered_json doc;
  if (!result.cells.empty()) {
    const auto& base = result.cells[result.base_cell];
    doc["base"] = {{"alpha", base.alpha}, {"beta", base.beta}};
  }
  auto flips = nlohmann::ordered_json::array();
  for (const auto& f : result.flips) {
    flips.push_back({{"alpha", f.alpha},
                     {"beta", f.beta},
                     {"first", f.first},
                     {"second", f.second},
                     {"order_at_base", to_string(f.at_base)},
                     {"order_at_cell", to_string(f.at_cell)}});
  }
  doc["count"] = result.flips.size();
  doc["flips"] = std::move(flips);
  return doc.dump(2) + "\n";
}

void write_histogram_csv(std::ostream& out, const std::map<std::string, RankHistogram, std::less<>>& histograms) {
  out << "model,lo,hi,count\n";
  for (const auto& [model, h] : histograms) {
    for (std::size_t i = 0; i < h.edges.size(); ++i) {
      out << model << ',' << h.edges[i] << ',';
      if (i + 1 < h.edges.size()) out << h.edges[i + 1];
      out << ',' << h.counts[i] << '\n';
    }
  }
}

}  // namespace probe
