// Acceptance gate: one PASS/FAIL line per criterion.
//
//   probe_acceptance [--only N] [--data-root DIR]
//
// Exit status is 0 only when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "../../tools/cli.hpp"
#include "probe/kg_data.hpp"
#include "probe/metrics.hpp"
#include "probe/ranking.hpp"
#include "probe/sweep.hpp"
#include "probe/synthetic.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace probe;
using probe::testing::brute_force_rank;
using probe::testing::random_records;
using probe::testing::random_scores;
using probe::testing::read_all;
using probe::testing::rel_close;
using probe::testing::TempDir;
using probe::testing::write_file;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::dispatch(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

MetricConfig raw_config(double alpha, double beta) {
  MetricConfig c;
  c.alpha = alpha;
  c.beta = beta;
  c.affine = false;
  return c;
}

MetricConfig affine_config(double alpha, double beta, std::uint64_t n) {
  MetricConfig c;
  c.alpha = alpha;
  c.beta = beta;
  c.entity_count = n;
  return c;
}

// ---------------------------------------------------------------------------
// 1. Dataset statistics

struct Expected {
  const char* name;
  std::vector<const char*> dirs;
  std::size_t n_entities, n_relations, n_triples;
  double delta_avg;
  std::uint64_t delta_max;
};

Outcome c1(const fs::path& root) {
  const Expected sets[] = {
      {"FB15k237", {"FB15k237", "FB15k-237", "fb15k237", "fb15k-237"}, 14541, 237, 272115, 37.5, 7614},
      {"WN18RR", {"WN18RR", "wn18rr"}, 40943, 11, 86835, 4.3, 482},
  };
  Outcome o{true, ""};
  for (const auto& e : sets) {
    std::optional<fs::path> dir;
    for (const char* d : e.dirs) {
      if (fs::exists(root / d / "train.txt")) {
        dir = root / d;
        break;
      }
    }
    if (!o.detail.empty()) o.detail += "; ";
    if (!dir) {
      o.pass = false;
      o.detail += std::string(e.name) + ": splits not found under " + root.string();
      continue;
    }
    const auto t0 = Clock::now();
    const auto r = cli({"stats", "--dataset", dir->string()});
    const double secs = seconds_since(t0);
    if (r.code != 0) {
      o.pass = false;
      o.detail += std::string(e.name) + ": stats failed: " + r.err;
      continue;
    }
    const auto j = json::parse(r.out);
    const bool ok = j["n_entities"] == e.n_entities && j["n_relations"] == e.n_relations &&
                    j["n_triples"] == e.n_triples && j["delta_max"] == e.delta_max &&
                    std::abs(j["delta_avg"].get<double>() - e.delta_avg) <= 0.05 && secs < 5.0;
    o.pass = o.pass && ok;
    o.detail += std::string(e.name) + " " + std::to_string(j["n_entities"].get<std::size_t>()) + "/" +
                std::to_string(j["n_relations"].get<std::size_t>()) + "/" +
                std::to_string(j["n_triples"].get<std::size_t>()) + " delta_avg=" +
                fmt("%.4f", j["delta_avg"].get<double>()) +
                " delta_max=" + std::to_string(j["delta_max"].get<std::uint64_t>()) + " in " + fmt("%.2fs", secs);
  }
  return o;
}

// ---------------------------------------------------------------------------
// 2. Fixed optimum and pessimum

Outcome c2(const fs::path&) {
  double worst = 0.0;
  bool optimum = true;
  for (double a : {0.1, 0.25, 0.5, 1.0, 2.0, 4.0}) {
    for (std::uint64_t n : {2ull, 10ull, 14541ull, 40943ull}) {
      optimum = optimum && rt_affine(1, a, n) == 1.0;
      worst = std::max(worst, std::abs(rt_affine(n, a, n)));
    }
  }
  return {optimum && worst <= 1e-12,
          std::string("rt_affine(1) == 1 ") + (optimum ? "everywhere" : "NOT everywhere") +
              ", max |rt_affine(|E|)| = " + fmt("%.3g", worst)};
}

// ---------------------------------------------------------------------------
// 3. MRR reduction

Outcome c3(const fs::path&) {
  Rng rng(3001);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto recs = random_records(rng, 1 + rng.below(10000), 40943, 0);
    long double sum = 0.0L;
    for (const auto& r : recs) sum += 1.0L / static_cast<long double>(r.rank);
    const double want = static_cast<double>(sum / static_cast<long double>(recs.size()));
    const double got = probe_score(recs, raw_config(1.0, 0.0));
    worst = std::max(worst, std::abs(got - want) / want);
  }
  return {worst <= 1e-12, "1000 sets, max relative gap " + fmt("%.3g", worst)};
}

// ---------------------------------------------------------------------------
// 4. Affine linearity and order preservation

Outcome c4(const fs::path&) {
  Rng rng(4001);
  const auto grid = SweepGrid::standard();
  double worst = 0.0;
  std::size_t order_mismatch = 0;
  std::size_t comparisons = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::uint64_t n = trial % 2 ? 14541 : 2 + rng.below(40942);
    const std::size_t size = 200 + rng.below(2000);
    std::vector<std::vector<RankRecord>> models;
    for (int m = 0; m < 4; ++m) models.push_back(random_records(rng, size, 1 + rng.below(n), 7614));
    for (double a : grid.alphas) {
      for (double b : grid.betas) {
        // a = 1 / (1 - |E|^-alpha), b = 1 - a, in extended precision so the
        // reference itself does not cancel when |E|^-alpha is tiny.
        const long double slope = 1.0L / (1.0L - std::pow(static_cast<long double>(n), -static_cast<long double>(a)));
        std::vector<double> raw, aff;
        for (const auto& m : models) {
          raw.push_back(probe_score(m, raw_config(a, b)));
          aff.push_back(probe_score(m, affine_config(a, b, n)));
          const auto predicted = static_cast<double>(slope * raw.back() + (1.0L - slope));
          worst = std::max(worst, std::abs(aff.back() - predicted) / std::max(std::abs(predicted), 1e-300));
        }
        for (std::size_t i = 0; i < models.size(); ++i) {
          for (std::size_t j = i + 1; j < models.size(); ++j) {
            ++comparisons;
            order_mismatch += (raw[i] < raw[j]) != (aff[i] < aff[j]) || (raw[i] == raw[j]) != (aff[i] == aff[j]);
          }
        }
      }
    }
  }
  return {worst <= 1e-10 && order_mismatch == 0,
          "max relative gap " + fmt("%.3g", worst) + ", " + std::to_string(order_mismatch) + "/" +
              std::to_string(comparisons) + " pair orders differ"};
}

// ---------------------------------------------------------------------------
// 5. Oracle equivalence

Outcome c5(const fs::path&) {
  Rng rng(5001);
  double worst = 0.0;
  int affine_cases = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::uint64_t n = 2 + rng.below(40942);
    const auto recs = random_records(rng, 1 + rng.below(2000), n, 7614);
    MetricConfig cfg;
    cfg.alpha = 4.0 * (1.0 - rng.uniform01());  // (0, 4]
    cfg.beta = 2.0 * rng.uniform01();
    cfg.epsilon = trial % 2 ? 1.0 : 1e-6;
    cfg.affine = (trial / 2) % 2 == 0;
    cfg.entity_count = n;
    affine_cases += cfg.affine;
    const double a = probe_score(recs, cfg);
    const double b = synthetic::oracle_probe(recs, cfg);
    worst = std::max(worst, std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}));
  }
  return {worst <= 1e-10,
          "1000 cases (" + std::to_string(affine_cases) + " affine), max relative gap " + fmt("%.3g", worst)};
}

// ---------------------------------------------------------------------------
// 6. Rank computation

Outcome c6(const fs::path&) {
  Rng rng(6001);
  std::size_t mismatches = 0;
  std::size_t order_violations = 0;
  std::size_t filter_violations = 0;
  std::size_t tied_rows = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = 1 + rng.below(1000);
    const auto scores = random_scores(rng, n);
    const auto gold = static_cast<EntityId>(rng.below(n));
    std::vector<EntityId> filter;
    const auto density = 1 + rng.below(6);
    for (EntityId e = 0; e < n; ++e) {
      if (e != gold && rng.below(density) == 0) filter.push_back(e);
    }
    const std::uint64_t seed = 17;
    const auto want = brute_force_rank(scores, gold, filter, seed, static_cast<std::uint64_t>(trial));
    const auto opt = rank_of_gold(scores, gold, filter, TiePolicy::optimistic());
    const auto pes = rank_of_gold(scores, gold, filter, TiePolicy::pessimistic());
    const auto avg = rank_of_gold(scores, gold, filter, TiePolicy::average());
    const auto rnd = rank_of_gold(scores, gold, filter, TiePolicy::random(seed), static_cast<std::uint64_t>(trial));
    tied_rows += want.optimistic != want.pessimistic;
    mismatches += (opt != want.optimistic) + (pes != want.pessimistic) + (avg != want.average) + (rnd != want.random);
    order_violations += !(opt <= avg && avg <= pes);
    for (const auto& tie : {TiePolicy::optimistic(), TiePolicy::pessimistic(), TiePolicy::average()}) {
      filter_violations += rank_of_gold(scores, gold, filter, tie) > rank_of_gold(scores, gold, {}, tie);
    }
  }
  return {mismatches == 0 && order_violations == 0 && filter_violations == 0,
          "500 rows (" + std::to_string(tied_rows) + " with ties): " + std::to_string(mismatches) +
              " oracle mismatches, " + std::to_string(filter_violations) + " filtered>raw, " +
              std::to_string(order_violations) + " tie-order violations"};
}

// ---------------------------------------------------------------------------
// 7. Ranking flips

std::string rank_list(std::initializer_list<std::pair<std::size_t, std::uint64_t>> parts) {
  json ranks = json::array();
  for (const auto& [count, rank] : parts) {
    for (std::size_t i = 0; i < count; ++i) ranks.push_back(rank);
  }
  return ranks.dump();
}

std::string popularity_list(std::initializer_list<std::pair<std::size_t, std::uint64_t>> parts) {
  return rank_list(parts);
}

bool has_flip(const json& flips, double alpha, double beta, const std::string& first, const std::string& second) {
  for (const auto& f : flips["flips"]) {
    if (f["alpha"] == alpha && f["beta"] == beta && f["first"] == first && f["second"] == second) return true;
  }
  return false;
}

Outcome c7(const fs::path&) {
  TempDir dir;
  Outcome o{true, ""};
  auto synth = [&](const std::string& name, const std::string& profile) {
    write_file(dir / (name + ".json"), profile);
    const auto r = cli({"synth", "--profile", (dir / (name + ".json")).string(), "--seed", "1", "--out",
                        (dir / (name + ".tsv")).string()});
    if (r.code != 0) throw std::runtime_error("synth " + name + ": " + r.err);
  };

  // Sharp: 60% rank 1, 40% rank 100. Steady: all rank 2. Uniform popularity.
  synth("sharp", R"({"ranks": )" + rank_list({{600, 1}, {400, 100}}) + "}");
  synth("steady", R"({"ranks": )" + rank_list({{1000, 2}}) + "}");
  auto r = cli({"sweep", "--ranks", "sharp=" + (dir / "sharp.tsv").string(), "steady=" + (dir / "steady.tsv").string(),
                "--entities", "10000", "--out", (dir / "alpha").string()});
  if (r.code != 0) return {false, "sweep failed: " + r.err};

  // Two-point values from a 40-digit evaluation.
  const std::map<double, std::pair<double, double>> closed = {
      {0.25, {0.6961012293408168592, 0.8232182391707939367}},
      {0.5, {0.63636363636363636364, 0.70414826382479547919}},
      {1.0, {0.6039603960396039604, 0.49994999499949994999}},
      {2.0, {0.60003999600039996, 0.249999992499999925}},
  };
  double worst = 0.0;
  std::map<std::pair<double, std::string>, double> surface;
  for (const auto& p : parse_surface_csv(read_all(dir / "alpha/surface.csv"))) {
    if (p.beta == 0.0) surface[{p.alpha, p.model}] = p.score;
  }
  for (const auto& [a, v] : closed) {
    worst = std::max(worst, std::abs(surface[{a, "sharp"}] - v.first) / v.first);
    worst = std::max(worst, std::abs(surface[{a, "steady"}] - v.second) / v.second);
  }
  const bool sharp_wins_2 = surface[{2.0, "sharp"}] > surface[{2.0, "steady"}];
  const bool steady_wins_025 = surface[{0.25, "steady"}] > surface[{0.25, "sharp"}];
  // Sharp leads at the base cell (alpha 1), so the alpha = 0.25 cell must be listed as a flip.
  const auto alpha_flips = json::parse(read_all(dir / "alpha/flips.json"));
  const bool alpha_listed = has_flip(alpha_flips, 0.25, 0.0, "sharp", "steady");

  // Crossover by bisection on the library score; closed form 0.69900352876573018236.
  const auto sharp = synthetic::generate(synthetic::load_profile(dir / "sharp.json"), 1000, 1);
  const auto steady = synthetic::generate(synthetic::load_profile(dir / "steady.json"), 1000, 1);
  double lo = 0.25, hi = 2.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    const auto cfg = affine_config(mid, 0.0, 10000);
    (probe_score(sharp, cfg) < probe_score(steady, cfg) ? lo : hi) = mid;
  }
  const double crossover = 0.5 * (lo + hi);
  const bool crossover_ok = std::abs(crossover - 0.69900352876573018236) <= 1e-9;

  // Popularity placement: same rank-1 count order at beta 0, weights flip it by beta 0.8.
  synth("A", R"({"ranks": )" + rank_list({{550, 1}, {450, 50}}) + R"(, "popularities": )" +
                 popularity_list({{550, 999}, {450, 0}}) + "}");
  synth("B", R"({"ranks": )" + rank_list({{500, 1}, {500, 50}}) + R"(, "popularities": )" +
                 popularity_list({{500, 0}, {500, 999}}) + "}");
  r = cli({"sweep", "--ranks", "A=" + (dir / "A.tsv").string(), "B=" + (dir / "B.tsv").string(), "--entities",
           "10000", "--out", (dir / "beta").string()});
  if (r.code != 0) return {false, "sweep failed: " + r.err};
  std::map<std::pair<double, std::string>, double> beta_surface;
  for (const auto& p : parse_surface_csv(read_all(dir / "beta/surface.csv"))) {
    if (p.alpha == 1.0) beta_surface[{p.beta, p.model}] = p.score;
  }
  const std::map<double, std::pair<double, double>> beta_closed = {
      {0.0, {0.5589558955895589559, 0.509950995099509951}},
      {0.8, {0.024647814297215847266, 0.99611363145637648071}},
  };
  for (const auto& [b, v] : beta_closed) {
    worst = std::max(worst, std::abs(beta_surface[{b, "A"}] - v.first) / v.first);
    worst = std::max(worst, std::abs(beta_surface[{b, "B"}] - v.second) / v.second);
  }
  const bool a_wins_0 = beta_surface[{0.0, "A"}] > beta_surface[{0.0, "B"}];
  const bool b_wins_08 = beta_surface[{0.8, "B"}] > beta_surface[{0.8, "A"}];
  const auto beta_flips = json::parse(read_all(dir / "beta/flips.json"));
  const bool beta_listed = has_flip(beta_flips, 1.0, 0.8, "A", "B");

  o.pass = worst <= 1e-12 && sharp_wins_2 && steady_wins_025 && alpha_listed && crossover_ok && a_wins_0 &&
           b_wins_08 && beta_listed;
  o.detail = std::string("alpha flip: sharp>steady@2 ") + (sharp_wins_2 ? "yes" : "no") + ", steady>sharp@0.25 " +
             (steady_wins_025 ? "yes" : "no") + ", listed " + (alpha_listed ? "yes" : "no") + ", crossover " +
             fmt("%.14f", crossover) + "; beta flip: A>B@0 " + (a_wins_0 ? "yes" : "no") + ", B>A@0.8 " +
             (b_wins_08 ? "yes" : "no") + ", listed " + (beta_listed ? "yes" : "no") +
             "; max gap to closed form " + fmt("%.3g", worst);
  return o;
}

// ---------------------------------------------------------------------------
// 8 and 9 share a generated workload of 40,932-record rank files.

std::vector<fs::path> make_models(const TempDir& dir, int count) {
  const char* profiles[] = {
      R"({"p1": 0.25, "tail": 0.02, "entities": 14541, "popularity": [{"ranks": [1, null], "range": [0, 7614]}]})",
      R"({"p1": 0.35, "tail": 0.08, "entities": 14541, "popularity": [{"ranks": [1, null], "range": [0, 7614]}]})",
      R"({"p1": 0.15, "tail": 0.30, "entities": 14541, "popularity": [{"ranks": [1, 1], "range": [100, 7614]}, {"ranks": [2, null], "range": [0, 200]}]})",
      R"({"p1": 0.30, "tail": 0.01, "entities": 14541, "popularity": [{"ranks": [1, 10], "range": [0, 50]}, {"ranks": [11, null], "range": [0, 7614]}]})",
  };
  std::vector<fs::path> out;
  for (int i = 0; i < count; ++i) {
    const auto profile = dir / ("p" + std::to_string(i) + ".json");
    const auto ranks = dir / ("m" + std::to_string(i) + ".tsv");
    write_file(profile, profiles[i]);
    const auto r = cli({"synth", "--profile", profile.string(), "--n", "40932", "--seed", std::to_string(100 + i),
                        "--out", ranks.string()});
    if (r.code != 0) throw std::runtime_error("synth failed: " + r.err);
    out.push_back(ranks);
  }
  return out;
}

Outcome c8(const fs::path&) {
  TempDir dir;
  const auto models = make_models(dir, 3);
  std::set<std::string> eval_outputs, sweep_outputs;
  for (const char* threads : {"1", "4", "16"}) {
    const auto json_out = dir / (std::string("eval-") + threads + ".json");
    const auto csv_out = dir / (std::string("eval-") + threads + ".csv");
    for (const auto& out : {json_out, csv_out}) {
      const auto r = cli({"eval", "--ranks", models[0].string(), "--entities", "14541", "--alpha", "0.5", "--beta",
                          "0.4", "--threads", threads, "--out", out.string()});
      if (r.code != 0) return {false, "eval failed: " + r.err};
    }
    eval_outputs.insert(read_all(json_out) + read_all(csv_out));

    const auto sweep_dir = dir / (std::string("sweep-") + threads);
    std::vector<std::string> args{"sweep", "--ranks"};
    for (std::size_t i = 0; i < models.size(); ++i) args.push_back("m" + std::to_string(i) + "=" + models[i].string());
    for (const auto& a : {"--entities", "14541", "--threads", threads, "--out"}) args.emplace_back(a);
    args.push_back(sweep_dir.string());
    const auto r = cli(args);
    if (r.code != 0) return {false, "sweep failed: " + r.err};
    std::string all;
    for (const char* f : {"surface.csv", "rankings.json", "flips.json", "histogram.csv"}) {
      all += read_all(sweep_dir / f);
    }
    sweep_outputs.insert(all);
  }
  return {eval_outputs.size() == 1 && sweep_outputs.size() == 1,
          "40932 records, threads 1/4/16: " + std::to_string(eval_outputs.size()) + " distinct eval output(s), " +
              std::to_string(sweep_outputs.size()) + " distinct sweep output(s)"};
}

Outcome c9(const fs::path&) {
  TempDir dir;
  const auto models = make_models(dir, 4);
  std::vector<std::string> args{"sweep", "--ranks"};
  for (std::size_t i = 0; i < models.size(); ++i) args.push_back("m" + std::to_string(i) + "=" + models[i].string());
  args.insert(args.end(), {"--entities", "14541", "--out", (dir / "sweep").string()});
  const auto t0 = Clock::now();
  const auto r = cli(args);
  const double secs = seconds_since(t0);
  if (r.code != 0) return {false, "sweep failed: " + r.err};
  const auto surface = read_all(dir / "sweep/surface.csv");
  const auto rows = std::count(surface.begin(), surface.end(), '\n') - 1;
  return {secs < 10.0 && rows == 64,
          "4 models x 40932 records x 16 cells (" + std::to_string(rows) + " rows) in " + fmt("%.3fs", secs)};
}

// ---------------------------------------------------------------------------
// 10. Histogram and strata conservation

Outcome c10(const fs::path&) {
  Rng rng(10001);
  std::size_t failures = 0;
  const int trials = 2000;
  for (int trial = 0; trial < trials; ++trial) {
    const auto recs = random_records(rng, rng.below(3000), 1 + rng.below(40943), rng.below(10000));
    std::vector<std::uint64_t> bins{1};
    if (trial % 3 == 0) {
      bins.assign(std::begin(kDefaultRankBins), std::end(kDefaultRankBins));
    } else {
      while (rng.below(5) != 0) bins.push_back(bins.back() + 1 + rng.below(5000));
    }
    const auto h = rank_histogram(recs, bins);
    std::uint64_t hist_total = 0;
    for (auto c : h.counts) hist_total += c;

    std::uint64_t dmax = 0;
    for (const auto& r : recs) dmax = std::max(dmax, r.query.gold_popularity);
    std::vector<std::uint64_t> edges = default_strata_edges(dmax);
    if (trial % 2) {
      edges = {0};
      while (rng.below(4) != 0) edges.push_back(edges.back() + 1 + rng.below(3000));
    }
    std::size_t strata_total = 0;
    for (const auto& s : stratified_breakdown(recs, edges, raw_config(1.0, 0.0))) strata_total += s.count;
    failures += hist_total != recs.size() || strata_total != recs.size();
  }
  return {failures == 0, std::to_string(trials) + " fuzzed inputs, " + std::to_string(failures) + " non-conserving"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  int only = 0;
  std::string data_root = "data";
  app.add_option("--only", only, "Run a single criterion (1-10)")->check(CLI::Range(1, 10));
  app.add_option("--data-root", data_root, "Directory holding FB15k237/ and WN18RR/");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<Outcome(const fs::path&)>>> criteria = {
      {"published dataset statistics", c1},
      {"fixed optimum and pessimum", c2},
      {"MRR reduction", c3},
      {"affine linearity and ordering", c4},
      {"oracle equivalence", c5},
      {"rank computation vs brute force", c6},
      {"ranking flips (alpha and beta)", c7},
      {"determinism across thread counts", c8},
      {"4x4 sweep performance", c9},
      {"histogram and strata conservation", c10},
  };

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<std::size_t>(only) != i + 1) continue;
    Outcome o;
    try {
      o = criteria[i].second(data_root);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("%s c%zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
  }
  std::fflush(stdout);
  return all ? 0 : 1;
}
