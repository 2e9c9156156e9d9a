#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "manifest.hpp"
#include "probe/errors.hpp"
#include "probe/kg_data.hpp"
#include "probe/metrics.hpp"
#include "probe/ranking.hpp"
#include "probe/score_file.hpp"
#include "probe/sweep.hpp"
#include "probe/synthetic.hpp"

namespace probe::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

const std::string kVersion = PROBE_VERSION;

unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// ---------------------------------------------------------------------------
// Shared option groups

struct DatasetArgs {
  std::string dir;
  std::string train = "train.txt";
  std::string valid = "valid.txt";
  std::string test = "test.txt";
  std::uint64_t entities = 0;

  bool present() const { return !dir.empty(); }
  DatasetFiles files() const { return {train, valid, test}; }

  std::vector<fs::path> paths() const {
    std::vector<fs::path> out;
    for (const auto& f : {train, valid, test}) {
      const fs::path p(f);
      out.push_back(p.is_absolute() ? p : fs::path(dir) / p);
    }
    return out;
  }
};

void add_dataset_options(CLI::App* sub, DatasetArgs& a, bool required, bool allow_entities) {
  auto* opt = sub->add_option("--dataset", a.dir, "Directory with train.txt, valid.txt, test.txt");
  if (required) opt->required();
  sub->add_option("--train", a.train, "Training split file name")->capture_default_str();
  sub->add_option("--valid", a.valid, "Validation split file name")->capture_default_str();
  sub->add_option("--test", a.test, "Test split file name")->capture_default_str();
  if (allow_entities) {
    sub->add_option("--entities", a.entities,
                    "Entity count |E| when no --dataset is given (rank files then carry popularity)");
  }
}

struct MetricArgs {
  double alpha = 1.0;
  double beta = 0.0;
  double epsilon = 1.0;
  bool no_affine = false;
  std::string tie = "average";
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> hits{std::begin(kDefaultHits), std::end(kDefaultHits)};
  std::string strata = "auto";
};

void add_metric_options(CLI::App* sub, MetricArgs& m, bool with_point) {
  if (with_point) {
    sub->add_option("--alpha", m.alpha, "Sharpness factor")->capture_default_str();
    sub->add_option("--beta", m.beta, "Popularity-bias robustness factor")->capture_default_str();
  }
  sub->add_option("--epsilon", m.epsilon, "Weight guard added to popularity")->capture_default_str();
  sub->add_flag("--no-affine", m.no_affine, "Use the raw transformer instead of the [0,1]-rescaled one");
}

void add_report_options(CLI::App* sub, MetricArgs& m) {
  sub->add_option("--tie", m.tie, "Tie policy the ranks were produced with (echoed in the report)")
      ->capture_default_str();
  sub->add_option("--hits", m.hits, "Hits@K cut-offs")->delimiter(',');
  sub->add_option("--strata", m.strata, "Popularity strata: auto or ascending edges e0,e1,...")
      ->capture_default_str();
}

std::vector<std::uint64_t> parse_edges(const std::string& text) {
  std::vector<std::uint64_t> edges;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || p != item.data() + item.size()) {
      throw ConfigError("bad edge value '" + item + "' in '" + text + "'");
    }
    edges.push_back(v);
  }
  if (edges.empty()) throw ConfigError("edge list is empty");
  return edges;
}

// ---------------------------------------------------------------------------
// Rank loading

struct Context {
  std::optional<Dataset> dataset;
  Vocabulary entities;  // standalone label space
  Vocabulary relations;
  std::vector<Query> expected;
  std::uint64_t entity_count = 0;
  std::uint64_t delta_max = 0;
};

Context open_context(const DatasetArgs& args, std::ostream& err) {
  Context ctx;
  if (args.present()) {
    ctx.dataset = load_dataset(args.dir, args.files());
    if (ctx.dataset->duplicates_dropped > 0) {
      err << "probe: warning: dropped " << ctx.dataset->duplicates_dropped << " duplicate triple line(s)\n";
    }
    ctx.entity_count = ctx.dataset->graph.entity_count();
    ctx.expected = make_queries(ctx.dataset->graph.test(), ctx.dataset->popularity);
    ctx.delta_max = dataset_stats(ctx.dataset->graph, ctx.dataset->popularity).delta_max;
  } else {
    ctx.entity_count = args.entities;
  }
  return ctx;
}

std::vector<RankRecord> load_records(const fs::path& path, Context& ctx, std::ostream& err) {
  const auto rows = read_rank_file(path);
  if (!ctx.dataset) return resolve_ranks(rows, ctx.entities, ctx.relations);

  ResolveReport report;
  auto records = resolve_ranks(rows, ctx.dataset->graph, ctx.dataset->popularity, &report);
  if (report.unknown_entities > 0) {
    err << "probe: warning: " << path.string() << ": " << report.unknown_entities
        << " record(s) name a gold entity missing from the dataset; popularity 0 used\n";
  }
  check_coverage(records, ctx.expected);
  return records;
}

std::uint64_t records_delta_max(std::span<const RankRecord> records) {
  std::uint64_t m = 0;
  for (const auto& r : records) m = std::max(m, r.query.gold_popularity);
  return m;
}

MetricConfig make_config(const MetricArgs& m, const Context& ctx) {
  MetricConfig c;
  c.alpha = m.alpha;
  c.beta = m.beta;
  c.epsilon = m.epsilon;
  c.affine = !m.no_affine;
  c.entity_count = ctx.entity_count;
  if (c.affine && c.entity_count == 0) {
    throw ConfigError("the affine transformer needs |E|: pass --dataset or --entities");
  }
  c.validate();
  return c;
}

std::vector<std::uint64_t> strata_edges(const MetricArgs& m, const Context& ctx, std::span<const RankRecord> records) {
  if (m.strata == "auto") return default_strata_edges(ctx.dataset ? ctx.delta_max : records_delta_max(records));
  return parse_edges(m.strata);
}

json config_json(const MetricConfig& c) {
  return json{{"alpha", c.alpha},     {"beta", c.beta},     {"epsilon", c.epsilon},
              {"affine", c.affine},   {"entity_count", c.entity_count}};
}

// ---------------------------------------------------------------------------
// Output helpers

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

fs::path manifest_path_for(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// ---------------------------------------------------------------------------
// stats

struct StatsArgs {
  DatasetArgs data;
  std::string format = "json";
  std::string out;
  std::string vocab;
};

int run_stats(const StatsArgs& a, std::ostream& out, std::ostream& err) {
  const auto ds = load_dataset(a.data.dir, a.data.files());
  if (ds.duplicates_dropped > 0) {
    err << "probe: warning: dropped " << ds.duplicates_dropped << " duplicate triple line(s)\n";
  }
  const auto s = dataset_stats(ds.graph, ds.popularity);

  std::string text;
  if (a.format == "text") {
    text = format_stats_text(s);
  } else {
    json doc{{"n_entities", s.n_entities},
             {"n_relations", s.n_relations},
             {"n_triples", s.n_triples},
             {"delta_avg", s.delta_avg},
             {"delta_avg_rounded", s.delta_avg_display()},
             {"delta_avg_defined", s.delta_avg_defined},
             {"delta_max", s.delta_max}};
    text = doc.dump(2) + "\n";
  }

  RunManifest manifest{"stats", json{{"format", a.format}}, a.data.paths()};
  if (a.out.empty()) {
    out << text;
  } else {
    write_text(a.out, text);
    write_manifest(manifest_path_for(a.out), manifest, kVersion);
  }
  if (!a.vocab.empty()) {
    std::ostringstream v;
    write_vocabulary(v, ds.graph.entities());
    write_text(a.vocab, v.str());
    write_manifest(manifest_path_for(a.vocab), manifest, kVersion);
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// rank

struct RankArgs {
  std::string scores;
  DatasetArgs data;
  std::string tie = "average";
  std::optional<std::uint64_t> seed;
  bool raw = false;
  std::string out;
  unsigned threads = default_threads();
};

int run_rank(const RankArgs& a, std::ostream&, std::ostream& err) {
  RankingOptions options;
  options.tie = TiePolicy::parse(a.tie, a.seed);
  options.filtered = !a.raw;
  options.threads = a.threads;

  const auto ds = load_dataset(a.data.dir, a.data.files());
  if (ds.duplicates_dropped > 0) {
    err << "probe: warning: dropped " << ds.duplicates_dropped << " duplicate triple line(s)\n";
  }
  const auto records = rank_score_file(a.scores, ds, options);
  const auto expected = 2 * ds.graph.test().size();
  if (records.size() < expected) {
    err << "probe: warning: score file ranks " << records.size() << " of " << expected << " test queries\n";
  }

  std::ostringstream text;
  write_rank_file(text, records, ds.graph.entities(), ds.graph.relations());
  write_text(a.out, text.str());

  json config{{"tie", a.tie}, {"filtered", !a.raw}};
  if (a.seed) config["seed"] = *a.seed;
  auto inputs = a.data.paths();
  inputs.insert(inputs.begin(), a.scores);
  write_manifest(manifest_path_for(a.out), {"rank", config, inputs}, kVersion);
  return kOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string ranks;
  DatasetArgs data;
  MetricArgs metric;
  std::string format;
  std::string out;
  unsigned threads = default_threads();
};

struct EvalReport {
  std::size_t records = 0;
  double probe = 0.0;
  double mr = 0.0;
  double mrr = 0.0;
  std::vector<std::pair<std::uint64_t, double>> hits;
  std::vector<Stratum> strata;
  std::vector<std::uint64_t> edges;
};

EvalReport evaluate(std::span<const RankRecord> records, const MetricConfig& config, const MetricArgs& m,
                    const Context& ctx, unsigned threads) {
  EvalReport r;
  r.records = records.size();
  r.probe = probe_score(records, config, threads);
  r.mr = mr(records);
  r.mrr = mrr(records);
  for (auto k : m.hits) r.hits.emplace_back(k, hits_at_k(records, k));
  r.edges = strata_edges(m, ctx, records);
  r.strata = stratified_breakdown(records, r.edges, config);
  return r;
}

json strata_json(const std::vector<Stratum>& strata) {
  auto arr = json::array();
  for (const auto& s : strata) {
    arr.push_back({{"lo", s.lo},
                   {"hi", s.hi ? json(*s.hi) : json(nullptr)},
                   {"count", s.count},
                   {"score", optional_number(s.score)}});
  }
  return arr;
}

std::string eval_json(const EvalReport& r, const MetricConfig& config, const MetricArgs& m) {
  json hits = json::object();
  for (const auto& [k, v] : r.hits) hits[std::to_string(k)] = v;
  json cfg = config_json(config);
  cfg["tie"] = m.tie;
  cfg["hits"] = m.hits;
  cfg["strata_edges"] = r.edges;
  json doc{{"probe", r.probe}, {"mr", r.mr},       {"mrr", r.mrr},     {"hits", hits},
           {"strata", strata_json(r.strata)},      {"records", r.records}, {"config", cfg}};
  return doc.dump(2) + "\n";
}

std::string eval_csv(const EvalReport& r) {
  std::ostringstream out;
  out << "metric,lo,hi,count,value\n";
  out << "probe,,," << r.records << ',' << format_exact(r.probe) << '\n';
  out << "mr,,," << r.records << ',' << format_exact(r.mr) << '\n';
  out << "mrr,,," << r.records << ',' << format_exact(r.mrr) << '\n';
  for (const auto& [k, v] : r.hits) out << "hits@" << k << ",,," << r.records << ',' << format_exact(v) << '\n';
  for (const auto& s : r.strata) {
    out << "stratum," << s.lo << ',';
    if (s.hi) out << *s.hi;
    out << ',' << s.count << ',';
    if (s.score) out << format_exact(*s.score);
    out << '\n';
  }
  return out.str();
}

std::string resolve_format(const std::string& format, const std::string& out) {
  if (!format.empty()) {
    if (format != "json" && format != "csv") throw ConfigError("--format must be json or csv");
    return format;
  }
  return fs::path(out).extension() == ".csv" ? "csv" : "json";
}

int run_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  auto ctx = open_context(a.data, err);
  const auto config = make_config(a.metric, ctx);
  TiePolicy::parse(a.metric.tie, a.metric.seed.value_or(0));
  const auto records = load_records(a.ranks, ctx, err);
  if (records.empty()) throw InputError(a.ranks + ": no rank records");

  const auto report = evaluate(records, config, a.metric, ctx, a.threads);
  const auto format = resolve_format(a.format, a.out);
  const auto text = format == "csv" ? eval_csv(report) : eval_json(report, config, a.metric);

  if (a.out.empty()) {
    out << text;
    return kOk;
  }
  write_text(a.out, text);
  auto inputs = ctx.dataset ? a.data.paths() : std::vector<fs::path>{};
  inputs.insert(inputs.begin(), a.ranks);
  json cfg = config_json(config);
  cfg["tie"] = a.metric.tie;
  cfg["hits"] = a.metric.hits;
  cfg["strata"] = a.metric.strata;
  cfg["format"] = format;
  cfg["threads"] = a.threads;
  write_manifest(manifest_path_for(a.out), {"eval", cfg, inputs}, kVersion);
  return kOk;
}

// ---------------------------------------------------------------------------
// sweep / compare

std::map<std::string, fs::path> parse_model_files(const std::vector<std::string>& specs) {
  std::map<std::string, fs::path> models;
  for (const auto& spec : specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw ConfigError("--ranks expects name=file, got '" + spec + "'");
    }
    const auto name = spec.substr(0, eq);
    if (name.find_first_of(",\"\n\t") != std::string::npos) {
      throw ConfigError("model name '" + name + "' must not contain commas, quotes or whitespace");
    }
    if (!models.emplace(name, spec.substr(eq + 1)).second) throw ConfigError("model '" + name + "' given twice");
  }
  return models;
}

struct SweepArgs {
  std::vector<std::string> ranks;
  DatasetArgs data;
  MetricArgs metric;
  std::vector<double> alphas{0.25, 0.5, 1.0, 2.0};
  std::vector<double> betas{0.0, 0.2, 0.4, 0.8};
  std::vector<double> base{1.0, 0.0};
  std::vector<std::uint64_t> bins{std::begin(kDefaultRankBins), std::end(kDefaultRankBins)};
  std::string out;
  unsigned threads = default_threads();
};

int run_sweep_cmd(const SweepArgs& a, std::ostream&, std::ostream& err) {
  if (a.base.size() != 2) throw ConfigError("--base expects alpha,beta");
  const auto files = parse_model_files(a.ranks);
  auto ctx = open_context(a.data, err);
  MetricArgs point = a.metric;
  point.alpha = a.base[0];
  point.beta = a.base[1];
  const auto base = make_config(point, ctx);

  SweepGrid grid{a.alphas, a.betas, a.base[0], a.base[1]};
  grid.validate();

  ModelRanks models;
  for (const auto& [name, path] : files) models.emplace(name, load_records(path, ctx, err));
  const auto result = run_sweep(models, grid, base, a.threads);

  std::map<std::string, RankHistogram, std::less<>> histograms;
  for (const auto& [name, records] : models) histograms.emplace(name, rank_histogram(records, a.bins));

  const fs::path dir(a.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  std::ostringstream surface;
  write_surface_csv(surface, result);
  write_text(dir / "surface.csv", surface.str());
  write_text(dir / "rankings.json", rankings_json(result));
  write_text(dir / "flips.json", flips_json(result));
  std::ostringstream hist;
  write_histogram_csv(hist, histograms);
  write_text(dir / "histogram.csv", hist.str());

  json cfg = config_json(base);
  cfg["alphas"] = a.alphas;
  cfg["betas"] = a.betas;
  cfg["base"] = a.base;
  cfg["bins"] = a.bins;
  cfg["threads"] = a.threads;
  json model_files = json::object();
  std::vector<fs::path> inputs;
  for (const auto& [name, path] : files) {
    model_files[name] = path.string();
    inputs.push_back(path);
  }
  cfg["models"] = model_files;
  if (ctx.dataset) {
    for (auto& p : a.data.paths()) inputs.push_back(p);
  }
  write_manifest(dir / "manifest.json", {"sweep", cfg, inputs}, kVersion);
  err << "probe: sweep: " << result.models.size() << " model(s), " << result.cells.size() << " cell(s), "
      << result.flips.size() << " flip(s)\n";
  return kOk;
}

struct CompareArgs {
  std::vector<std::string> ranks;
  DatasetArgs data;
  MetricArgs metric;
  unsigned threads = default_threads();
};

int run_compare(const CompareArgs& a, std::ostream& out, std::ostream& err) {
  const auto files = parse_model_files(a.ranks);
  if (files.size() != 2) throw ConfigError("compare needs exactly two models");
  auto ctx = open_context(a.data, err);
  const auto config = make_config(a.metric, ctx);

  std::vector<std::string> names;
  std::vector<std::vector<RankRecord>> sets;
  for (const auto& [name, path] : files) {
    names.push_back(name);
    sets.push_back(load_records(path, ctx, err));
  }
  check_same_queries(names[0], sets[0], names[1], sets[1]);

  // Shared strata edges so rows line up.
  MetricArgs m = a.metric;
  if (m.strata == "auto" && !ctx.dataset) {
    m.strata.clear();
    const auto edges = default_strata_edges(std::max(records_delta_max(sets[0]), records_delta_max(sets[1])));
    for (std::size_t i = 0; i < edges.size(); ++i) m.strata += (i ? "," : "") + std::to_string(edges[i]);
  }
  const auto ra = evaluate(sets[0], config, m, ctx, a.threads);
  const auto rb = evaluate(sets[1], config, m, ctx, a.threads);

  const int w = static_cast<int>(std::max<std::size_t>({14, names[0].size() + 2, names[1].size() + 2}));
  auto row = [&](const std::string& label, const std::string& x, const std::string& y) {
    out << std::left << std::setw(20) << label << std::right << std::setw(w) << x << std::setw(w) << y << '\n';
  };
  auto fmt = [](double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(6) << v;
    return s.str();
  };
  out << "alpha=" << format_shortest(config.alpha) << " beta=" << format_shortest(config.beta)
      << " epsilon=" << format_shortest(config.epsilon) << " affine=" << (config.affine ? "on" : "off")
      << " |E|=" << config.entity_count << '\n';
  row("metric", names[0], names[1]);
  row("probe", fmt(ra.probe), fmt(rb.probe));
  row("mr", fmt(ra.mr), fmt(rb.mr));
  row("mrr", fmt(ra.mrr), fmt(rb.mrr));
  for (std::size_t i = 0; i < ra.hits.size(); ++i) {
    row("hits@" + std::to_string(ra.hits[i].first), fmt(ra.hits[i].second), fmt(rb.hits[i].second));
  }
  for (std::size_t i = 0; i < ra.strata.size(); ++i) {
    const auto& s = ra.strata[i];
    const std::string label = "pop [" + std::to_string(s.lo) + "," + (s.hi ? std::to_string(*s.hi) : "inf") + ")";
    auto cell = [&](const Stratum& x) {
      return x.score ? fmt(*x.score) + " (" + std::to_string(x.count) + ")" : std::string("- (0)");
    };
    row(label, cell(s), cell(rb.strata[i]));
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string profile;
  std::optional<std::size_t> n;
  std::uint64_t seed = 0;
  std::string out;
};

int run_synth(const SynthArgs& a, std::ostream&, std::ostream&) {
  const auto profile = synthetic::load_profile(a.profile);
  std::size_t n = 0;
  if (a.n) {
    n = *a.n;
  } else if (const auto* e = std::get_if<synthetic::ExplicitRanks>(&profile.spec)) {
    n = e->ranks.size();
  } else {
    throw ConfigError("--n is required for mixture profiles");
  }
  const auto records = synthetic::generate(profile, n, a.seed);
  std::ostringstream text;
  synthetic::write_ranks(text, records);
  write_text(a.out, text.str());
  write_manifest(manifest_path_for(a.out), {"synth", json{{"n", n}, {"seed", a.seed}}, {a.profile}}, kVersion);
  return kOk;
}

}  // namespace

int dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rank-based evaluation toolkit for knowledge graph completion", "probe"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);
  app.fallthrough(false);

  StatsArgs stats;
  auto* stats_cmd = app.add_subcommand("stats", "Dataset statistics over the training split");
  add_dataset_options(stats_cmd, stats.data, true, false);
  stats_cmd->add_option("--format", stats.format, "json or text")
      ->check(CLI::IsMember({"json", "text"}))
      ->capture_default_str();
  stats_cmd->add_option("--out", stats.out, "Write the report here instead of stdout");
  stats_cmd->add_option("--vocab", stats.vocab, "Also export the entity vocabulary (label<TAB>id)");

  RankArgs rank;
  auto* rank_cmd = app.add_subcommand("rank", "Filtered ranks of gold entities from a JSON-lines score file");
  rank_cmd->add_option("--scores", rank.scores, "JSON-lines score file")->required();
  add_dataset_options(rank_cmd, rank.data, true, false);
  rank_cmd->add_option("--tie", rank.tie, "optimistic, pessimistic, average or random")->capture_default_str();
  rank_cmd->add_option("--seed", rank.seed, "Seed for the random tie policy");
  rank_cmd->add_flag("--raw", rank.raw, "Do not filter other known-true candidates");
  rank_cmd->add_option("--out", rank.out, "Output rank file")->required();
  rank_cmd->add_option("--threads", rank.threads, "Worker cap")->check(CLI::PositiveNumber);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score one rank file");
  eval_cmd->add_option("--ranks", eval.ranks, "Rank file")->required();
  add_dataset_options(eval_cmd, eval.data, false, true);
  add_metric_options(eval_cmd, eval.metric, true);
  add_report_options(eval_cmd, eval.metric);
  eval_cmd->add_option("--seed", eval.metric.seed, "Seed the ranks were produced with (echo only)");
  eval_cmd->add_option("--format", eval.format, "json or csv (default: from --out extension, else json)");
  eval_cmd->add_option("--out", eval.out, "Output file (default stdout)");
  eval_cmd->add_option("--threads", eval.threads, "Worker cap")->check(CLI::PositiveNumber);

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate models over an (alpha, beta) grid");
  sweep_cmd->add_option("--ranks", sweep.ranks, "name=rankfile per model")->required()->expected(1, -1);
  add_dataset_options(sweep_cmd, sweep.data, false, true);
  add_metric_options(sweep_cmd, sweep.metric, false);
  sweep_cmd->add_option("--alphas", sweep.alphas, "Ascending alphas")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--betas", sweep.betas, "Ascending betas")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--base", sweep.base, "Reference cell alpha,beta")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--bins", sweep.bins, "Rank histogram edges")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--out", sweep.out, "Output directory")->required();
  sweep_cmd->add_option("--threads", sweep.threads, "Worker cap")->check(CLI::PositiveNumber);

  CompareArgs compare;
  auto* compare_cmd = app.add_subcommand("compare", "Side-by-side metrics for two models at one cell");
  compare_cmd->add_option("--ranks", compare.ranks, "name=rankfile for both models")->required()->expected(2);
  add_dataset_options(compare_cmd, compare.data, false, true);
  add_metric_options(compare_cmd, compare.metric, true);
  add_report_options(compare_cmd, compare.metric);
  compare_cmd->add_option("--threads", compare.threads, "Worker cap")->check(CLI::PositiveNumber);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic rank file from a profile");
  synth_cmd->add_option("--profile", synth.profile, "Profile JSON")->required();
  synth_cmd->add_option("--n", synth.n, "Record count (defaults to the explicit rank list length)");
  synth_cmd->add_option("--seed", synth.seed, "Generator seed")->required();
  synth_cmd->add_option("--out", synth.out, "Output rank file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "probe: error[usage]: " << e.what() << '\n';
    const CLI::App* active = &app;
    for (auto* sub : app.get_subcommands()) active = sub;
    err << active->help();
    return kInvalid;
  }

  try {
    if (stats_cmd->parsed()) return run_stats(stats, out, err);
    if (rank_cmd->parsed()) return run_rank(rank, out, err);
    if (eval_cmd->parsed()) return run_eval(eval, out, err);
    if (sweep_cmd->parsed()) return run_sweep_cmd(sweep, out, err);
    if (compare_cmd->parsed()) return run_compare(compare, out, err);
    if (synth_cmd->parsed()) return run_synth(synth, out, err);
  } catch (const IoError& e) {
    err << "probe: error[io]: " << e.what() << '\n';
    return kIoFailure;
  } catch (const ParseError& e) {
    err << "probe: error[parse]: " << e.what() << '\n';
    return kInvalid;
  } catch (const InputError& e) {
    err << "probe: error[validation]: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    err << "probe: error[internal]: " << e.what() << '\n';
    return kInvalid;
  }
  err << "probe: error[usage]: no subcommand\n" << app.help();
  return kInvalid;
}

}  // namespace probe::cli
