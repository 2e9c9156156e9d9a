#include "probe/synthetic.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include <json.hpp>

#include "probe/errors.hpp"
#include "probe/random.hpp"
#include "text_util.hpp"

namespace probe::synthetic {

namespace {

// Mass of the untruncated geometric tail over [tail_min, n].
double tail_mass(const Mixture& m) {
  const double span = static_cast<double>(m.n_entities - m.tail_min + 1);
  return -std::expm1(span * std::log1p(-m.tail));
}

}  // namespace

double Mixture::probability(std::uint64_t rank) const {
  if (rank == 1) return p1;
  if (rank < tail_min || rank > n_entities) return 0.0;
  if (tail >= 1.0) return rank == tail_min ? 1.0 - p1 : 0.0;
  const double k = static_cast<double>(rank - tail_min);
  return (1.0 - p1) * tail * std::exp(k * std::log1p(-tail)) / tail_mass(*this);
}

void RankProfile::validate() const {
  if (const auto* e = std::get_if<ExplicitRanks>(&spec)) {
    if (e->ranks.empty()) throw ConfigError("explicit profile has no ranks");
    for (auto r : e->ranks) {
      if (r < 1) throw ConfigError("explicit profile contains a rank < 1");
    }
    if (!e->popularities.empty() && e->popularities.size() != e->ranks.size()) {
      throw ConfigError("explicit profile: popularities and ranks differ in length");
    }
  } else {
    const auto& m = std::get<Mixture>(spec);
    if (!(m.p1 >= 0.0 && m.p1 <= 1.0)) throw ConfigError("p1 must lie in [0, 1]");
    if (!(m.tail > 0.0 && m.tail <= 1.0)) throw ConfigError("tail must lie in (0, 1]");
    if (m.tail_min < 2) throw ConfigError("tail_min must be >= 2");
    if (m.n_entities < 1) throw ConfigError("entities must be >= 1");
    if (m.p1 < 1.0 && m.tail_min > m.n_entities) throw ConfigError("tail_min exceeds the entity count");
  }
  for (const auto& r : popularity) {
    if (r.rank_hi && *r.rank_hi < r.rank_lo) throw ConfigError("popularity rule has an empty rank range");
    if (r.popularity_hi < r.popularity_lo) throw ConfigError("popularity rule has an empty value range");
  }
}

RankProfile parse_profile(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid profile JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("profile must be a JSON object");

  RankProfile profile;
  try {
    if (doc.contains("ranks")) {
      ExplicitRanks e;
      e.ranks = doc.at("ranks").get<std::vector<std::uint64_t>>();
      if (doc.contains("popularities")) e.popularities = doc.at("popularities").get<std::vector<std::uint64_t>>();
      profile.spec = std::move(e);
    } else {
      Mixture m;
      m.p1 = doc.at("p1").get<double>();
      m.tail = doc.value("tail", 1.0);
      m.tail_min = doc.value("tail_min", std::uint64_t{2});
      m.n_entities = doc.at("entities").get<std::uint64_t>();
      profile.spec = m;
    }
    if (doc.contains("popularity")) {
      for (const auto& item : doc.at("popularity")) {
        PopularityRule rule;
        const auto& ranks = item.at("ranks");
        rule.rank_lo = ranks.at(0).get<std::uint64_t>();
        if (!ranks.at(1).is_null()) rule.rank_hi = ranks.at(1).get<std::uint64_t>();
        if (item.contains("value")) {
          rule.popularity_lo = rule.popularity_hi = item.at("value").get<std::uint64_t>();
        } else {
          rule.popularity_lo = item.at("range").at(0).get<std::uint64_t>();
          rule.popularity_hi = item.at("range").at(1).get<std::uint64_t>();
        }
        profile.popularity.push_back(rule);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed profile: ") + e.what());
  }
  profile.validate();
  return profile;
}

RankProfile load_profile(const std::filesystem::path& path) { return parse_profile(detail::read_file(path)); }

std::vector<RankRecord> generate(const RankProfile& profile, std::size_t n, std::uint64_t seed) {
  profile.validate();
  if (n < 1) throw ConfigError("record count must be >= 1");
  Rng rng(seed);

  std::vector<std::uint64_t> ranks;
  const std::vector<std::uint64_t>* fixed_popularity = nullptr;
  if (const auto* e = std::get_if<ExplicitRanks>(&profile.spec)) {
    if (n != e->ranks.size()) {
      throw ConfigError("explicit profile holds " + std::to_string(e->ranks.size()) + " ranks, asked for " +
                        std::to_string(n));
    }
    ranks = e->ranks;
    if (!e->popularities.empty()) fixed_popularity = &e->popularities;
  } else {
    const auto& m = std::get<Mixture>(profile.spec);
    const double log_keep = std::log1p(-m.tail);
    const double mass = m.tail < 1.0 ? tail_mass(m) : 1.0;
    ranks.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.uniform01() < m.p1) {
        ranks.push_back(1);
        continue;
      }
      std::uint64_t r = m.tail_min;
      if (m.tail < 1.0) {
        // Inverse CDF of the truncated geometric.
        const double u = rng.uniform01() * mass;
        const double k = std::floor(std::log1p(-u) / log_keep);
        r = m.tail_min + static_cast<std::uint64_t>(std::max(0.0, k));
        r = std::min(r, m.n_entities);
      }
      ranks.push_back(r);
    }
  }

  std::vector<RankRecord> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& rec = out[i];
    const auto id = static_cast<EntityId>(i);
    rec.query.triple = {2 * id, 0, 2 * id + 1};
    rec.query.direction = Direction::Tail;
    rec.query.gold = 2 * id + 1;
    rec.rank = ranks[i];
    if (fixed_popularity) {
      rec.query.gold_popularity = (*fixed_popularity)[i];
      continue;
    }
    for (const auto& rule : profile.popularity) {
      if (rule.matches(rec.rank)) {
        rec.query.gold_popularity = rule.popularity_lo == rule.popularity_hi
                                        ? rule.popularity_lo
                                        : rng.between(rule.popularity_lo, rule.popularity_hi);
        break;
      }
    }
  }
  return out;
}

void write_ranks(std::ostream& out, std::span<const RankRecord> records) {
  for (const auto& r : records) {
    const auto& t = r.query.triple;
    out << 'e' << t.head << "\tr" << t.relation << "\te" << t.tail << '\t' << to_string(r.query.direction) << '\t'
        << r.rank << '\t' << r.query.gold_popularity << '\n';
  }
}

double oracle_probe(std::span<const RankRecord> records, const MetricConfig& config) {
  if (records.empty()) throw InputError("oracle: empty record set");
  if (!(config.epsilon > 0.0)) throw ConfigError("oracle: epsilon must be > 0");
  if (config.beta < 0.0) throw ConfigError("oracle: beta must be >= 0");
  if (config.affine && !(config.alpha > 0.0)) throw DomainError("oracle: affine mode needs alpha > 0");
  if (config.affine && config.entity_count < 2) throw ConfigError("oracle: affine mode needs |E| >= 2");

  // Naive loop in extended precision. The affine map is written as
  // (c - n^-a) / (1 - n^-a); the (c - 1) / span + 1 form cancels to noise
  // once the transformed value drops below ~1e-8.
  using real = long double;
  const real n = static_cast<real>(config.entity_count);
  const real alpha = config.alpha;
  const real beta = config.beta;
  real weighted = 0.0L;
  real total_weight = 0.0L;
  for (const auto& rec : records) {
    if (rec.rank < 1) throw DomainError("oracle: rank < 1");
    if (config.affine && rec.rank > config.entity_count) throw DomainError("oracle: rank > |E|");
    const real r = static_cast<real>(rec.rank);
    real c = 1.0L / std::pow(r, alpha);
    if (config.affine) {
      const real floor = 1.0L / std::pow(n, alpha);
      c = (c - floor) / (1.0L - floor);
    }
    const real w = 1.0L / std::pow(static_cast<real>(config.epsilon) + static_cast<real>(rec.query.gold_popularity), beta);
    weighted += w * c;
    total_weight += w;
  }
  return static_cast<double>(weighted / total_weight);
}

}  // namespace probe::synthetic
