#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "probe/errors.hpp"
#include "probe/score_file.hpp"
#include "test_support.hpp"

using namespace probe;
using probe::testing::TempDir;
using probe::testing::write_file;

namespace {

// a, b, c, d with one test triple (a r b); train holds (c r b).
Dataset small_dataset(const TempDir& dir) {
  write_file(dir / "train.txt", "c\tr\tb\na\tr\td\n");
  write_file(dir / "valid.txt", "");
  write_file(dir / "test.txt", "a\tr\tb\n");
  return load_dataset(dir.path());
}

std::string score_line(const std::string& h, const std::string& t, const char* dir, std::vector<double> s) {
  nlohmann::json j{{"head", h}, {"relation", "r"}, {"tail", t}, {"direction", dir}, {"scores", s}};
  return j.dump() + "\n";
}

}  // namespace

TEST_SUITE("score_file") {
  TEST_CASE("parse_score_line") {
    const auto s = parse_score_line(R"({"head":"a","relation":"r","tail":"b","direction":"tail","scores":[1,2.5]})",
                                    "f", 1);
    CHECK(s.labels.head == "a");
    CHECK(s.direction == Direction::Tail);
    CHECK(s.scores == std::vector<double>{1.0, 2.5});
    CHECK_THROWS_AS(parse_score_line("{", "f", 4), ParseError);
    CHECK_THROWS_AS(parse_score_line(R"({"head":"a","relation":"r","tail":"b","direction":"tail"})", "f", 1),
                    ParseError);
    CHECK_THROWS_AS(
        parse_score_line(R"({"head":"a","relation":"r","tail":"b","direction":"up","scores":[]})", "f", 1),
        ParseError);
    CHECK_THROWS_AS(
        parse_score_line(R"({"head":"a","relation":"r","tail":"b","direction":"tail","scores":["x"]})", "f", 1),
        ParseError);
  }

  TEST_CASE("ranks a score file with filtering") {
    TempDir dir;
    const auto ds = small_dataset(dir);
    // Ids: c=0 r b=1 a=2 d=3.
    const auto& E = ds.graph.entities();
    REQUIRE(*E.find("c") == 0);
    REQUIRE(*E.find("a") == 2);
    std::string text;
    // Head query (?, r, b), gold a=2; c=0 is a known head of (r, b) and is filtered.
    text += score_line("a", "b", "head", {0.9, 0.0, 0.5, 0.7});
    // Tail query (a, r, ?), gold b=1; d=3 is a known tail of (a, r) and is filtered.
    text += score_line("a", "b", "tail", {0.9, 0.5, 0.2, 0.8});
    write_file(dir / "scores.jsonl", text);

    RankingOptions opt;
    const auto recs = rank_score_file(dir / "scores.jsonl", ds, opt);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].query.direction == Direction::Head);
    CHECK(recs[0].rank == 2);  // only d=0.7 beats 0.5
    CHECK(recs[1].rank == 2);  // c=0.9 beats 0.5
    CHECK(recs[0].query.gold_popularity == 1);
    CHECK(recs[1].query.gold_popularity == 1);

    opt.filtered = false;
    const auto raw = rank_score_file(dir / "scores.jsonl", ds, opt);
    CHECK(raw[0].rank == 3);
    CHECK(raw[1].rank == 3);
  }

  TEST_CASE("output is independent of threads and batch size") {
    TempDir dir;
    std::ostringstream train, test;
    Rng rng(3);
    for (int i = 0; i < 200; ++i) train << 'e' << rng.below(60) << "\tr" << rng.below(3) << "\te" << rng.below(60) << '\n';
    for (int i = 0; i < 40; ++i) test << 'e' << rng.below(60) << "\tr" << rng.below(3) << "\te" << rng.below(60) << '\n';
    write_file(dir / "train.txt", train.str());
    write_file(dir / "valid.txt", "");
    write_file(dir / "test.txt", test.str());
    const auto ds = load_dataset(dir.path());
    const auto n = ds.graph.entity_count();

    std::string text;
    for (const auto& t : ds.graph.test()) {
      for (const char* d : {"head", "tail"}) {
        nlohmann::json j{{"head", ds.graph.entities().label(t.head)},
                         {"relation", ds.graph.relations().label(t.relation)},
                         {"tail", ds.graph.entities().label(t.tail)},
                         {"direction", d},
                         {"scores", probe::testing::random_scores(rng, n)}};
        text += j.dump() + "\n";
      }
    }
    write_file(dir / "scores.jsonl", text);

    RankingOptions base;
    base.tie = TiePolicy::random(11);
    base.threads = 1;
    base.batch_lines = 1000;
    const auto want = rank_score_file(dir / "scores.jsonl", ds, base);
    REQUIRE(want.size() == ds.graph.test().size() * 2);
    for (unsigned threads : {2u, 4u, 16u}) {
      for (std::size_t batch : {1u, 7u, 64u}) {
        auto opt = base;
        opt.threads = threads;
        opt.batch_lines = batch;
        const auto got = rank_score_file(dir / "scores.jsonl", ds, opt);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].rank == want[i].rank);
      }
    }
  }

  TEST_CASE("rejects bad rows") {
    TempDir dir;
    const auto ds = small_dataset(dir);
    RankingOptions opt;

    write_file(dir / "s.jsonl", score_line("a", "b", "tail", {0.1, 0.2}));
    CHECK_THROWS_AS(rank_score_file(dir / "s.jsonl", ds, opt), InputError);

    write_file(dir / "s.jsonl", score_line("c", "b", "tail", {0.1, 0.2, 0.3, 0.4}));
    CHECK_THROWS_AS(rank_score_file(dir / "s.jsonl", ds, opt), InputError);

    write_file(dir / "s.jsonl", score_line("zz", "b", "tail", {0.1, 0.2, 0.3, 0.4}));
    CHECK_THROWS_AS(rank_score_file(dir / "s.jsonl", ds, opt), ParseError);

    const auto row = score_line("a", "b", "tail", {0.1, 0.2, 0.3, 0.4});
    write_file(dir / "s.jsonl", row + row);
    CHECK_THROWS_AS(rank_score_file(dir / "s.jsonl", ds, opt), InputError);

    opt.tie = TiePolicy{TieKind::Random, std::nullopt};
    write_file(dir / "s.jsonl", row);
    CHECK_THROWS_AS(rank_score_file(dir / "s.jsonl", ds, opt), ConfigError);

    CHECK_THROWS_AS(rank_score_file(dir / "missing.jsonl", ds, RankingOptions{}), IoError);
  }
}
