#include "catch_amalgamated.hpp"

#include <filesystem>
#include <map>
#include <numeric>

#include "sjc/fixture.hpp"
#include "sjc/margins.hpp"

using namespace sjc;
using Catch::Matchers::ContainsSubstring;

namespace {

FixtureConfig small(std::uint64_t seed) {
  FixtureConfig fc;
  fc.seed = seed;
  fc.downgrades = 150;
  fc.upgrades = 120;
  fc.unchanged = 200;
  fc.low_coverage = 7;
  fc.vintages = 4;
  return fc;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = empirical_pit(a), rb = empirical_pit(b);
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / ra.size();
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / rb.size();
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("the panel reproduces the planted counts exactly") {
  const StudyConfig study;
  const auto fx = make_fixture(small(3), study);
  const auto panels = build_panel(fx.recs, fx.prices, fx.benchmark, study);
  const auto& p = panels.full.provenance;
  const auto& e = fx.manifest.at("expected");

  CHECK(panels.downgrades.size() == 150);
  CHECK(panels.upgrades.size() == 120);
  CHECK(p.unchanged == 200);
  CHECK(p.records_in == e.at("records_in"));
  CHECK(p.dropped_min_analysts == e.at("dropped_min_analysts"));
  CHECK(p.dropped_no_prices == 0);
  CHECK(p.dropped_short_history == 0);
  CHECK(p.dropped_iid_screen == 0);
  CHECK(p.dropped_coverage == e.at("dropped_coverage"));
  CHECK(p.full == e.at("full"));
  CHECK(p.no_prior == 0);
  CHECK(p.records_in == p.full + p.dropped_total());
}

TEST_CASE("planted pairs survive the pipeline unchanged") {
  const StudyConfig study;
  const auto fx = make_fixture(small(4), study);
  const auto panels = build_panel(fx.recs, fx.prices, fx.benchmark, study);
  std::map<std::string, const MatchedObservation*> by_id;
  for (const auto& o : panels.full.observations) by_id[o.security_id] = &o;

  std::vector<double> planted_scores, panel_scores;
  for (const auto& pl : fx.planted) {
    const auto* o = by_id.at(pl.security_id);
    CHECK(o->vintage_date == pl.vintage_date);
    CHECK(std::abs(o->score_reversed - pl.score_reversed) < 1e-12);
    CHECK(std::abs(o->excess_return_6m - pl.excess_return) < 1e-12);
    planted_scores.push_back(pl.score_reversed);
    panel_scores.push_back(o->score_reversed);
  }
  CHECK(spearman(planted_scores, panel_scores) == Catch::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("fixtures are deterministic in the seed") {
  const StudyConfig study;
  const auto a = make_fixture(small(5), study);
  const auto b = make_fixture(small(5), study);
  const auto c = make_fixture(small(6), study);
  CHECK(a.manifest == b.manifest);
  REQUIRE(a.recs.size() == b.recs.size());
  for (std::size_t i = 0; i < a.recs.size(); ++i) CHECK(a.recs[i].mean_rec_original == b.recs[i].mean_rec_original);
  CHECK(a.prices.begin()->second.values == b.prices.begin()->second.values);
  CHECK(a.manifest.at("observations") != c.manifest.at("observations"));
}

TEST_CASE("fixture files round-trip through the readers") {
  const StudyConfig study;
  const auto fx = make_fixture(small(7), study);
  const auto dir = std::filesystem::temp_directory_path() / "sjc_fixture_roundtrip";
  std::filesystem::remove_all(dir);
  write_fixture(fx, dir);
  const auto recs = read_recommendations((dir / "recommendations.csv").string());
  const auto prices = read_prices((dir / "prices.csv").string());
  const auto bench = read_benchmark((dir / "benchmark.csv").string());
  CHECK(std::filesystem::exists(dir / "truth.json"));

  const auto direct = build_panel(fx.recs, fx.prices, fx.benchmark, study);
  const auto files = build_panel(recs, prices, bench, study);
  REQUIRE(direct.full.size() == files.full.size());
  for (std::size_t i = 0; i < direct.full.size(); ++i) {
    CHECK(direct.full.observations[i].score_reversed == files.full.observations[i].score_reversed);
    CHECK(direct.full.observations[i].excess_return_6m == files.full.observations[i].excess_return_6m);
  }
  CHECK(files.full.provenance.dropped_total() == direct.full.provenance.dropped_total());
  std::filesystem::remove_all(dir);
}

TEST_CASE("infeasible fixture configs are rejected") {
  const StudyConfig study;
  auto fc = small(1);
  fc.vintages = 1;
  CHECK_THROWS_WITH(make_fixture(fc, study), ContainsSubstring("infeasible"));
  fc = small(1);
  fc.plant_a = {1.2, 0.0};
  CHECK_THROWS_AS(make_fixture(fc, study), std::invalid_argument);
  fc = small(1);
  fc.garch_alpha = 0.5;
  fc.garch_beta = 0.6;
  CHECK_THROWS_AS(make_fixture(fc, study), std::invalid_argument);
  fc = small(1);
  fc.downgrades = fc.upgrades = fc.unchanged = 0;
  CHECK_THROWS_AS(make_fixture(fc, study), std::invalid_argument);
}

TEST_CASE("fixture config reads its keys") {
  const auto kv = KeyValueConfig::parse(std::string_view(
      "fixture.seed = 9\nfixture.downgrades = 500\nfixture.a_lambda_u = 0.2\nmin_analysts = 30\n"));
  const auto fc = FixtureConfig::from(kv);
  CHECK(fc.seed == 9);
  CHECK(fc.downgrades == 500);
  CHECK(fc.plant_a.lambda_u == 0.2);
  CHECK_THROWS(FixtureConfig::from(KeyValueConfig::parse(std::string_view("fixture.sed = 9\n"))));
}
