#pragma once

// Synthetic recommendation/price data with planted score-return dependence.
//
// Every security contributes one study record at vintage t and one record at
// t - 1 that supplies the consensus change. Its price history starts two
// trading days after vintage t - 1, so the t - 1 record cannot get a return
// window and is dropped at the coverage stage; study observations therefore
// never share a security. Within each group the excess returns are re-paired
// with scores by rank, following a sample from the planted copula.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "sjc/calendar.hpp"
#include "sjc/config.hpp"
#include "sjc/io.hpp"
#include "sjc/panel.hpp"
#include "sjc/random.hpp"
#include "sjc/sampler.hpp"
#include "sjc/volatility.hpp"

namespace sjc {

/// Planted tail coefficients; (0, 0) means independence.
struct Plant {
  double lambda_u = 0.0;
  double lambda_l = 0.0;

  bool independent() const noexcept { return lambda_u <= 0.0 && lambda_l <= 0.0; }
  TailParams params() const {
    return TailParams(std::max(lambda_u, kLambdaMin), std::max(lambda_l, kLambdaMin));
  }
};

struct FixtureConfig {
  std::uint64_t seed = 1;
  std::size_t downgrades = 1000;
  std::size_t upgrades = 1000;
  std::size_t unchanged = 2000;
  std::size_t low_coverage = 30;
  int vintages = 13;
  int start_year = 2010;
  unsigned start_month = 12;
  Plant plant_a{0.158, 0.014};
  Plant plant_b{};
  Plant plant_unchanged{};
  double garch_share = 0.25;
  double garch_alpha = 0.08;
  double garch_beta = 0.90;
  double idio_vol = 0.015;
  double benchmark_drift = 2e-4;
  double benchmark_vol = 0.009;
  double step_min = 0.02;
  double step_max = 0.30;
  int max_attempts = 20;

  static const std::set<std::string>& keys() {
    static const std::set<std::string> k{
        "fixture.seed",         "fixture.downgrades",          "fixture.upgrades",
        "fixture.unchanged",    "fixture.low_coverage",        "fixture.vintages",
        "fixture.start_year",   "fixture.start_month",         "fixture.a_lambda_u",
        "fixture.a_lambda_l",   "fixture.b_lambda_u",          "fixture.b_lambda_l",
        "fixture.unchanged_lambda_u", "fixture.unchanged_lambda_l", "fixture.garch_share",
        "fixture.garch_alpha",  "fixture.garch_beta",          "fixture.idio_vol",
        "fixture.benchmark_drift", "fixture.benchmark_vol",    "fixture.step_min",
        "fixture.step_max",     "fixture.max_attempts"};
    return k;
  }

  static FixtureConfig from(const KeyValueConfig& kv) {
    std::set<std::string> known = keys();
    known.insert(StudyConfig::keys().begin(), StudyConfig::keys().end());
    kv.require_known(known);
    FixtureConfig c;
    c.seed = kv.get_uint("fixture.seed", c.seed);
    c.downgrades = kv.get_uint("fixture.downgrades", c.downgrades);
    c.upgrades = kv.get_uint("fixture.upgrades", c.upgrades);
    c.unchanged = kv.get_uint("fixture.unchanged", c.unchanged);
    c.low_coverage = kv.get_uint("fixture.low_coverage", c.low_coverage);
    c.vintages = static_cast<int>(kv.get_int("fixture.vintages", c.vintages));
    c.start_year = static_cast<int>(kv.get_int("fixture.start_year", c.start_year));
    c.start_month = static_cast<unsigned>(kv.get_uint("fixture.start_month", c.start_month));
    c.plant_a = {kv.get_double("fixture.a_lambda_u", c.plant_a.lambda_u),
                 kv.get_double("fixture.a_lambda_l", c.plant_a.lambda_l)};
    c.plant_b = {kv.get_double("fixture.b_lambda_u", c.plant_b.lambda_u),
                 kv.get_double("fixture.b_lambda_l", c.plant_b.lambda_l)};
    c.plant_unchanged = {kv.get_double("fixture.unchanged_lambda_u", c.plant_unchanged.lambda_u),
                         kv.get_double("fixture.unchanged_lambda_l", c.plant_unchanged.lambda_l)};
    c.garch_share = kv.get_double("fixture.garch_share", c.garch_share);
    c.garch_alpha = kv.get_double("fixture.garch_alpha", c.garch_alpha);
    c.garch_beta = kv.get_double("fixture.garch_beta", c.garch_beta);
    c.idio_vol = kv.get_double("fixture.idio_vol", c.idio_vol);
    c.benchmark_drift = kv.get_double("fixture.benchmark_drift", c.benchmark_drift);
    c.benchmark_vol = kv.get_double("fixture.benchmark_vol", c.benchmark_vol);
    c.step_min = kv.get_double("fixture.step_min", c.step_min);
    c.step_max = kv.get_double("fixture.step_max", c.step_max);
    c.max_attempts = static_cast<int>(kv.get_int("fixture.max_attempts", c.max_attempts));
    return c;
  }

  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("infeasible fixture config: " + what); };
    if (vintages < 2) fail("need at least two vintages");
    if (start_month < 1 || start_month > 12) fail("start_month must be 1..12");
    if (downgrades + upgrades + unchanged == 0) fail("no securities");
    for (const Plant* p : {&plant_a, &plant_b, &plant_unchanged}) {
      if (p->lambda_u < 0.0 || p->lambda_u >= 1.0 || p->lambda_l < 0.0 || p->lambda_l >= 1.0) {
        fail("planted tail coefficients must lie in [0, 1)");
      }
    }
    if (!(garch_share >= 0.0 && garch_share <= 1.0)) fail("garch_share must lie in [0, 1]");
    if (!(idio_vol > 0.0) || !(benchmark_vol > 0.0)) fail("volatilities must be positive");
    if (!(garch_alpha >= 0.0 && garch_beta >= 0.0 && garch_alpha + garch_beta < 1.0)) {
      fail("GARCH persistence must be below 1");
    }
    if (!(step_min > 0.0 && step_max >= step_min && step_max <= 1.0)) fail("need 0 < step_min <= step_max <= 1");
    if (max_attempts < 1) fail("max_attempts must be positive");
  }
};

enum class FixtureGroup { downgrade, upgrade, unchanged };

inline std::string to_string(FixtureGroup g) {
  switch (g) {
    case FixtureGroup::downgrade: return "A_downgrade";
    case FixtureGroup::upgrade: return "B_upgrade";
    case FixtureGroup::unchanged: return "unchanged";
  }
  return "?";
}

struct PlantedObservation {
  std::string security_id;
  FixtureGroup group;
  Date vintage_date;
  double planted_u;  // copula coordinate of the score
  double planted_v;  // copula coordinate of the excess return
  double score_reversed;
  double excess_return;
};

struct Fixture {
  std::vector<ConsensusRecord> recs;
  PriceTable prices;
  PriceSeries benchmark;
  std::vector<PlantedObservation> planted;
  nlohmann::json manifest;
};

namespace detail {

// Maps a uniform to a consensus score on the reversed scale inside [1.1, 4.9],
// leaving room for a prior consensus on either side.
inline double score_from_uniform(double u) { return 1.1 + 3.8 * std::pow(u, 0.6); }

struct SecurityPath {
  PriceSeries prices;
  double excess = 0.0;
  int attempts = 0;
};

}  // namespace detail

inline Fixture make_fixture(const FixtureConfig& fc, const StudyConfig& study) {
  fc.validate();
  const std::uint64_t seed = fc.seed;

  std::vector<Date> vintages;
  for (int i = 0; i < fc.vintages; ++i) {
    const auto ym = std::chrono::year_month{std::chrono::year{fc.start_year}, std::chrono::month{fc.start_month}} +
                    std::chrono::months{i};
    vintages.push_back(third_thursday(ym.year(), ym.month()));
  }

  // Benchmark on a weekday calendar.
  Fixture out;
  {
    const Date last = add_months(vintages.back(), 13);
    CounterRng rng(derive_seed(seed, 0));
    std::normal_distribution<double> normal;
    double level = 1000.0;
    for (Date d = add_days(vintages.front(), -7); d <= last; d = add_days(d, 1)) {
      if (!is_weekday(d)) continue;
      if (!out.benchmark.dates.empty()) level *= std::exp(fc.benchmark_drift + fc.benchmark_vol * normal(rng));
      out.benchmark.dates.push_back(d);
      out.benchmark.values.push_back(level);
    }
  }
  const PriceSeries& bench = out.benchmark;
  const auto bench_log = bench.log_returns();
  const WindowRule rule{study.horizon_months, study.min_window_days};

  struct Slot {
    FixtureGroup group;
    std::size_t index_in_group;
    int vintage;  // study vintage, >= 1
  };
  std::vector<Slot> slots;
  const std::array<std::pair<FixtureGroup, std::size_t>, 3> sizes{
      {{FixtureGroup::downgrade, fc.downgrades}, {FixtureGroup::upgrade, fc.upgrades},
       {FixtureGroup::unchanged, fc.unchanged}}};
  for (const auto& [g, n] : sizes) {
    for (std::size_t i = 0; i < n; ++i) {
      slots.push_back({g, i, 1 + static_cast<int>(slots.size() % static_cast<std::size_t>(fc.vintages - 1))});
    }
  }

  // Price paths, regenerated until they pass the volatility screen.
  const std::size_t min_prices = std::max<std::size_t>(study.min_garch_length + 1, 2) + 10;
  std::vector<detail::SecurityPath> paths(slots.size());
  parallel_for(slots.size(), [&](std::size_t i) {
    const Slot& s = slots[i];
    const auto first = std::upper_bound(bench.dates.begin(), bench.dates.end(), vintages[s.vintage - 1]);
    const auto begin = static_cast<std::size_t>(first - bench.dates.begin()) + 1;
    const auto window_end = std::upper_bound(bench.dates.begin(), bench.dates.end(),
                                             add_months(vintages[s.vintage], study.horizon_months));
    const std::size_t end = std::max(static_cast<std::size_t>(window_end - bench.dates.begin()), begin + min_prices);
    if (end > bench.size()) throw std::invalid_argument("infeasible fixture config: benchmark calendar too short");
    const bool garch = uniform_at(derive_seed(seed, 1), i) < fc.garch_share;
    const GarchParams gp{0.0, fc.idio_vol * fc.idio_vol * (1.0 - fc.garch_alpha - fc.garch_beta), fc.garch_alpha,
                         fc.garch_beta};

    auto& path = paths[i];
    for (int attempt = 0; attempt < fc.max_attempts; ++attempt) {
      const std::uint64_t stream = derive_seed(derive_seed(seed, 2 + i), static_cast<std::uint64_t>(attempt));
      std::vector<double> idio;
      if (garch) {
        idio = garch11_simulate(gp, end - begin, stream);
      } else {
        CounterRng rng(stream);
        std::normal_distribution<double> normal(0.0, fc.idio_vol);
        for (std::size_t t = 0; t < end - begin; ++t) idio.push_back(normal(rng));
      }
      PriceSeries p;
      double level = 50.0;
      for (std::size_t t = begin; t < end; ++t) {
        if (t > begin) level *= std::exp(bench_log[t - 1] + idio[t - begin]);
        p.dates.push_back(bench.dates[t]);
        p.values.push_back(level);
      }
      path.attempts = attempt + 1;
      if (study.garch_screen && !screen_security(p, study).passed()) continue;
      const auto ex = compute_excess_return(p, bench, vintages[s.vintage], rule);
      if (!ex) throw std::logic_error("fixture path does not cover its return window");
      path.prices = std::move(p);
      path.excess = *ex;
      return;
    }
    throw std::runtime_error("infeasible fixture config: no price path passed the volatility screen after " +
                             std::to_string(fc.max_attempts) + " attempts");
  });

  // Rank coupling within each group.
  std::vector<double> score(slots.size()), pu(slots.size()), pv(slots.size());
  std::size_t offset = 0;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    const std::size_t n = sizes[g].second;
    if (n == 0) continue;
    const Plant& plant = g == 0 ? fc.plant_a : g == 1 ? fc.plant_b : fc.plant_unchanged;
    const std::uint64_t pair_seed = derive_seed(derive_seed(seed, 1u << 30), g);
    const SampleBatch batch = plant.independent() ? sample_independent(n, pair_seed)
                                                  : sample_sjc(n, plant.params(), pair_seed, study.reflection);
    std::vector<std::size_t> by_v(n), by_ret(n);
    std::iota(by_v.begin(), by_v.end(), 0);
    std::iota(by_ret.begin(), by_ret.end(), 0);
    std::sort(by_v.begin(), by_v.end(),
              [&](std::size_t a, std::size_t b) { return batch.pairs[a].v() < batch.pairs[b].v(); });
    std::sort(by_ret.begin(), by_ret.end(),
              [&](std::size_t a, std::size_t b) { return paths[offset + a].excess < paths[offset + b].excess; });
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t obs = offset + by_ret[k];
      const UnitPair& pair = batch.pairs[by_v[k]];
      pu[obs] = pair.u();
      pv[obs] = pair.v();
      score[obs] = detail::score_from_uniform(pair.u());
    }
    offset += n;
  }

  // Consensus records.
  auto analysts = [&](std::uint64_t stream, std::size_t i, int lo, int hi) {
    return lo + static_cast<int>(uniform_at(derive_seed(seed, stream), i) * (hi - lo + 1));
  };
  char id[32];
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const Slot& s = slots[i];
    std::snprintf(id, sizeof id, "S%05zu", i + 1);
    const double step = fc.step_min + (fc.step_max - fc.step_min) * uniform_at(derive_seed(seed, 3), i);
    double prior = score[i];
    if (s.group == FixtureGroup::downgrade) prior = std::min(5.0, score[i] + step);
    if (s.group == FixtureGroup::upgrade) prior = std::max(1.0, score[i] - step);
    out.recs.push_back({id, vintages[s.vintage - 1], 6.0 - prior, analysts(4, i, study.min_analysts, study.min_analysts + 30)});
    out.recs.push_back({id, vintages[s.vintage], 6.0 - score[i], analysts(5, i, study.min_analysts, study.min_analysts + 30)});
    out.prices.emplace(id, paths[i].prices);
    out.planted.push_back({id, s.group, vintages[s.vintage], pu[i], pv[i], score[i], paths[i].excess});
  }
  const int low_hi = std::max(1, study.min_analysts - 1);
  for (std::size_t i = 0; i < fc.low_coverage; ++i) {
    std::snprintf(id, sizeof id, "L%05zu", i + 1);
    const int t = 1 + static_cast<int>(i % static_cast<std::size_t>(fc.vintages - 1));
    const double sc = detail::score_from_uniform(uniform_at(derive_seed(seed, 6), i));
    out.recs.push_back({id, vintages[t - 1], 6.0 - sc, analysts(7, i, std::min(5, low_hi), low_hi)});
    out.recs.push_back({id, vintages[t], 6.0 - sc, analysts(8, i, std::min(5, low_hi), low_hi)});
  }
  std::sort(out.recs.begin(), out.recs.end(), [](const ConsensusRecord& a, const ConsensusRecord& b) {
    return std::tie(a.vintage_date, a.security_id) < std::tie(b.vintage_date, b.security_id);
  });

  // Manifest.
  std::size_t regenerated = 0;
  for (const auto& p : paths) regenerated += static_cast<std::size_t>(p.attempts - 1);
  auto plant_json = [](const Plant& p, std::size_t n) {
    return nlohmann::json{{"n", n}, {"lambda_u", p.lambda_u}, {"lambda_l", p.lambda_l},
                          {"independent", p.independent()}};
  };
  nlohmann::json obs = nlohmann::json::array();
  for (const auto& p : out.planted) {
    obs.push_back({{"security_id", p.security_id},
                   {"group", to_string(p.group)},
                   {"vintage_date", to_string(p.vintage_date)},
                   {"planted_u", p.planted_u},
                   {"planted_v", p.planted_v},
                   {"score_reversed", p.score_reversed},
                   {"excess_return", p.excess_return}});
  }
  const std::size_t n_main = slots.size();
  out.manifest = {
      {"seed", seed},
      {"reflection", to_string(study.reflection)},
      {"vintages", fc.vintages},
      {"planted",
       {{"A_downgrade", plant_json(fc.plant_a, fc.downgrades)},
        {"B_upgrade", plant_json(fc.plant_b, fc.upgrades)},
        {"unchanged", plant_json(fc.plant_unchanged, fc.unchanged)}}},
      {"expected",
       {{"records_in", out.recs.size()},
        {"dropped_min_analysts", 2 * fc.low_coverage},
        {"dropped_no_prices", 0},
        {"dropped_short_history", 0},
        {"dropped_iid_screen", 0},
        {"dropped_coverage", n_main},
        {"full", n_main},
        {"A_downgrade", fc.downgrades},
        {"B_upgrade", fc.upgrades},
        {"unchanged", fc.unchanged},
        {"no_prior", 0}}},
      {"garch_paths", static_cast<std::size_t>(std::count_if(
                          slots.begin(), slots.end(),
                          [&, i = std::size_t{0}](const Slot&) mutable {
                            return uniform_at(derive_seed(seed, 1), i++) < fc.garch_share;
                          }))},
      {"regenerated_paths", regenerated},
      {"observations", obs}};
  return out;
}

inline void write_fixture(const Fixture& f, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto o = open_output((dir / "recommendations.csv").string());
    write_recommendations(o, f.recs);
  }
  {
    auto o = open_output((dir / "prices.csv").string());
    write_prices(o, f.prices);
  }
  {
    auto o = open_output((dir / "benchmark.csv").string());
    write_benchmark(o, f.benchmark);
  }
  auto o = open_output((dir / "truth.json").string());
  o << f.manifest.dump(2) << '\n';
}

}  // namespace sjc
