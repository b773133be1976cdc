#pragma once

// Matched cross-section of consensus scores and six-month excess returns:
// record filters, volatility screen, excess returns and subsample split.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sjc/calendar.hpp"
#include "sjc/config.hpp"
#include "sjc/copula.hpp"
#include "sjc/parallel.hpp"
#include "sjc/volatility.hpp"

namespace sjc {

enum class ReturnMode { raw_excess, filtered_excess };

inline std::string to_string(ReturnMode m) { return m == ReturnMode::raw_excess ? "raw_excess" : "filtered_excess"; }

inline ReturnMode return_mode_from_string(const std::string& s) {
  if (s == "raw_excess") return ReturnMode::raw_excess;
  if (s == "filtered_excess") return ReturnMode::filtered_excess;
  throw std::invalid_argument("unknown return_mode '" + s + "'");
}

/// Every tunable constant of the study; each one is a config key of the same name.
struct StudyConfig {
  int min_analysts = 30;
  std::size_t arch_lags = 5;
  double significance = 0.05;
  bool garch_screen = true;
  std::size_t min_garch_length = 250;
  int horizon_months = 6;
  std::size_t min_window_days = 100;
  ReturnMode return_mode = ReturnMode::raw_excess;
  double delta_epsilon = 1e-9;
  Reflection reflection = Reflection::swapped;
  std::size_t min_fit_n = 50;
  std::size_t bootstrap_replicates = 0;
  std::uint64_t seed = 20110101;

  static const std::set<std::string>& keys() {
    static const std::set<std::string> k{"min_analysts",     "arch_lags",        "significance",
                                         "garch_screen",     "min_garch_length", "horizon_months",
                                         "min_window_days",  "return_mode",      "delta_epsilon",
                                         "reflection",       "min_fit_n",        "bootstrap_replicates",
                                         "seed"};
    return k;
  }

  static StudyConfig from(const KeyValueConfig& kv) {
    kv.require_known(keys(), {"fixture."});
    StudyConfig c;
    c.min_analysts = static_cast<int>(kv.get_int("min_analysts", c.min_analysts));
    c.arch_lags = kv.get_uint("arch_lags", c.arch_lags);
    c.significance = kv.get_double("significance", c.significance);
    c.garch_screen = kv.get_bool("garch_screen", c.garch_screen);
    c.min_garch_length = kv.get_uint("min_garch_length", c.min_garch_length);
    c.horizon_months = static_cast<int>(kv.get_int("horizon_months", c.horizon_months));
    c.min_window_days = kv.get_uint("min_window_days", c.min_window_days);
    c.return_mode = return_mode_from_string(kv.get_string("return_mode", to_string(c.return_mode)));
    c.delta_epsilon = kv.get_double("delta_epsilon", c.delta_epsilon);
    c.reflection = reflection_from_string(kv.get_string("reflection", to_string(c.reflection)));
    c.min_fit_n = kv.get_uint("min_fit_n", c.min_fit_n);
    c.bootstrap_replicates = kv.get_uint("bootstrap_replicates", c.bootstrap_replicates);
    c.seed = kv.get_uint("seed", c.seed);
    if (!(c.significance > 0.0 && c.significance < 1.0)) throw std::invalid_argument("significance must be in (0,1)");
    if (c.arch_lags == 0) throw std::invalid_argument("arch_lags must be positive");
    if (c.horizon_months <= 0) throw std::invalid_argument("horizon_months must be positive");
    return c;
  }
};

struct ConsensusRecord {
  std::string security_id;
  Date vintage_date;
  double mean_rec_original;  // 1 = strong buy ... 5 = strong sell
  int num_analysts;

  void validate() const {
    if (security_id.empty()) throw std::invalid_argument("consensus record without security id");
    if (!(mean_rec_original >= 1.0 && mean_rec_original <= 5.0)) {
      throw std::invalid_argument("mean recommendation outside [1,5] for " + security_id);
    }
    if (num_analysts < 1) throw std::invalid_argument("num_analysts < 1 for " + security_id);
  }
};

/// Daily series sorted by strictly increasing date.
struct PriceSeries {
  std::vector<Date> dates;
  std::vector<double> values;

  std::size_t size() const noexcept { return dates.size(); }

  std::optional<std::size_t> index_of(const Date& d) const {
    const auto it = std::lower_bound(dates.begin(), dates.end(), d);
    if (it == dates.end() || *it != d) return std::nullopt;
    return static_cast<std::size_t>(it - dates.begin());
  }

  void validate(const std::string& what) const {
    if (dates.size() != values.size()) throw std::invalid_argument(what + ": dates/values length mismatch");
    for (std::size_t i = 0; i < dates.size(); ++i) {
      if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
        throw std::invalid_argument(what + ": non-positive level on " + to_string(dates[i]));
      }
      if (i > 0 && !(dates[i - 1] < dates[i])) {
        throw std::invalid_argument(what + ": dates not strictly increasing at " + to_string(dates[i]));
      }
    }
  }

  std::vector<double> log_returns() const {
    std::vector<double> r;
    if (values.size() < 2) return r;
    r.reserve(values.size() - 1);
    for (std::size_t i = 1; i < values.size(); ++i) r.push_back(std::log(values[i] / values[i - 1]));
    return r;
  }
};

using PriceTable = std::map<std::string, PriceSeries>;

enum class Subsample { full, a_downgrade, b_upgrade };

inline std::string to_string(Subsample s) {
  switch (s) {
    case Subsample::full: return "full";
    case Subsample::a_downgrade: return "A_downgrade";
    case Subsample::b_upgrade: return "B_upgrade";
  }
  return "?";
}

struct MatchedObservation {
  std::string security_id;
  Date vintage_date;
  double score_reversed;
  double excess_return_6m;
  std::optional<double> delta_prev;
  bool passed_iid_screen;
};

/// Record counts removed at each stage, plus the composition of the full panel.
struct Provenance {
  std::size_t records_in = 0;
  std::size_t dropped_min_analysts = 0;
  std::size_t dropped_no_prices = 0;
  std::size_t dropped_short_history = 0;
  std::size_t dropped_iid_screen = 0;
  std::size_t dropped_coverage = 0;
  std::size_t securities_screened = 0;
  std::size_t securities_refiltered = 0;  // raw series rejected, GARCH filter applied
  std::size_t securities_failed_screen = 0;
  std::size_t full = 0;
  std::size_t downgrades = 0;
  std::size_t upgrades = 0;
  std::size_t unchanged = 0;
  std::size_t no_prior = 0;

  struct VintageCounts {
    std::size_t full = 0, downgrades = 0, upgrades = 0, unchanged = 0, no_prior = 0;
  };
  std::map<Date, VintageCounts> by_vintage;

  std::size_t dropped_total() const noexcept {
    return dropped_min_analysts + dropped_no_prices + dropped_short_history + dropped_iid_screen +
           dropped_coverage;
  }
};

struct MatchedPanel {
  std::vector<MatchedObservation> observations;
  Subsample subsample = Subsample::full;
  Provenance provenance;

  std::size_t size() const noexcept { return observations.size(); }
  std::vector<double> scores() const {
    std::vector<double> out;
    for (const auto& o : observations) out.push_back(o.score_reversed);
    return out;
  }
  std::vector<double> returns() const {
    std::vector<double> out;
    for (const auto& o : observations) out.push_back(o.excess_return_6m);
    return out;
  }
};

struct PanelSet {
  MatchedPanel full;
  MatchedPanel downgrades;  // subsample A
  MatchedPanel upgrades;    // subsample B
};

// ---------------------------------------------------------------------------
// Stages

/// Maps the I/B/E/S scale (1 = strong buy) to one where larger is more favourable.
inline double reverse_scale(double mean_rec) {
  if (!(mean_rec >= 1.0 && mean_rec <= 5.0)) {
    throw std::invalid_argument("recommendation score outside [1,5]: " + std::to_string(mean_rec));
  }
  return 6.0 - mean_rec;
}

inline std::vector<ConsensusRecord> filter_min_analysts(std::vector<ConsensusRecord> recs, int min_analysts) {
  std::erase_if(recs, [&](const ConsensusRecord& r) { return r.num_analysts < min_analysts; });
  return recs;
}

/// Records with mean_rec replaced by its reversed-scale value.
inline std::vector<ConsensusRecord> reverse_records(std::vector<ConsensusRecord> recs) {
  for (auto& r : recs) r.mean_rec_original = reverse_scale(r.mean_rec_original);
  return recs;
}

struct WindowRule {
  int months = 6;
  std::size_t min_days = 100;
};

struct ExcessWindow {
  Date start;
  Date end;
  std::size_t start_index;  // into the security series
  std::size_t end_index;
  std::size_t trading_days;
  double security_return;
  double benchmark_return;
  double excess() const noexcept { return security_return - benchmark_return; }
};

/// Security minus benchmark cumulative simple return from the first trading
/// day after `issue` to the last trading day on or before issue + months.
/// The benchmark's dates are the trading calendar. Returns nullopt when
/// either series does not cover the window.
inline std::optional<ExcessWindow> compute_excess_window(const PriceSeries& security, const PriceSeries& benchmark,
                                                          const Date& issue, const WindowRule& rule = {}) {
  const Date horizon = add_months(issue, rule.months);
  if (benchmark.dates.empty() || benchmark.dates.back() < horizon) return std::nullopt;
  const auto first = std::upper_bound(benchmark.dates.begin(), benchmark.dates.end(), issue);
  const auto past = std::upper_bound(benchmark.dates.begin(), benchmark.dates.end(), horizon);
  if (first == benchmark.dates.end() || past == benchmark.dates.begin()) return std::nullopt;
  const auto bs = static_cast<std::size_t>(first - benchmark.dates.begin());
  const auto be = static_cast<std::size_t>(past - benchmark.dates.begin()) - 1;
  if (be <= bs) return std::nullopt;

  const auto ss = security.index_of(benchmark.dates[bs]);
  const auto se = security.index_of(benchmark.dates[be]);
  if (!ss || !se) return std::nullopt;
  const std::size_t days = *se - *ss + 1;
  if (days < rule.min_days) return std::nullopt;

  ExcessWindow w{benchmark.dates[bs], benchmark.dates[be], *ss, *se, days,
                 security.values[*se] / security.values[*ss] - 1.0,
                 benchmark.values[be] / benchmark.values[bs] - 1.0};
  return w;
}

inline std::optional<double> compute_excess_return(const PriceSeries& security, const PriceSeries& benchmark,
                                                   const Date& issue, const WindowRule& rule = {}) {
  const auto w = compute_excess_window(security, benchmark, issue, rule);
  if (!w) return std::nullopt;
  return w->excess();
}

enum class ScreenOutcome { passed_raw, passed_filtered, failed, no_prices, short_history };

struct ScreenResult {
  ScreenOutcome outcome = ScreenOutcome::no_prices;
  ArchTestResult raw;
  std::optional<ArchTestResult> filtered;
  std::optional<GarchFit> garch;

  bool passed() const noexcept {
    return outcome == ScreenOutcome::passed_raw || outcome == ScreenOutcome::passed_filtered;
  }
};

/// ARCH screen on daily log returns; a rejecting series is GARCH(1,1)-filtered
/// and re-tested, and fails if the standardized residuals still reject.
inline ScreenResult screen_security(const PriceSeries& prices, const StudyConfig& config) {
  ScreenResult out;
  const auto r = prices.log_returns();
  if (r.size() < config.min_garch_length) {
    out.outcome = ScreenOutcome::short_history;
    return out;
  }
  out.raw = arch_lm_test(r, config.arch_lags);
  if (out.raw.p_value >= config.significance) {
    out.outcome = ScreenOutcome::passed_raw;
    return out;
  }
  try {
    out.garch = garch11_fit(r, GarchOptions{.min_length = config.min_garch_length});
  } catch (const std::exception&) {
    out.outcome = ScreenOutcome::failed;
    return out;
  }
  if (!out.garch->converged) {
    out.outcome = ScreenOutcome::failed;
    return out;
  }
  out.filtered = arch_lm_test(out.garch->residuals, config.arch_lags);
  out.outcome = out.filtered->p_value >= config.significance ? ScreenOutcome::passed_filtered
                                                            : ScreenOutcome::failed;
  return out;
}

namespace detail {

// Window sum of GARCH-standardized daily excess log returns, scaled by 1/sqrt(days).
inline std::optional<double> filtered_window_value(const PriceSeries& security, const PriceSeries& benchmark,
                                                   const ExcessWindow& w, const StudyConfig& config,
                                                   std::map<std::string, std::optional<std::pair<std::vector<Date>, std::vector<double>>>>& cache,
                                                   const std::string& id) {
  auto it = cache.find(id);
  if (it == cache.end()) {
    std::vector<Date> dates;
    std::vector<double> excess;
    for (std::size_t i = 1; i < security.size(); ++i) {
      const auto b1 = benchmark.index_of(security.dates[i]);
      const auto b0 = benchmark.index_of(security.dates[i - 1]);
      if (!b0 || !b1) continue;
      dates.push_back(security.dates[i]);
      excess.push_back(std::log(security.values[i] / security.values[i - 1]) -
                       std::log(benchmark.values[*b1] / benchmark.values[*b0]));
    }
    std::optional<std::pair<std::vector<Date>, std::vector<double>>> entry;
    try {
      const GarchFit fit = garch11_fit(excess, GarchOptions{.min_length = config.min_garch_length});
      if (fit.converged) entry.emplace(std::move(dates), fit.residuals);
    } catch (const std::exception&) {
    }
    it = cache.emplace(id, std::move(entry)).first;
  }
  if (!it->second) return std::nullopt;
  const auto& [dates, z] = *it->second;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < dates.size(); ++i) {
    if (w.start < dates[i] && !(w.end < dates[i])) {
      sum += z[i];
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / std::sqrt(static_cast<double>(count));
}

}  // namespace detail

/// Builds the full panel and subsamples A (consensus downgrade) and B (upgrade).
///
/// Stages, in order: analyst-count filter, volatility screen, scale reversal,
/// excess returns, change versus the previous vintage. The previous vintage is
/// the preceding distinct vintage date in `recs`, and the change is measured
/// against that vintage's unfiltered consensus.
inline PanelSet build_panel(const std::vector<ConsensusRecord>& recs, const PriceTable& prices,
                            const PriceSeries& benchmark, const StudyConfig& config) {
  Provenance prov;
  prov.records_in = recs.size();

  std::set<Date> vintage_set;
  std::map<std::pair<std::string, Date>, double> raw_scores;
  for (const auto& r : recs) {
    r.validate();
    vintage_set.insert(r.vintage_date);
    if (!raw_scores.emplace(std::pair{r.security_id, r.vintage_date}, reverse_scale(r.mean_rec_original)).second) {
      throw std::invalid_argument("duplicate consensus record for " + r.security_id + " on " +
                                  to_string(r.vintage_date));
    }
  }
  if (vintage_set.size() < 2) throw std::invalid_argument("build_panel: need at least two vintages");
  const std::vector<Date> vintages(vintage_set.begin(), vintage_set.end());

  // (1) analyst coverage
  std::vector<ConsensusRecord> kept = filter_min_analysts(recs, config.min_analysts);
  prov.dropped_min_analysts = recs.size() - kept.size();

  // (2) volatility screen, one unit of work per security
  std::vector<std::string> ids;
  for (const auto& r : kept) ids.push_back(r.security_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<ScreenResult> screens(ids.size());
  parallel_for(ids.size(), [&](std::size_t i) {
    const auto it = prices.find(ids[i]);
    if (it == prices.end()) {
      screens[i].outcome = ScreenOutcome::no_prices;
    } else if (!config.garch_screen) {
      screens[i].outcome = ScreenOutcome::passed_raw;
    } else {
      screens[i] = screen_security(it->second, config);
    }
  });
  std::map<std::string, const ScreenResult*> screen_of;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    screen_of[ids[i]] = &screens[i];
    if (screens[i].outcome == ScreenOutcome::no_prices) continue;
    if (config.garch_screen) ++prov.securities_screened;
    if (screens[i].garch) ++prov.securities_refiltered;
    if (!screens[i].passed()) ++prov.securities_failed_screen;
  }

  std::map<std::string, std::optional<std::pair<std::vector<Date>, std::vector<double>>>> filtered_cache;
  const WindowRule rule{config.horizon_months, config.min_window_days};

  PanelSet out;
  out.full.subsample = Subsample::full;
  out.downgrades.subsample = Subsample::a_downgrade;
  out.upgrades.subsample = Subsample::b_upgrade;

  std::sort(kept.begin(), kept.end(), [](const ConsensusRecord& a, const ConsensusRecord& b) {
    return std::tie(a.vintage_date, a.security_id) < std::tie(b.vintage_date, b.security_id);
  });
  for (const auto& rec : kept) {
    const ScreenResult& screen = *screen_of.at(rec.security_id);
    switch (screen.outcome) {
      case ScreenOutcome::no_prices: ++prov.dropped_no_prices; continue;
      case ScreenOutcome::short_history: ++prov.dropped_short_history; continue;
      case ScreenOutcome::failed: ++prov.dropped_iid_screen; continue;
      default: break;
    }
    // (3) scale reversal
    const double score = reverse_scale(rec.mean_rec_original);

    // (4) excess return over the horizon
    const PriceSeries& series = prices.at(rec.security_id);
    const auto window = compute_excess_window(series, benchmark, rec.vintage_date, rule);
    std::optional<double> value;
    if (window) {
      value = config.return_mode == ReturnMode::raw_excess
                  ? std::optional<double>(window->excess())
                  : detail::filtered_window_value(series, benchmark, *window, config, filtered_cache,
                                                  rec.security_id);
    }
    if (!value) {
      ++prov.dropped_coverage;
      continue;
    }

    // (5) change against the previous vintage
    MatchedObservation obs{rec.security_id, rec.vintage_date, score, *value, std::nullopt,
                           config.garch_screen && screen.passed()};
    const auto pos = std::lower_bound(vintages.begin(), vintages.end(), rec.vintage_date);
    if (pos != vintages.begin()) {
      const auto prior = raw_scores.find({rec.security_id, *std::prev(pos)});
      if (prior != raw_scores.end()) obs.delta_prev = score - prior->second;
    }

    auto& vc = prov.by_vintage[rec.vintage_date];
    ++vc.full;
    if (!obs.delta_prev) {
      ++vc.no_prior;
    } else if (*obs.delta_prev < -config.delta_epsilon) {
      ++vc.downgrades;
      out.downgrades.observations.push_back(obs);
    } else if (*obs.delta_prev > config.delta_epsilon) {
      ++vc.upgrades;
      out.upgrades.observations.push_back(obs);
    } else {
      ++vc.unchanged;
    }
    out.full.observations.push_back(std::move(obs));
  }

  for (const auto& [date, vc] : prov.by_vintage) {
    if (vc.downgrades + vc.upgrades + vc.unchanged + vc.no_prior != vc.full) {
      throw std::logic_error("subsample partition broken for vintage " + to_string(date));
    }
    prov.full += vc.full;
    prov.downgrades += vc.downgrades;
    prov.upgrades += vc.upgrades;
    prov.unchanged += vc.unchanged;
    prov.no_prior += vc.no_prior;
  }
  if (prov.records_in != prov.full + prov.dropped_total()) {
    throw std::logic_error("provenance does not account for every record");
  }
  if (out.full.observations.empty()) {
    throw std::runtime_error(
        "build_panel: no observations survive (in " + std::to_string(prov.records_in) + ", analysts " +
        std::to_string(prov.dropped_min_analysts) + ", no prices " + std::to_string(prov.dropped_no_prices) +
        ", short history " + std::to_string(prov.dropped_short_history) + ", screen " +
        std::to_string(prov.dropped_iid_screen) + ", coverage " + std::to_string(prov.dropped_coverage) + ")");
  }
  out.full.provenance = prov;
  out.downgrades.provenance = prov;
  out.upgrades.provenance = prov;
  return out;
}

inline nlohmann::json to_json(const Provenance& p) {
  nlohmann::json vint = nlohmann::json::object();
  for (const auto& [d, vc] : p.by_vintage) {
    vint[to_string(d)] = {{"full", vc.full},
                          {"A_downgrade", vc.downgrades},
                          {"B_upgrade", vc.upgrades},
                          {"unchanged", vc.unchanged},
                          {"no_prior", vc.no_prior}};
  }
  return {{"records_in", p.records_in},
          {"dropped_min_analysts", p.dropped_min_analysts},
          {"dropped_no_prices", p.dropped_no_prices},
          {"dropped_short_history", p.dropped_short_history},
          {"dropped_iid_screen", p.dropped_iid_screen},
          {"dropped_coverage", p.dropped_coverage},
          {"securities_screened", p.securities_screened},
          {"securities_refiltered", p.securities_refiltered},
          {"securities_failed_screen", p.securities_failed_screen},
          {"full", p.full},
          {"A_downgrade", p.downgrades},
          {"B_upgrade", p.upgrades},
          {"unchanged", p.unchanged},
          {"no_prior", p.no_prior},
          {"by_vintage", vint}};
}

}  // namespace sjc
