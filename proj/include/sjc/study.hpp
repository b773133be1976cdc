#pragma once

// Two-step estimation over the full panel and the upgrade/downgrade subsamples.

#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sjc/estimator.hpp"
#include "sjc/margins.hpp"
#include "sjc/panel.hpp"
#include "sjc/random.hpp"

namespace sjc {

struct SubsampleResult {
  Subsample subsample;
  FitReport report;
  KsResult ks_score;   // uniformity of the score PITs
  KsResult ks_return;  // uniformity of the return PITs
};

struct StudyResult {
  std::vector<SubsampleResult> subsamples;  // full, B_upgrade, A_downgrade
  Provenance provenance;
  StudyConfig config;

  std::vector<FitReport> reports() const {
    std::vector<FitReport> out;
    for (const auto& s : subsamples) out.push_back(s.report);
    return out;
  }

  const SubsampleResult& at(Subsample s) const {
    for (const auto& r : subsamples) {
      if (r.subsample == s) return r;
    }
    throw std::out_of_range("no result for subsample " + to_string(s));
  }
};

inline FitConfig fit_config_for(const StudyConfig& config, const std::string& label) {
  FitConfig fc;
  fc.reflection = config.reflection;
  fc.min_n = config.min_fit_n;
  fc.label = label;
  return fc;
}

inline SubsampleResult analyse_panel(const MatchedPanel& panel, const StudyConfig& config, std::size_t index) {
  const std::string label = to_string(panel.subsample);
  if (panel.size() < config.min_fit_n) {
    throw std::runtime_error("subsample " + label + " has " + std::to_string(panel.size()) +
                             " observations, fewer than the estimator minimum " +
                             std::to_string(config.min_fit_n));
  }
  const auto scores = panel.scores();
  const auto returns = panel.returns();
  const auto obs = PseudoObservations::from_raw(scores, returns);
  SubsampleResult out{panel.subsample, {}, ks_uniform_test(obs.u()), ks_uniform_test(obs.v())};
  out.report = fit_sjc(obs, fit_config_for(config, label));
  out.report.subsample_label = label;
  if (config.bootstrap_replicates > 0) {
    out.report.bootstrap = bootstrap_se(obs, config.bootstrap_replicates, derive_seed(config.seed, index),
                                        fit_config_for(config, label));
  }
  return out;
}

/// Fits the full panel, then the upgrade (B) and downgrade (A) subsamples.
inline StudyResult run_study(const PanelSet& panels, const StudyConfig& config) {
  StudyResult out;
  out.provenance = panels.full.provenance;
  out.config = config;
  out.subsamples.push_back(analyse_panel(panels.full, config, 0));
  out.subsamples.push_back(analyse_panel(panels.upgrades, config, 1));
  out.subsamples.push_back(analyse_panel(panels.downgrades, config, 2));
  return out;
}

inline nlohmann::json to_json(const KsResult& k) {
  return {{"statistic", k.statistic}, {"p_value", k.p_value}};
}

/// Array of FitReport objects, each keyed by its subsample.
inline nlohmann::json reports_json(const StudyResult& r) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : r.subsamples) {
    nlohmann::json j = to_json(s.report);
    j["ks_score"] = to_json(s.ks_score);
    j["ks_return"] = to_json(s.ks_return);
    arr.push_back(std::move(j));
  }
  return arr;
}

inline std::string format_study(const StudyResult& r) {
  std::ostringstream os;
  os << format_table(r.reports(), r.config.bootstrap_replicates > 0);
  const auto& p = r.provenance;
  os << "Records " << p.records_in << "; dropped: analysts " << p.dropped_min_analysts << ", no prices "
     << p.dropped_no_prices << ", short history " << p.dropped_short_history << ", i.i.d. screen "
     << p.dropped_iid_screen << ", coverage " << p.dropped_coverage << ".\n";
  os << "Full " << p.full << " = downgrades " << p.downgrades << " + upgrades " << p.upgrades << " + unchanged "
     << p.unchanged << " + no prior vintage " << p.no_prior << ".\n";
  return os.str();
}

}  // namespace sjc
