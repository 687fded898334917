#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "finch/decompose.hpp"
#include "json.hpp"

namespace finch {

enum class SimMode { EXACT, SET_F1, TOKEN_F1 };

inline const char* sim_mode_name(SimMode m) {
  switch (m) {
    case SimMode::EXACT: return "EXACT";
    case SimMode::SET_F1: return "SET_F1";
    case SimMode::TOKEN_F1: return "TOKEN_F1";
  }
  return "?";
}

inline SimMode sim_mode_from_name(const std::string& s) {
  if (s == "EXACT") return SimMode::EXACT;
  if (s == "SET_F1") return SimMode::SET_F1;
  if (s == "TOKEN_F1") return SimMode::TOKEN_F1;
  throw std::runtime_error("unknown sim_mode: " + s);
}

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct MetricConfig {
  std::map<ComponentKind, double> weights;
  std::map<ComponentKind, SimMode> sim_modes;
  double tau = 1e-4;
  double beta = 1.0;
  double delta = 0.3;

  static MetricConfig defaults() {
    MetricConfig cfg;
    cfg.weights = {
        {ComponentKind::SELECT, 0.125}, {ComponentKind::FROM, 0.075},
        {ComponentKind::WHERE, 0.20},   {ComponentKind::GROUP_BY, 0.10},
        {ComponentKind::HAVING, 0.10},  {ComponentKind::ORDER_BY, 0.025},
        {ComponentKind::JOIN, 0.15},    {ComponentKind::AGG, 0.125},
        {ComponentKind::LIMIT, 0.025},  {ComponentKind::SUBQUERY, 0.075}};
    for (ComponentKind k : kAllComponents) cfg.sim_modes[k] = SimMode::SET_F1;
    cfg.sim_modes[ComponentKind::LIMIT] = SimMode::EXACT;
    return cfg;
  }

  void validate() const {
    double sum = 0.0;
    for (ComponentKind k : kAllComponents) {
      auto it = weights.find(k);
      if (it == weights.end()) throw ConfigError(std::string("missing weight for ") + component_name(k));
      if (it->second < 0) throw ConfigError(std::string("negative weight for ") + component_name(k));
      sum += it->second;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("component weights must sum to 1");
    if (beta < 1.0) throw ConfigError("beta must be >= 1");
    if (delta < 0.0 || delta >= 1.0) throw ConfigError("delta must lie in [0, 1)");
    if (tau < 0.0) throw ConfigError("tau must be >= 0");
    for (ComponentKind k : kAllComponents)
      if (!sim_modes.count(k)) throw ConfigError(std::string("missing sim_mode for ") + component_name(k));
  }

  // Accepts either the metric section itself or a wrapper {"metric": {...}}.
  // Unspecified fields keep their defaults.
  static MetricConfig from_json(const nlohmann::json& doc) {
    const nlohmann::json& j = doc.contains("metric") ? doc.at("metric") : doc;
    MetricConfig cfg = defaults();
    if (j.contains("weights")) {
      for (auto& [key, val] : j.at("weights").items()) {
        auto k = component_from_name(key);
        if (!k) throw ConfigError("unknown component in weights: " + key);
        cfg.weights[*k] = val.get<double>();
      }
    }
    if (j.contains("tau")) cfg.tau = j.at("tau").get<double>();
    if (j.contains("beta")) cfg.beta = j.at("beta").get<double>();
    if (j.contains("delta")) cfg.delta = j.at("delta").get<double>();
    if (j.contains("sim_mode")) {
      const auto& m = j.at("sim_mode");
      if (m.is_string()) {
        SimMode mode = sim_mode_from_name(m.get<std::string>());
        for (ComponentKind k : kAllComponents) cfg.sim_modes[k] = mode;
      } else {
        for (auto& [key, val] : m.items()) {
          auto k = component_from_name(key);
          if (!k) throw ConfigError("unknown component in sim_mode: " + key);
          cfg.sim_modes[*k] = sim_mode_from_name(val.get<std::string>());
        }
      }
    }
    cfg.validate();
    return cfg;
  }

  nlohmann::json to_json() const {
    nlohmann::json w, m;
    for (ComponentKind k : kAllComponents) {
      w[component_name(k)] = weights.at(k);
      m[component_name(k)] = sim_mode_name(sim_modes.at(k));
    }
    return {{"weights", w}, {"tau", tau}, {"beta", beta}, {"delta", delta}, {"sim_mode", m}};
  }
};

namespace detail {

inline std::vector<std::string> position_tagged(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (size_t i = 0; i < items.size(); ++i) out.push_back(std::to_string(i) + "#" + items[i]);
  return out;
}

inline double multiset_f1(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::map<std::string, size_t> counts;
  for (const auto& x : a) ++counts[x];
  size_t overlap = 0;
  for (const auto& x : b) {
    auto it = counts.find(x);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  return 2.0 * static_cast<double>(overlap) / static_cast<double>(a.size() + b.size());
}

inline bool multiset_equal(std::vector<std::string> a, std::vector<std::string> b) {
  if (a.size() != b.size()) return false;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

inline std::vector<std::string> flatten_tokens(const std::vector<std::string>& items, bool ordered) {
  std::vector<std::string> out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (ordered) out.push_back("@" + std::to_string(i));
    try {
      for (const auto& t : sql::lex(items[i])) {
        if (t.kind != sql::TokKind::End) out.push_back(t.text);
      }
    } catch (const sql::LexError&) {
      // fall back to whitespace splitting for non-SQL item text
      std::string cur;
      for (char c : items[i]) {
        if (is_space(c)) {
          if (!cur.empty()) out.push_back(cur);
          cur.clear();
        } else {
          cur += c;
        }
      }
      if (!cur.empty()) out.push_back(cur);
    }
  }
  return out;
}

}  // namespace detail

// Similarity of one clause's contents. `ordered` marks sequence components
// (ORDER_BY): EXACT compares the sequence, the F1 modes tag items with their
// position first.
inline double component_similarity(const std::vector<std::string>& pred,
                                   const std::vector<std::string>& gold, SimMode mode,
                                   bool ordered = false) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  switch (mode) {
    case SimMode::EXACT:
      if (ordered) return pred == gold ? 1.0 : 0.0;
      return detail::multiset_equal(pred, gold) ? 1.0 : 0.0;
    case SimMode::SET_F1: {
      if (ordered)
        return detail::multiset_f1(detail::position_tagged(pred), detail::position_tagged(gold));
      return detail::multiset_f1(pred, gold);
    }
    case SimMode::TOKEN_F1:
      return detail::multiset_f1(detail::flatten_tokens(pred, ordered),
                                 detail::flatten_tokens(gold, ordered));
  }
  return 0.0;
}

struct ComponentSimilarities {
  std::map<ComponentKind, double> s;
};

inline ComponentSimilarities component_similarities(const Decomposition& pred,
                                                    const Decomposition& gold,
                                                    const MetricConfig& cfg) {
  ComponentSimilarities sims;
  for (ComponentKind k : kAllComponents) {
    sims.s[k] = component_similarity(pred.items(k), gold.items(k), cfg.sim_modes.at(k),
                                     k == ComponentKind::ORDER_BY);
  }
  return sims;
}

inline double weighted_component_score(const ComponentSimilarities& sims, const MetricConfig& cfg) {
  cfg.validate();
  double S = 0.0;
  for (ComponentKind k : kAllComponents) S += cfg.weights.at(k) * sims.s.at(k);
  return S;
}

inline double combined_score(double S, int e, const MetricConfig& cfg) {
  return std::pow(S, cfg.beta) * (cfg.delta + (1.0 - cfg.delta) * (e ? 1.0 : 0.0));
}

// String-level equality after trimming whitespace and trailing semicolons.
inline int exact_match(std::string_view pred, std::string_view gold) {
  auto strip = [](std::string_view s) {
    s = trim_view(s);
    while (!s.empty() && s.back() == ';') {
      s.remove_suffix(1);
      s = trim_view(s);
    }
    return s;
  };
  return strip(pred) == strip(gold) ? 1 : 0;
}

// Classic clause score: unweighted mean of exact per-clause equality over the
// components present in at least one of the two queries.
inline double component_matching(const Decomposition& pred, const Decomposition& gold) {
  size_t present = 0, matched = 0;
  for (ComponentKind k : kAllComponents) {
    if (!pred.has(k) && !gold.has(k)) continue;
    ++present;
    if (component_similarity(pred.items(k), gold.items(k), SimMode::EXACT,
                             k == ComponentKind::ORDER_BY) == 1.0)
      ++matched;
  }
  if (present == 0) return 1.0;
  return static_cast<double>(matched) / static_cast<double>(present);
}

}  // namespace finch
