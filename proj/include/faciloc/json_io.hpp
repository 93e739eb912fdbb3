#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "faciloc/scenarios.hpp"
#include "faciloc/verify.hpp"

namespace faciloc {

using nlohmann::json;

// All rationals cross the wire as exact strings "p/q" (or "p", "inf",
// "-inf"); integers in configs are also accepted where a coordinate is
// expected. Nothing is ever converted through floating point.

inline json to_json(const Rational& r) { return r.to_string(); }
inline json to_json(const ExtendedCoord& c) { return c.to_string(); }

inline Rational rational_from_json(const json& j) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_string()) return Rational::from_string(j.get<std::string>());
  throw ConfigError("expected a rational literal, got " + j.dump());
}

inline ExtendedCoord coord_from_json(const json& j) {
  if (j.is_number_integer()) return ExtendedCoord(Rational(j.get<std::int64_t>()));
  if (j.is_string()) return ExtendedCoord::from_string(j.get<std::string>());
  throw ConfigError("expected a coordinate literal, got " + j.dump());
}

inline json to_json(const Report& r) {
  json a = json::array();
  for (const Rational& p : r.points()) a.push_back(to_json(p));
  return a;
}

inline Report report_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("report must be an array");
  std::vector<Rational> pts;
  for (const auto& e : j) pts.push_back(rational_from_json(e));
  if (pts.empty()) throw ConfigError("report must be nonempty");
  return Report(std::move(pts));
}

inline json to_json(const Profile& p) {
  json a = json::array();
  for (const Report& r : p.reports()) a.push_back(to_json(r));
  return a;
}

inline Profile profile_from_json(const json& j) {
  if (!j.is_array() || j.empty())
    throw ConfigError("profile must be a nonempty array of reports");
  std::vector<Report> reports;
  for (const auto& e : j) reports.push_back(report_from_json(e));
  return Profile(std::move(reports));
}

namespace detail {

inline void reject_unknown_keys(const json& j,
                                std::initializer_list<const char*> allowed,
                                const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

}  // namespace detail

inline json to_json(const MechanismSpec& spec) {
  json j;
  j["kind"] = kind_name(spec.kind);
  if (!spec.phantoms.empty()) {
    json ph = json::array();
    for (const auto& p : spec.phantoms) ph.push_back(to_json(p));
    j["phantoms"] = ph;
  }
  j["beta"] = to_json(spec.beta);
  if (spec.thresholds) {
    j["t1"] = to_json(spec.thresholds->first);
    j["t2"] = to_json(spec.thresholds->second);
  }
  if (spec.constant) j["constant"] = to_json(*spec.constant);
  return j;
}

inline MechanismSpec mechanism_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("mechanism must be an object");
  detail::reject_unknown_keys(j, {"kind", "phantoms", "beta", "t1", "t2", "constant"},
                              "mechanism");
  if (!j.contains("kind")) throw ConfigError("mechanism needs a 'kind'");
  MechanismSpec spec;
  spec.kind = kind_from_name(j.at("kind").get<std::string>());
  if (j.contains("phantoms"))
    for (const auto& e : j.at("phantoms")) spec.phantoms.push_back(coord_from_json(e));
  if (j.contains("beta")) spec.beta = rational_from_json(j.at("beta"));
  if (j.contains("t1") != j.contains("t2"))
    throw ConfigError("two_threshold needs both t1 and t2");
  if (j.contains("t1"))
    spec.thresholds = {rational_from_json(j.at("t1")),
                       rational_from_json(j.at("t2"))};
  if (j.contains("constant")) spec.constant = coord_from_json(j.at("constant"));
  spec.finish();
  return spec;
}

inline json to_json(const ActionSet& a) {
  json actions = json::array();
  if (a.manipulation) actions.push_back("manipulation");
  if (a.replication) actions.push_back("replication");
  if (a.hiding) actions.push_back("hiding");
  return actions;
}

inline json to_json(const SearchConfig& cfg) {
  json j;
  j["n"] = cfg.n;
  json grid = json::array();
  for (const Rational& c : cfg.grid.coords) grid.push_back(to_json(c));
  j["grid"] = grid;
  j["max_true_size"] = cfg.max_true_size;
  j["actions"] = to_json(cfg.action_set);
  j["max_report_size"] = cfg.action_set.max_report_size;
  j["equal_cardinality"] = cfg.equal_cardinality;
  j["odd_true_sizes_only"] = cfg.odd_true_sizes_only;
  j["max_coalition"] = cfg.max_coalition;
  return j;
}

inline SearchConfig search_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("search must be an object");
  detail::reject_unknown_keys(
      j,
      {"n", "grid", "max_true_size", "actions", "max_report_size",
       "equal_cardinality", "odd_true_sizes_only", "max_coalition"},
      "search");
  SearchConfig cfg;
  if (!j.contains("n") || !j.contains("grid") || !j.contains("max_true_size"))
    throw ConfigError("search needs 'n', 'grid' and 'max_true_size'");
  cfg.n = j.at("n").get<std::size_t>();
  std::vector<Rational> coords;
  for (const auto& e : j.at("grid")) coords.push_back(rational_from_json(e));
  cfg.grid = Grid(std::move(coords));
  cfg.max_true_size = j.at("max_true_size").get<std::size_t>();
  ActionSet actions;
  if (j.contains("actions")) {
    for (const auto& e : j.at("actions")) {
      const std::string a = e.get<std::string>();
      if (a == "manipulation")
        actions.manipulation = true;
      else if (a == "replication")
        actions.replication = true;
      else if (a == "hiding")
        actions.hiding = true;
      else
        throw ConfigError("unknown action '" + a + "'");
    }
  } else {
    actions.manipulation = actions.replication = actions.hiding = true;
  }
  actions.max_report_size = j.contains("max_report_size")
                                ? j.at("max_report_size").get<std::size_t>()
                                : cfg.max_true_size + 1;
  cfg.action_set = actions;
  if (j.contains("equal_cardinality"))
    cfg.equal_cardinality = j.at("equal_cardinality").get<bool>();
  if (j.contains("odd_true_sizes_only"))
    cfg.odd_true_sizes_only = j.at("odd_true_sizes_only").get<bool>();
  if (j.contains("max_coalition"))
    cfg.max_coalition = j.at("max_coalition").get<std::size_t>();
  return cfg;
}

inline json to_json(const ViolationWitness& w) {
  json j;
  j["property"] = property_name(w.property);
  j["true_profile"] = to_json(w.true_profile);
  j["deviators"] = w.deviators;
  json devs = json::array();
  for (const Report& r : w.deviated_reports) devs.push_back(to_json(r));
  j["deviated_reports"] = devs;
  json lb = json::array(), la = json::array();
  for (const auto& l : w.losses_before) lb.push_back(to_json(l));
  for (const auto& l : w.losses_after) la.push_back(to_json(l));
  j["losses_before"] = lb;
  j["losses_after"] = la;
  j["output_before"] = to_json(w.output_before);
  j["output_after"] = to_json(w.output_after);
  return j;
}

inline ViolationWitness witness_from_json(const json& j) {
  detail::reject_unknown_keys(
      j,
      {"property", "true_profile", "deviators", "deviated_reports",
       "losses_before", "losses_after", "output_before", "output_after"},
      "witness");
  ViolationWitness w;
  w.property = property_from_name(j.at("property").get<std::string>());
  w.true_profile = profile_from_json(j.at("true_profile"));
  for (const auto& d : j.at("deviators"))
    w.deviators.push_back(d.get<std::size_t>());
  for (const auto& r : j.at("deviated_reports"))
    w.deviated_reports.push_back(report_from_json(r));
  for (const auto& l : j.at("losses_before"))
    w.losses_before.push_back(coord_from_json(l));
  for (const auto& l : j.at("losses_after"))
    w.losses_after.push_back(coord_from_json(l));
  w.output_before = coord_from_json(j.at("output_before"));
  w.output_after = coord_from_json(j.at("output_after"));
  return w;
}

inline json to_json(const ClaimResult& c) {
  return json{{"description", c.description},
              {"expected", c.expected},
              {"observed", c.observed},
              {"pass", c.pass}};
}

inline json to_json(const ScenarioReport& r) {
  json j;
  j["scenario"] = r.name;
  json claims = json::array();
  for (const auto& c : r.claims) claims.push_back(to_json(c));
  j["claims"] = claims;
  json ws = json::array();
  for (const auto& w : r.witnesses) ws.push_back(to_json(w));
  j["witnesses"] = ws;
  j["pass"] = r.all_pass();
  return j;
}

}  // namespace faciloc
