#pragma once

#include <chrono>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "faciloc/json_io.hpp"

namespace faciloc {

inline constexpr int kConfigVersion = 1;

enum class ReportFormat { Json, Csv };

inline ReportFormat format_from_name(const std::string& s) {
  if (s == "json") return ReportFormat::Json;
  if (s == "csv") return ReportFormat::Csv;
  throw ConfigError("unknown format '" + s + "' (expected json or csv)");
}

/// One verification campaign: a mechanism, a search space, and the checks to
/// run. Deserialized from a versioned config file; unknown keys are errors.
struct CampaignConfig {
  MechanismSpec mechanism;
  SearchConfig search;
  std::vector<Property> checks;
  ReportFormat format = ReportFormat::Json;
};

inline CampaignConfig campaign_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  detail::reject_unknown_keys(
      j, {"version", "mechanism", "search", "checks", "format"}, "config");
  if (!j.contains("version") || !j.at("version").is_number_integer() ||
      j.at("version").get<int>() != kConfigVersion)
    throw ConfigError("config requires \"version\": 1");
  if (!j.contains("mechanism")) throw ConfigError("config needs 'mechanism'");
  CampaignConfig cfg;
  cfg.mechanism = mechanism_from_json(j.at("mechanism"));
  if (j.contains("search")) cfg.search = search_from_json(j.at("search"));
  if (j.contains("checks"))
    for (const auto& c : j.at("checks"))
      cfg.checks.push_back(property_from_name(c.get<std::string>()));
  if (j.contains("format"))
    cfg.format = format_from_name(j.at("format").get<std::string>());
  return cfg;
}

struct CampaignReport {
  MechanismSpec mechanism;
  SearchConfig search;
  struct Entry {
    Property check;
    Verdict verdict;
  };
  std::vector<Entry> entries;
  std::int64_t elapsed_ms = 0;

  bool all_pass() const {
    for (const auto& e : entries)
      if (!e.verdict.pass) return false;
    return true;
  }
};

inline Verdict run_check(Property check, const MechanismSpec& mechanism,
                         const SearchConfig& search) {
  switch (check) {
    case Property::Strategyproof: return check_strategyproof(mechanism, search);
    case Property::GroupStrategyproof: return check_group_sp(mechanism, search);
    case Property::StrongGroupStrategyproof:
      return check_strong_group_sp(mechanism, search);
    case Property::Efficient: return check_efficient(mechanism, search);
    case Property::Anonymous: return check_anonymous(mechanism, search);
    case Property::Constant: return check_constant(mechanism, search);
  }
  throw std::logic_error("run_check: bad property");
}

/// Validates first (so breakpoint-off-grid style errors surface before any
/// enumeration), then runs every requested check.
inline CampaignReport run_campaign(const CampaignConfig& cfg,
                                   std::size_t threads = 0) {
  if (cfg.checks.empty()) throw ConfigError("config lists no checks");
  SearchConfig search = cfg.search;
  if (threads != 0) search.threads = threads;
  validate_config(cfg.mechanism, search);

  CampaignReport report;
  report.mechanism = cfg.mechanism;
  report.search = search;
  const auto t0 = std::chrono::steady_clock::now();
  for (const Property check : cfg.checks)
    report.entries.push_back({check, run_check(check, cfg.mechanism, search)});
  report.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
  return report;
}

inline json to_json(const CampaignReport& r) {
  json j;
  j["version"] = kConfigVersion;
  j["mechanism"] = to_json(r.mechanism);
  j["search"] = to_json(r.search);
  json verdicts = json::array();
  for (const auto& e : r.entries) {
    json v;
    v["check"] = property_name(e.check);
    v["pass"] = e.verdict.pass;
    v["space_size"] = e.verdict.space_size;
    if (e.verdict.witness) v["witness"] = to_json(*e.verdict.witness);
    verdicts.push_back(v);
  }
  j["verdicts"] = verdicts;
  j["elapsed_ms"] = r.elapsed_ms;
  return j;
}

namespace detail {

inline std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

/// CSV rendering carries the same exact strings as the JSON; a witness is
/// embedded as one quoted JSON cell.
inline std::string to_csv(const CampaignReport& r) {
  std::ostringstream os;
  os << "check,pass,space_size,elapsed_ms,witness\n";
  for (const auto& e : r.entries) {
    os << property_name(e.check) << "," << (e.verdict.pass ? "true" : "false")
       << "," << e.verdict.space_size << "," << r.elapsed_ms << ",";
    if (e.verdict.witness)
      os << detail::csv_quote(to_json(*e.verdict.witness).dump());
    os << "\n";
  }
  return os.str();
}

inline std::string to_csv(const ScenarioReport& r) {
  std::ostringstream os;
  os << "scenario,claim,expected,observed,pass\n";
  for (const auto& c : r.claims)
    os << r.name << "," << detail::csv_quote(c.description) << ","
       << detail::csv_quote(c.expected) << "," << detail::csv_quote(c.observed)
       << "," << (c.pass ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace faciloc
