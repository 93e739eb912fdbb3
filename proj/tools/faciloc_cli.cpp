#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "faciloc/campaign.hpp"
#include "faciloc/json_io.hpp"
#include "faciloc/scenarios.hpp"

namespace {

using faciloc::json;

constexpr int kExitPass = 0;
constexpr int kExitViolation = 1;
constexpr int kExitConfigError = 2;

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw faciloc::ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw faciloc::ConfigError("malformed JSON in '" + path + "': " + e.what());
  }
}

void write_output(const std::optional<std::string>& out_path,
                  const std::string& content) {
  if (!out_path) {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << "\n";
    return;
  }
  std::ofstream out(*out_path);
  if (!out)
    throw faciloc::ConfigError("cannot write report to '" + *out_path + "'");
  out << content;
}

int cmd_eval(const std::string& config_path, const std::string& profile_literal) {
  const json config = load_json_file(config_path);
  const faciloc::CampaignConfig campaign = faciloc::campaign_from_json(config);
  json profile_json;
  try {
    profile_json = json::parse(profile_literal);
  } catch (const json::parse_error& e) {
    throw faciloc::ConfigError(std::string("malformed profile literal: ") +
                               e.what());
  }
  const faciloc::Profile profile = faciloc::profile_from_json(profile_json);
  const faciloc::ExtendedCoord out =
      faciloc::evaluate(campaign.mechanism, profile);
  std::cout << out.to_string() << "\n";
  std::cout << "losses:";
  for (const faciloc::Report& r : profile.reports())
    std::cout << " " << faciloc::loss(out, r).to_string();
  std::cout << "\n";
  return kExitPass;
}

int cmd_verify(const std::string& config_path,
               const std::optional<std::string>& out_path,
               const std::optional<std::string>& format_flag,
               std::size_t threads) {
  const faciloc::CampaignConfig campaign =
      faciloc::campaign_from_json(load_json_file(config_path));
  faciloc::ReportFormat format = campaign.format;
  if (format_flag) format = faciloc::format_from_name(*format_flag);

  const faciloc::CampaignReport report =
      faciloc::run_campaign(campaign, threads);
  write_output(out_path, format == faciloc::ReportFormat::Json
                             ? faciloc::to_json(report).dump(2)
                             : faciloc::to_csv(report));
  return report.all_pass() ? kExitPass : kExitViolation;
}

int cmd_scenario(const std::string& name,
                 const std::optional<std::string>& out_path,
                 const std::optional<std::string>& format_flag,
                 std::size_t threads) {
  const faciloc::ReportFormat format =
      format_flag ? faciloc::format_from_name(*format_flag)
                  : faciloc::ReportFormat::Json;
  std::vector<std::string> names;
  if (name == "all")
    names = faciloc::scenario_names();
  else
    names.push_back(name);

  bool all_pass = true;
  std::string content;
  json json_reports = json::array();
  for (const std::string& n : names) {
    const faciloc::ScenarioReport report = faciloc::run_scenario(n, threads);
    all_pass = all_pass && report.all_pass();
    if (format == faciloc::ReportFormat::Json)
      json_reports.push_back(faciloc::to_json(report));
    else
      content += faciloc::to_csv(report);
  }
  if (format == faciloc::ReportFormat::Json)
    content = (names.size() == 1 ? json_reports.front() : json_reports).dump(2);
  write_output(out_path, content);
  return all_pass ? kExitPass : kExitViolation;
}

int cmd_list_mechanisms() {
  std::cout << "pooled_phantom_median      phantoms: N+1 (N = total reported "
               "points), beta unused\n"
            << "representative_median      phantoms: n-1, beta in [0,1]\n"
            << "two_threshold              phantoms: n+1, t1 < t2, beta in [0,1]\n"
            << "constant                   constant: coordinate or +-inf\n"
            << "weighted_relabeled_median  beta in [0,1]\n"
            << "pooled_optimal             beta in [0,1]\n";
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Facility location mechanisms for agents controlling multiple "
      "locations, with exhaustive strategyproofness and efficiency "
      "verification over finite grids."};
  app.require_subcommand(1);

  std::string config_path, profile_literal, scenario_name;
  std::optional<std::string> out_path, format_flag;
  std::size_t threads = 0;
  std::string seed_order = "lex";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_path, "write the report to this path");
    cmd->add_option("--format", format_flag, "report format: json or csv");
    cmd->add_option("--threads", threads, "worker thread cap (0 = all cores)");
    cmd->add_option("--seed-order", seed_order,
                    "enumeration order; only 'lex' is defined");
  };

  CLI::App* eval = app.add_subcommand(
      "eval", "evaluate a mechanism on one profile and print per-agent losses");
  eval->add_option("--config", config_path, "mechanism config file")->required();
  eval->add_option("--profile", profile_literal,
                   "profile literal, e.g. [[2,4],[2],[4]]")
      ->required();
  add_common(eval);

  CLI::App* verify =
      app.add_subcommand("verify", "run a verification campaign from a config");
  verify->add_option("--config", config_path, "campaign config file")->required();
  add_common(verify);

  CLI::App* scenario = app.add_subcommand(
      "scenario", "run a named canned scenario (or 'all') and print its report");
  scenario->add_option("name", scenario_name, "scenario name or 'all'")
      ->required();
  add_common(scenario);

  app.add_subcommand("list-mechanisms", "print the mechanism catalog");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfigError;
  }

  try {
    if (seed_order != "lex")
      throw faciloc::ConfigError("unsupported --seed-order '" + seed_order +
                                 "' (only 'lex' is defined)");
    if (eval->parsed()) return cmd_eval(config_path, profile_literal);
    if (verify->parsed())
      return cmd_verify(config_path, out_path, format_flag, threads);
    if (scenario->parsed())
      return cmd_scenario(scenario_name, out_path, format_flag, threads);
    return cmd_list_mechanisms();
  } catch (const faciloc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}
