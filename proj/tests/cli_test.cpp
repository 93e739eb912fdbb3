#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path temp_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "faciloc_cli_test";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

CliResult run_cli(const std::string& args) {
  const fs::path out = temp_dir() / "stdout.txt";
  const fs::path err = temp_dir() / "stderr.txt";
  const std::string cmd = std::string(FACILOC_CLI_PATH) + " " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WEXITSTATUS(status);
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path write_config(const std::string& name, const std::string& content) {
  const fs::path p = temp_dir() / name;
  std::ofstream(p) << content;
  return p;
}

TEST(Cli, EvalRepresentativeMedian) {
  const auto cfg = write_config("eval_rm.json", R"({
    "version": 1,
    "mechanism": {"kind": "representative_median", "phantoms": [0, 10], "beta": 1}
  })");
  const CliResult r =
      run_cli("eval --config " + cfg.string() + " --profile [[2,4],[2],[4]]");
  EXPECT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(r.out, "2\nlosses: 2 0 2\n");
}

TEST(Cli, EvalConstant) {
  const auto cfg = write_config("eval_const.json", R"({
    "version": 1,
    "mechanism": {"kind": "constant", "constant": 3}
  })");
  const CliResult r =
      run_cli("eval --config " + cfg.string() + " --profile [[0],[9,9]]");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out.substr(0, 2), "3\n");
}

TEST(Cli, EvalPooledPhantomInstance) {
  const auto cfg = write_config("eval_pooled.json", R"({
    "version": 1,
    "mechanism": {"kind": "pooled_phantom_median",
                  "phantoms": [0, 2, 2, 2, 2, 2]}
  })");
  const CliResult r =
      run_cli("eval --config " + cfg.string() + " --profile [[0],[1,1,1,2]]");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out, "2\nlosses: 2 3\n");
}

TEST(Cli, EvalMalformedConfigExitsTwo) {
  const auto cfg = write_config("broken.json", "{not json");
  const CliResult r =
      run_cli("eval --config " + cfg.string() + " --profile [[1]]");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("config error"), std::string::npos);
}

TEST(Cli, EvalUnknownKeyExitsTwo) {
  const auto cfg = write_config("unknown_key.json", R"({
    "version": 1,
    "mechanism": {"kind": "pooled_optimal", "gamma": 1}
  })");
  const CliResult r =
      run_cli("eval --config " + cfg.string() + " --profile [[1]]");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("unknown key"), std::string::npos);
}

TEST(Cli, VerifyPassingCampaignExitsZero) {
  const auto cfg = write_config("thm3.json", R"({
    "version": 1,
    "mechanism": {"kind": "representative_median", "phantoms": [2], "beta": "1/2"},
    "search": {"n": 2, "grid": [0, 1, 2, 3, 4], "max_true_size": 2,
               "max_report_size": 3, "max_coalition": 2},
    "checks": ["sp", "group_sp", "anonymous"]
  })");
  const fs::path report_path = temp_dir() / "thm3_report.json";
  const CliResult r = run_cli("verify --config " + cfg.string() + " --out " +
                              report_path.string() + " --threads 2");
  EXPECT_EQ(r.exit_code, 0) << r.err;
  const json report = json::parse(slurp(report_path));
  EXPECT_EQ(report.at("verdicts").size(), 3u);
  for (const auto& v : report.at("verdicts")) {
    EXPECT_TRUE(v.at("pass").get<bool>());
    EXPECT_FALSE(v.contains("witness"));
    EXPECT_EQ(v.at("space_size").get<int>(), 20 * 20);  // (5 + 15)^2
  }
  EXPECT_TRUE(report.contains("elapsed_ms"));
}

TEST(Cli, VerifyWitnessRoundTripsThroughEval) {
  const auto cfg = write_config("relabeled.json", R"({
    "version": 1,
    "mechanism": {"kind": "weighted_relabeled_median", "beta": "1/2"},
    "search": {"n": 2, "grid": [0, 1, 2, 3, 4], "max_true_size": 3,
               "actions": ["replication"], "max_report_size": 6},
    "checks": ["sp"]
  })");
  const fs::path report_path = temp_dir() / "relabeled_report.json";
  const CliResult r = run_cli("verify --config " + cfg.string() + " --out " +
                              report_path.string());
  EXPECT_EQ(r.exit_code, 1);  // witness found
  const json report = json::parse(slurp(report_path));
  const json& verdict = report.at("verdicts").at(0);
  ASSERT_TRUE(verdict.contains("witness"));
  const json& witness = verdict.at("witness");

  // replay the recorded true and deviated profiles through `eval`
  const json true_profile = witness.at("true_profile");
  json deviated = true_profile;
  const auto deviators = witness.at("deviators");
  for (std::size_t k = 0; k < deviators.size(); ++k)
    deviated[deviators[k].get<std::size_t>()] = witness.at("deviated_reports")[k];

  const auto mech_cfg = write_config("relabeled_mech.json", R"({
    "version": 1,
    "mechanism": {"kind": "weighted_relabeled_median", "beta": "1/2"}
  })");
  const CliResult before = run_cli("eval --config " + mech_cfg.string() +
                                   " --profile '" + true_profile.dump() + "'");
  const CliResult after = run_cli("eval --config " + mech_cfg.string() +
                                  " --profile '" + deviated.dump() + "'");
  EXPECT_EQ(before.exit_code, 0);
  EXPECT_EQ(after.exit_code, 0);
  EXPECT_EQ(before.out.substr(0, before.out.find('\n')),
            witness.at("output_before").get<std::string>());
  EXPECT_EQ(after.out.substr(0, after.out.find('\n')),
            witness.at("output_after").get<std::string>());
}

TEST(Cli, VerifyBreakpointOffGridExitsTwo) {
  const auto cfg = write_config("offgrid.json", R"({
    "version": 1,
    "mechanism": {"kind": "representative_median", "phantoms": [7], "beta": 1},
    "search": {"n": 2, "grid": [0, 1, 2], "max_true_size": 1},
    "checks": ["sp"]
  })");
  const CliResult r = run_cli("verify --config " + cfg.string());
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("breakpoint not on grid"), std::string::npos);
}

TEST(Cli, VerifyCsvFormat) {
  const auto cfg = write_config("csv_campaign.json", R"({
    "version": 1,
    "mechanism": {"kind": "constant", "constant": 1},
    "search": {"n": 2, "grid": [0, 1], "max_true_size": 1},
    "checks": ["sp", "efficient"],
    "format": "csv"
  })");
  const CliResult r = run_cli("verify --config " + cfg.string());
  EXPECT_EQ(r.exit_code, 1);  // constant is inefficient somewhere
  EXPECT_NE(r.out.find("check,pass,space_size,elapsed_ms,witness"),
            std::string::npos);
  EXPECT_NE(r.out.find("sp,true"), std::string::npos);
  EXPECT_NE(r.out.find("efficient,false"), std::string::npos);
}

TEST(Cli, ScenarioSingleAndAll) {
  CliResult r = run_cli("scenario thm1_nonidentifying --threads 2");
  EXPECT_EQ(r.exit_code, 0) << r.err;
  const json report = json::parse(r.out);
  EXPECT_EQ(report.at("scenario"), "thm1_nonidentifying");
  bool found = false;
  for (const auto& c : report.at("claims"))
    if (c.at("observed") == "3 -> 1") found = true;
  EXPECT_TRUE(found);

  r = run_cli("scenario all --threads 2");
  EXPECT_EQ(r.exit_code, 0) << r.err;
  const json all = json::parse(r.out);
  EXPECT_EQ(all.size(), 7u);
}

TEST(Cli, ScenarioUnknownNameExitsTwo) {
  const CliResult r = run_cli("scenario nosuch");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("unknown scenario"), std::string::npos);
}

TEST(Cli, SeedOrderFlagOnlyAcceptsLex) {
  CliResult r = run_cli("scenario thm1_nonidentifying --seed-order lex");
  EXPECT_EQ(r.exit_code, 0);
  r = run_cli("scenario thm1_nonidentifying --seed-order random");
  EXPECT_EQ(r.exit_code, 2);
}

TEST(Cli, ListMechanisms) {
  const CliResult r = run_cli("list-mechanisms");
  EXPECT_EQ(r.exit_code, 0);
  for (const char* kind :
       {"pooled_phantom_median", "representative_median", "two_threshold",
        "constant", "weighted_relabeled_median", "pooled_optimal"})
    EXPECT_NE(r.out.find(kind), std::string::npos) << kind;
}

}  // namespace
