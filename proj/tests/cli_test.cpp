#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

using namespace qdeform;
using namespace qdeform::cli;

namespace {

namespace fs = std::filesystem;

struct Outcome {
  int status;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "qdeform");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int s = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {s, out.str(), err.str()};
}

RunConfig parse(std::vector<std::string> args) {
  args.insert(args.begin(), "qdeform");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return parse_config(static_cast<int>(argv.size()), argv.data()).config;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("qdeform_cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(ConfigText, KeyValueWithComments) {
  const Settings s = read_config_text("# a comment\nq = 0.8\n\n  dt=0.5   # trailing\ncommand = fp-evolve\n");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s.at("q").value, "0.8");
  EXPECT_EQ(s.at("q").origin, "line 2");
  EXPECT_EQ(s.at("dt").value, "0.5");
  const RunConfig c = build_config(s);
  EXPECT_EQ(c.command, Command::fp_evolve);
  EXPECT_DOUBLE_EQ(c.q, 0.8);
  EXPECT_DOUBLE_EQ(c.numerics.dt, 0.5);
}

TEST(ConfigText, UnknownKeyNamesTheLine) {
  try {
    (void)read_config_text("q = 2\nwidth = 3\n");
    FAIL() << "expected UsageError";
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown key 'width' at line 2"), std::string::npos) << e.what();
  }
}

TEST(ConfigText, MissingEqualsIsAUsageError) {
  EXPECT_THROW((void)read_config_text("q 2\n"), UsageError);
}

TEST(ParseConfig, FlagsOverrideTheConfigFile) {
  const fs::path d = scratch_dir("precedence");
  {
    std::ofstream f(d / "run.cfg");
    f << "command = schrod-eigen\nq = 0.8\nlevels = 3\n";
  }
  const RunConfig c = parse({"--config", (d / "run.cfg").string(), "--q", "1.25"});
  EXPECT_EQ(c.command, Command::schrod_eigen);
  EXPECT_DOUBLE_EQ(c.q, 1.25);
  EXPECT_EQ(c.physics.levels, 3u);
}

TEST(ParseConfig, SubcommandAndDefaults) {
  const RunConfig c = parse({"fp-stationary"});
  EXPECT_EQ(c.command, Command::fp_stationary);
  EXPECT_DOUBLE_EQ(c.numerics.tol_rel, 1e-8);
  EXPECT_EQ(c.numerics.convention, DilatationConvention::argument_scaling);
  EXPECT_EQ(c.output.path, "-");
  EXPECT_FALSE(c.sweep.has_value());
  EXPECT_EQ(default_format(c.command), Format::csv);
  EXPECT_EQ(default_format(Command::verify), Format::json);
}

TEST(ParseConfig, NonPositiveQNamesTheFlag) {
  try {
    (void)parse({"eval", "--q", "-1"});
    FAIL() << "expected UsageError";
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("'q' (flag --q) must be positive, got -1"), std::string::npos) << e.what();
  }
  EXPECT_THROW((void)parse({"eval", "--q", "0"}), UsageError);
}

TEST(ParseConfig, MalformedValuesAreUsageErrors) {
  EXPECT_THROW((void)parse({"eval", "--q", "two"}), UsageError);
  EXPECT_THROW((void)parse({"eval", "--convention", "sideways"}), UsageError);
  EXPECT_THROW((void)parse({"eval", "--sweep", "q=1:2"}), UsageError);
  EXPECT_THROW((void)parse({"eval", "--sweep", "q=0.8:1.2:3"}), UsageError);  // sweep needs a file
  EXPECT_THROW((void)parse({"eval", "--no-such-flag", "1"}), UsageError);
  EXPECT_THROW((void)parse({}), UsageError);
}

TEST(Sweep, EvenlySpacedValuesAndFileNames) {
  const RunConfig c = parse({"eval", "--sweep", "q=0.8:1.25:4", "-o", "out.csv"});
  ASSERT_TRUE(c.sweep.has_value());
  const auto v = c.sweep->values();
  ASSERT_EQ(v.size(), 4u);
  EXPECT_DOUBLE_EQ(v.front(), 0.8);
  EXPECT_DOUBLE_EQ(v.back(), 1.25);
  EXPECT_EQ(sweep_path("out.csv", 0.8), "out_q0.8.csv");
  EXPECT_EQ(sweep_path("dir/run.json", 1.25), (fs::path("dir") / "run_q1.25.json").string());
}

TEST(Run, CsvHasHeaderThenSchemaLine) {
  const Outcome r = invoke({"fp-stationary", "--q", "1.25"});
  ASSERT_EQ(r.status, 0) << r.err;
  std::istringstream lines(r.out);
  std::string header, schema, first_row;
  std::getline(lines, header);
  std::getline(lines, schema);
  EXPECT_EQ(header, "x,f_st,E_q_domain_flag");
  EXPECT_EQ(schema, "# schema-version 1");
  while (std::getline(lines, first_row) && first_row.rfind("#", 0) == 0) {
  }
  EXPECT_EQ(std::count(first_row.begin(), first_row.end(), ','), 2) << first_row;
}

TEST(Run, JsonArtifactsParse) {
  for (const char* cmd : {"schrod-eigen", "schrod-free"}) {
    const Outcome r = invoke({cmd, "--q", "0.8"});
    ASSERT_EQ(r.status, 0) << cmd << ": " << r.err;
    const auto j = nlohmann::ordered_json::parse(r.out);
    EXPECT_TRUE(j.is_object()) << cmd;
  }
}

TEST(Run, EveryCommandIsDeterministic) {
  for (std::string_view cmd : kCommandNames) {
    if (cmd == "verify") continue;  // covered by the acceptance binary
    const Outcome a = invoke({std::string(cmd), "--q", "0.8"});
    const Outcome b = invoke({std::string(cmd), "--q", "0.8"});
    EXPECT_EQ(a.status, 0) << cmd << ": " << a.err;
    EXPECT_FALSE(a.out.empty()) << cmd;
    EXPECT_EQ(a.out, b.out) << cmd;
  }
}

TEST(Run, ExitCodes) {
  EXPECT_EQ(invoke({"eval", "--q", "-1"}).status, 1);
  EXPECT_EQ(invoke({"verify", "--format", "csv"}).status, 1);
  const Outcome bad_path = invoke({"eval", "-o", "/nonexistent-dir/x/out.csv"});
  EXPECT_EQ(bad_path.status, 1);
  EXPECT_NE(bad_path.err.find("cannot write output path"), std::string::npos) << bad_path.err;
  const Outcome help = invoke({"--help"});
  EXPECT_EQ(help.status, 0);
  EXPECT_NE(help.out.find("--q"), std::string::npos);
  EXPECT_EQ(invoke({"--version"}).out, std::string(QDEFORM_VERSION) + "\n");
}

TEST(Run, SweepWritesOneFilePerPoint) {
  const fs::path d = scratch_dir("sweep");
  const Outcome r = invoke({"fp-stationary", "--sweep", "q=0.8:1.25:3", "-o", (d / "st.csv").string()});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  for (const char* name : {"st_q0.8.csv", "st_q1.025.csv", "st_q1.25.csv"}) {
    const std::string text = slurp(d / name);
    EXPECT_EQ(text.rfind("x,f_st,E_q_domain_flag\n# schema-version 1\n", 0), 0u) << name;
  }
  // Each file matches a single run at that q.
  const Outcome single = invoke({"fp-stationary", "--q", "0.8"});
  EXPECT_EQ(slurp(d / "st_q0.8.csv"), single.out);
}
