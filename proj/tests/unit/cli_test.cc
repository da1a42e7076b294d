#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <regex>
#include <sstream>
#include <string>

#include "app/commands.h"
#include "app/config.h"
#include "needleperc/process.h"

namespace needleperc::app {
namespace {

namespace fs = std::filesystem;

struct ExecResult {
  int code = -1;
  std::string out;
};

// Runs the shipped binary with stderr folded into stdout.
ExecResult Exec(const std::string& args) {
  const std::string cmd = std::string(NEEDLE_PERC_BIN) + " " + args + " 2>&1";
  ExecResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) r.out += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Json Load(const std::string& name) {
  std::ifstream in(fs::path(NEEDLEPERC_CONFIG_DIR) / name);
  return Json::parse(in);
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("needleperc_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void RunIn(const Json& config, const fs::path& dir, int threads = 1) {
  Invocation inv;
  inv.config = config;
  inv.out_dir = dir;
  inv.threads = threads;
  std::ostringstream log;
  RunConfig(inv, log);
}

Json SmallSimulate() {
  Json c = Load("simulate_two_state.json");
  c["trials"] = 300;
  return c;
}

TEST(Binary, EmptyLambdaGridIsAUsageError) {
  TempDir dir;
  Json c = Load("integrate_two_state.json");
  c["lambdas"] = Json::array();
  const fs::path cfg = dir.path() / "empty.json";
  std::ofstream(cfg) << c.dump();
  const ExecResult r = Exec("integrate --config " + cfg.string() + " --out " + dir.path().string());
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.out.find("must not be empty"), std::string::npos) << r.out;
}

TEST(Binary, UnknownSubcommandAndMissingConfig) {
  EXPECT_EQ(Exec("bogus").code, kExitUsage);
  EXPECT_EQ(Exec("simulate --config /nonexistent/cfg.json").code, kExitUsage);
  EXPECT_EQ(Exec("").code, kExitUsage);
}

TEST(Binary, ConfigMustMatchSubcommand) {
  const std::string cfg = std::string(NEEDLEPERC_CONFIG_DIR) + "/classify_a3_b4.json";
  EXPECT_EQ(Exec("simulate --config " + cfg).code, kExitUsage);
}

TEST(Binary, SelftestPassesAndReportsSeeds) {
  const ExecResult r = Exec("selftest");
  EXPECT_EQ(r.code, kExitOk) << r.out;
  EXPECT_NE(r.out.find("selftest seed 20240611"), std::string::npos);
  EXPECT_NE(r.out.find("PASS geometry"), std::string::npos);
  EXPECT_TRUE(std::regex_search(r.out, std::regex(R"(seed=\d+)")));
}

TEST(Binary, InjectedFaultFailsNamingTheKernel) {
  const ExecResult r = Exec("selftest --inject-fault union_area");
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.out.find("FAIL geometry"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("case:"), std::string::npos);
}

TEST(Binary, ClassifyPrintsTheVerdict) {
  TempDir dir;
  const std::string cfg = std::string(NEEDLEPERC_CONFIG_DIR) + "/classify_a3_b4.json";
  const ExecResult r = Exec("classify --config " + cfg + " --out " + dir.path().string());
  EXPECT_EQ(r.code, kExitOk) << r.out;
  const Json v = Json::parse(Slurp(dir.path() / "verdict.json"));
  ASSERT_EQ(v["survivors"].size(), 1u);
  EXPECT_EQ(v["survivors"][0], "0,alpha");
  EXPECT_DOUBLE_EQ(v["rates"]["absent_alpha"].get<double>(), 6.75);
  EXPECT_DOUBLE_EQ(v["rates"]["absent_0"].get<double>(), 10.0);
}

TEST(RunConfig, RejectsUnknownSubcommandAndStrayKeys) {
  TempDir dir;
  EXPECT_THROW(RunIn(Json{{"subcommand", "nope"}}, dir.path()), UsageError);
  Json c = SmallSimulate();
  c["lamda"] = 3.0;
  EXPECT_THROW(RunIn(c, dir.path()), UsageError);
  Json neg = SmallSimulate();
  neg["lambda"] = -1.0;
  EXPECT_THROW(RunIn(neg, dir.path()), UsageError);
}

TEST(Integrate, RatioTableHeaderIsExact) {
  TempDir dir;
  Json c = Load("integrate_two_state.json");
  c["budget"] = 2000;
  c["lambdas"] = {5};
  RunIn(c, dir.path());
  std::ifstream in(dir.path() / "integrate.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "lambda,composition,estimate,stderr,asymptotic,ratio");
  EXPECT_TRUE(fs::exists(dir.path() / "conditional.csv"));
  EXPECT_TRUE(fs::exists(dir.path() / "manifest.json"));
}

TEST(Simulate, SnapshotDrawsThePalmSample) {
  TempDir dir;
  const Json c = SmallSimulate();
  RunIn(c, dir.path());
  const std::string svg = Slurp(dir.path() / "snapshot.svg");
  std::size_t count = 0;
  for (std::size_t at = svg.find("class=\"needle\""); at != std::string::npos;
       at = svg.find("class=\"needle\"", at + 1)) {
    ++count;
  }
  process::SimConfig sc;
  sc.lambda = 2.0;
  sc.marks = formulas::ToMarkLaw(formulas::TwoStateParams{std::numbers::pi / 2, 0.5, 0.5, 0.5});
  sc.window = process::DefaultWindow(sc.marks, sc.lambda);
  sc.seed = process::StreamSeed(7, 0);
  EXPECT_EQ(count, process::PalmSample(sc).size());
}

TEST(Simulate, SvgIsSelfContained) {
  TempDir dir;
  RunIn(SmallSimulate(), dir.path());
  const std::string svg = Slurp(dir.path() / "snapshot.svg");
  EXPECT_EQ(svg.rfind("<svg", 0) == 0 || svg.rfind("<?xml", 0) == 0, true);
  EXPECT_NE(svg.find("xmlns=\"http://www.w3.org/2000/svg\""), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(svg.find("href="), std::string::npos);
  EXPECT_EQ(svg.find("<script"), std::string::npos);
}

TEST(Simulate, ManifestRecordsSeedAndHashes) {
  TempDir dir;
  RunIn(SmallSimulate(), dir.path());
  const Json m = Json::parse(Slurp(dir.path() / "manifest.json"));
  EXPECT_EQ(m["seed"], 7);
  ASSERT_TRUE(m["files"].is_array());
  for (const auto& f : m["files"]) {
    EXPECT_TRUE(fs::exists(dir.path() / f["name"].get<std::string>()));
    EXPECT_EQ(f["sha256"].get<std::string>().size(), 64u);
  }
}

TEST(Simulate, SeedOverrideChangesOutput) {
  TempDir a, b;
  Invocation inv;
  inv.config = SmallSimulate();
  inv.out_dir = a.path();
  std::ostringstream log;
  RunConfig(inv, log);
  inv.out_dir = b.path();
  inv.seed = 8;
  RunConfig(inv, log);
  EXPECT_NE(Slurp(a.path() / "histogram.csv"), Slurp(b.path() / "histogram.csv"));
  EXPECT_EQ(Json::parse(Slurp(b.path() / "manifest.json"))["seed"], 8);
}

TEST(Determinism, RepeatedRunsAndThreadCountsMatch) {
  for (const char* name : {"simulate_two_state.json", "integrate_two_state.json"}) {
    Json c = Load(name);
    if (c.contains("trials")) c["trials"] = 300;
    if (c.contains("budget")) c["budget"] = 2000;
    TempDir a, b, t;
    RunIn(c, a.path());
    RunIn(c, b.path());
    RunIn(c, t.path(), 3);
    for (const auto& entry : fs::directory_iterator(a.path())) {
      const auto file = entry.path().filename();
      if (file == "manifest.json") continue;
      EXPECT_EQ(Slurp(a.path() / file), Slurp(b.path() / file)) << name << " " << file;
      EXPECT_EQ(Slurp(a.path() / file), Slurp(t.path() / file)) << name << " " << file;
    }
  }
}

TEST(PhaseDiagram, GridSweepWritesOneRowPerCell) {
  TempDir dir;
  Json c = Load("phase_a_b.json");
  c["a"] = {0.5, 4.0, 6};
  c["b"] = {0.5, 4.0, 6};
  RunIn(c, dir.path());
  std::ifstream in(dir.path() / "phase.csv");
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 36);
  EXPECT_TRUE(fs::exists(dir.path() / "phase.svg"));
  EXPECT_FALSE(fs::exists(dir.path() / "boundary.csv"));
}

TEST(PhaseDiagram, ProbabilitySweepAddsTheBoundaryCurve) {
  TempDir dir;
  Json c = Load("phase_a_p0.json");
  c["p0"] = {0.1, 0.9, 5};
  c["a"] = {0.5, 3.0, 5};
  RunIn(c, dir.path());
  std::ifstream in(dir.path() / "boundary.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "p0,a_boundary");
  EXPECT_NE(Slurp(dir.path() / "phase.svg").find("</svg>"), std::string::npos);
}

}  // namespace
}  // namespace needleperc::app
