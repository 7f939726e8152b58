#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "nlohmann/json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" TRANSSHIP_CLI_PATH "\" " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, p)) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path tmp(const std::string& name) {
  const fs::path dir = TRANSSHIP_TEST_TMP;
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("bounds").code, 2);
  EXPECT_EQ(run("bounds --f -1").code, 2);
  EXPECT_EQ(run("bounds --f 1 --metric chebyshev").code, 2);
  EXPECT_EQ(run("sweep --steps 1").code, 2);
  EXPECT_EQ(run("measure-angles --solution /nonexistent/solution.json").code, 4);
  EXPECT_EQ(run("tessellate --out-json /nonexistent/dir/t.json").code, 4);
  EXPECT_EQ(run("bounds --f 1 --C 1").code, 0);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, BoundsJsonCarriesResolvedConfig) {
  const auto path = tmp("bounds.json");
  const auto r = run("bounds --f 1 --C 1 --json " + path.string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(slurp(path));
  EXPECT_NEAR(j["upper_bound"]["cost"].get<double>(), 1.925236257, 1e-9);
  EXPECT_LT(j["lower_bound"]["cost"].get<double>(), j["upper_bound"]["cost"].get<double>());
  EXPECT_EQ(j["meta"]["command"], "bounds");
  EXPECT_EQ(j["meta"]["C"], "1");
  EXPECT_EQ(j["meta"]["metric"], "euclid");
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const auto cfg = tmp("bounds.toml");
  std::ofstream(cfg) << "[bounds]\nf = 2\nC = 3\n";
  const auto path = tmp("bounds_cfg.json");
  ASSERT_EQ(run("--config " + cfg.string() + " bounds --C 1 --json " + path.string()).code, 0);
  const auto j = nlohmann::json::parse(slurp(path));
  EXPECT_EQ(j["meta"]["f"], "2");
  EXPECT_EQ(j["meta"]["C"], "1");
}

TEST(Cli, SweepRowsHeaderAndDeterminism) {
  const auto a = tmp("sweep_a.csv"), b = tmp("sweep_b.csv"), svg = tmp("sweep.svg");
  ASSERT_EQ(run("sweep --steps 200 --out " + a.string() + " --plot " + svg.string()).code, 0);
  ASSERT_EQ(run("sweep --steps 200 --out " + b.string()).code, 0);
  const std::string s = slurp(a);
  std::istringstream in(s);
  std::string line;
  std::size_t comments = 0, rows = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      ++comments;
    } else if (!header) {
      EXPECT_EQ(line, "label,r,alpha_deg,alpha_bar_deg,g,cost,area_per_facility");
      header = true;
    } else {
      ++rows;
    }
  }
  EXPECT_GT(comments, 5u);
  EXPECT_EQ(rows, 600u);
  // Only the output path differs between the two runs.
  auto strip = [](std::string t) {
    std::istringstream is(t);
    std::string l, out;
    while (std::getline(is, l))
      if (l.rfind("# out", 0) != 0 && l.rfind("# plot =", 0) != 0) out += l + "\n";
    return out;
  };
  EXPECT_EQ(strip(s), strip(slurp(b)));
  EXPECT_NE(slurp(svg).find("<polyline"), std::string::npos);
}

TEST(Cli, TessellateVerifiesAndExports) {
  const auto js = tmp("tess.json"), svg = tmp("tess.svg");
  const auto r = run("tessellate --metric euclid --r 1 --verify-samples 200000 --out-json " + js.string() +
                     " --out-svg " + svg.string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("verification passed"), std::string::npos);
  EXPECT_NE(r.out.find("0 uncovered, 0 overlapping, 0 wrong owner"), std::string::npos);
  const auto j = nlohmann::json::parse(slurp(js));
  EXPECT_EQ(j["facilities"].size(), 36u);
  EXPECT_EQ(j["meta"]["command"], "tessellate");
  EXPECT_NE(slurp(svg).find("<!-- command = tessellate -->"), std::string::npos);
}

TEST(Cli, SolveGridMatchesOracleAndSeedEnv) {
  const auto r = run("solve-grid --m 4 --f 3 --C 1 --oracle --runs 2");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("(matched)"), std::string::npos);
  const auto a = tmp("grid_env.json"), b = tmp("grid_flag.json");
  ASSERT_EQ(run("solve-grid --m 5 --f 3 --out " + a.string(), "TRANSSHIP_SEED=7").code, 0);
  ASSERT_EQ(run("solve-grid --m 5 --f 3 --seed 7 --out " + b.string()).code, 0);
  const auto ja = nlohmann::json::parse(slurp(a)), jb = nlohmann::json::parse(slurp(b));
  EXPECT_EQ(ja["meta"]["seed"], "7");
  EXPECT_EQ(ja["facilities"], jb["facilities"]);
  EXPECT_EQ(ja["objective"], jb["objective"]);
}

TEST(Cli, ExportMipCounts) {
  const auto lp = tmp("m2.lp");
  const auto r = run("export-mip --m 2 --out " + lp.string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("variables: 4 X, 16 Y, 16 Z, 4 u"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("4 assignment, 16 linking, 4 in-degree, 4 out-degree"), std::string::npos) << r.out;
  const std::string first = slurp(lp);
  ASSERT_EQ(run("export-mip --m 2 --out " + lp.string()).code, 0);
  EXPECT_EQ(first, slurp(lp));
}

TEST(Cli, MeasureAnglesOnSolvedGrid) {
  const auto sol = tmp("grid_small.json");
  ASSERT_EQ(run("solve-grid --m 4 --f 3 --out " + sol.string()).code, 0);
  // A 4x4 grid has no interior cells, which is reported as a usage problem.
  EXPECT_EQ(run("measure-angles --solution " + sol.string()).code, 2);
  const auto bad = tmp("bad.json");
  std::ofstream(bad) << "{ not json";
  EXPECT_EQ(run("measure-angles --solution " + bad.string()).code, 4);
}

TEST(Cli, InventoryWithoutHoldingCostsHasNoDifference) {
  const auto out = tmp("inv.csv");
  ASSERT_EQ(run("inventory --b 0 --h 0 --r 0 1 5 --out " + out.string()).code, 0);
  std::istringstream in(slurp(out));
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0 || line.rfind("metric,", 0) == 0) continue;
    ++rows;
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "0") << line;
  }
  EXPECT_EQ(rows, 6u);
}
