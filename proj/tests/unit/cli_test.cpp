// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Out {
  int status;
  std::string text;
};

Out sh(const std::string& args, const std::string& stdin_text = "") {
  std::string cmd = std::string(SIMUHOME_TOOL_PATH) + " " + args + " 2>&1";
  if (!stdin_text.empty()) cmd = "echo '" + stdin_text + "' | " + cmd;
  FILE* p = popen(cmd.c_str(), "r");
  std::string text;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) text.append(buf, n);
  const int rc = pclose(p);
  return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, text};
}

std::string slurp(const fs::path& f) {
  std::ifstream in(f, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, GenRunEvalRoundTrip) {
  const auto dir = fs::temp_directory_path() / "simuhome_cli";
  fs::remove_all(dir);
  const auto bench = (dir / "bench").string();
  ASSERT_EQ(sh("gen --qt qt3,qt1_if --count 2 --seed 11 --out " + bench).status, 0);
  const auto manifest = json::parse(slurp(dir / "bench" / "manifest.json"));
  EXPECT_EQ(manifest.at("episodes").size(), 4u);

  const auto run = sh("run --episodes " + bench + " --provider golden --out " + (dir / "golden").string());
  ASSERT_EQ(run.status, 0) << run.text;
  EXPECT_NE(run.text.find("overall                            1.000"), std::string::npos) << run.text;

  const auto ev = sh("eval --episodes " + bench + " --traces " + (dir / "golden").string() + " --out " +
                     (dir / "rescored").string());
  ASSERT_EQ(ev.status, 0) << ev.text;
  EXPECT_EQ(slurp(dir / "rescored" / "summary.txt"), slurp(dir / "golden" / "summary.txt"));

  const auto ep = manifest.at("episodes").at(0).at("file").get<std::string>();
  const auto stdio = sh("serve --home " + (dir / "bench" / ep).string(), R"({"id": 3, "tool": "get_current_time", "args": {}})");
  ASSERT_EQ(stdio.status, 0) << stdio.text;
  EXPECT_EQ(json::parse(stdio.text).at("id"), 3);
  fs::remove_all(dir);
}

TEST(Cli, ConfigErrorsExitWithTwo) {
  const auto dir = fs::temp_directory_path();
  EXPECT_EQ(sh("gen --qt qt9 --count 1 --out " + (dir / "simuhome_cli_bad").string()).status, 2);
  EXPECT_NE(sh("run").status, 0);
  EXPECT_NE(sh("bogus").status, 0);
}
