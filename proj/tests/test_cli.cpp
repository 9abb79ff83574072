// Copyright 2026 The diamondlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <sstream>

#include "diamondlab/cli.hpp"

namespace diamondlab::cli {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "diamondlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream os, es;
  const int code = main(static_cast<int>(argv.size()), argv.data(), os, es);
  return {code, os.str(), es.str()};
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("diamondlab_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::vector<std::string> csv_fields(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        out.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.emplace_back();
    } else {
      out.back() += ch;
    }
  }
  return out;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) rows.push_back(csv_fields(line));
  return rows;
}

void write_summary_file(const fs::path& path, bool pass) {
  RunSummary s{"test", 0, 1, 0.0, "x", Json::object(), {{"row", "x", 1.0, 1.0, pass}}};
  write_summary(path, s);
}

TEST(Config, JsonRoundTrip) {
  RunConfig c;
  c.command = "moments";
  c.case_name = "tilted";
  c.eps = 0.25;
  c.threshold = 0.5;
  c.log_m = 300.0;
  c.seed = 99;
  EXPECT_EQ(config_from_json(to_json(c)), c);
  TempDir dir;
  save_config(dir / "cfg.json", c);
  EXPECT_EQ(load_config(dir / "cfg.json"), c);
}

TEST(Config, AbsentFieldsKeepBase) {
  RunConfig base;
  base.M = 7;
  const RunConfig c = config_from_json(Json{{"eps", 0.3}}, base);
  EXPECT_EQ(c.M, 7u);
  EXPECT_EQ(c.eps, 0.3);
  EXPECT_THROW(config_from_json(Json{{"eps", "high"}}), IoError);
  EXPECT_THROW(config_from_json(Json::array()), IoError);
}

TEST(Config, FlagsOverrideConfigFile) {
  TempDir dir;
  RunConfig c;
  c.M = 3;
  c.eps = 0.05;
  save_config(dir / "cfg.json", c);
  const auto r = invoke({"--config", dir / "cfg.json", "--save-config", dir / "eff.json", "construct", "--M", "4",
                         "--out", dir / "ens"});
  ASSERT_EQ(r.code, 0) << r.err;
  const RunConfig eff = load_config(dir / "eff.json");
  EXPECT_EQ(eff.M, 4u);
  EXPECT_EQ(eff.eps, 0.05);
  EXPECT_EQ(eff.command, "construct");
  EXPECT_EQ(parse_json_file(fs::path(dir / "ens") / "manifest.json")["M"], 4);
}

TEST(Config, SeedFromEnvironment) {
  TempDir dir;
  ::setenv("DIAMONDLAB_SEED", "17", 1);
  const auto r = invoke({"--save-config", dir / "eff.json", "bounds", "--out", dir / "b.json"});
  ::unsetenv("DIAMONDLAB_SEED");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_config(dir / "eff.json").seed, 17u);
}

TEST(Usage, ErrorsMapToExitCodes) {
  EXPECT_EQ(invoke({"bounds", "--bogus", "1"}).code, kExitUsage);
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"construct", "--case", "other", "--out", "x"}).code, kExitUsage);
  EXPECT_EQ(invoke({"--help"}).code, kExitPass);
  EXPECT_EQ(invoke({"certify"}).code, kExitUsage);
  EXPECT_EQ(invoke({"construct", "--dA", "3", "--out", "unused_dir"}).code, kExitUsage);
  EXPECT_EQ(invoke({"certify", "--in", "/nonexistent/diamondlab"}).code, kExitIo);
  EXPECT_EQ(invoke({"--config", "/nonexistent/cfg.json", "bounds"}).code, kExitIo);
}

TEST(WeingartenCheck, PassesAtDimensionThree) {
  const auto r = invoke({"weingarten-check", "--d", "3", "--samples", "20000", "--seed", "1"});
  EXPECT_EQ(r.code, 0) << r.out;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"case", "closed_form", "estimate", "stderr", "z_score", "verdict"}));
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i].back(), "PASS") << rows[i][0];
}

TEST(Pipeline, ConstructCertifySimulateReport) {
  TempDir dir;
  const std::string ens = dir / "ens";
  auto r = invoke({"construct", "--case", "equal", "--dA", "4", "--dB", "2", "--r", "2", "--eps", "0.1", "--M", "5",
                   "--seed", "1", "--out", ens});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(fs::path(ens) / "manifest.json"));
  EXPECT_TRUE(fs::exists(fs::path(ens) / "member_0_kraus_0.json"));
  EXPECT_TRUE(fs::exists(fs::path(ens) / "construct.summary.json"));

  r = invoke({"certify", "--in", ens, "--threshold", "0.01"});
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  const auto cert = csv_rows(read_text(fs::path(ens) / "certify.csv"));
  ASSERT_EQ(cert.size(), 11u);
  EXPECT_EQ(cert[0], (std::vector<std::string>{"pair", "choi_dist", "iso_dist", "verdict"}));
  EXPECT_EQ(cert[1][0], "0-1");
  EXPECT_LE(std::stod(cert[1][2]), 0.2 + 1e-12);

  r = invoke({"simulate", "--in", ens, "--N", "2", "--auxDim", "2", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  const auto sim = csv_rows(read_text(fs::path(ens) / "simulate.csv"));
  ASSERT_EQ(sim.size(), 3u);
  EXPECT_EQ(sim[0], (std::vector<std::string>{"step", "gap", "bound", "verdict"}));

  r = invoke({"report", "--in", dir.path().string(), "--out", dir / "report.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json rep = parse_json_file(dir / "report.json");
  EXPECT_EQ(rep["verdict"], "PASS");
  EXPECT_EQ(rep["runs"].size(), 3u);
}

TEST(Pipeline, TiltedSimulationRecordsFlag) {
  TempDir dir;
  const std::string ens = dir / "ens";
  ASSERT_EQ(invoke({"construct", "--case", "tilted", "--dA", "2", "--dB", "2", "--r", "2", "--eps", "0.2", "--M", "3",
                    "--out", ens})
                .code,
            0);
  const auto loaded = load_ensemble(ens);
  EXPECT_EQ(loaded.params.kind, EnsembleCase::Tilted);
  EXPECT_EQ(loaded.isometries.size(), 3u);
  ASSERT_EQ(invoke({"simulate", "--in", ens, "--N", "2"}).code, 0);
  const auto sim = csv_rows(read_text(fs::path(ens) / "simulate.csv"));
  ASSERT_EQ(sim[0].size(), 5u);
  EXPECT_EQ(sim[0][4], "flag_deviation");
  EXPECT_LE(std::stod(sim[1][4]), 1e-10);
}

TEST(Reproducibility, ByteIdenticalReruns) {
  TempDir dir;
  for (const char* name : {"a", "b"}) {
    const std::string ens = dir / name;
    ASSERT_EQ(invoke({"construct", "--M", "4", "--seed", "5", "--out", ens}).code, 0);
    ASSERT_EQ(invoke({"certify", "--in", ens, "--threshold", "0.01"}).code, 0);
  }
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const fs::path other = fs::path(dir / "b") / entry.path().filename();
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(read_text(entry.path()), read_text(other)) << entry.path().filename();
  }
  const auto m1 = invoke({"moments", "--case", "tilted", "--dA", "4", "--dB", "4", "--samples", "50",
                          "--fourth-samples", "50", "--lipschitz-samples", "5", "--seed", "2"});
  const auto m2 = invoke({"moments", "--case", "tilted", "--dA", "4", "--dB", "4", "--samples", "50",
                          "--fourth-samples", "50", "--lipschitz-samples", "5", "--seed", "2"});
  EXPECT_EQ(m1.out, m2.out);
}

TEST(Moments, TiltedRowsAndTargets) {
  TempDir dir;
  const auto r = invoke({"moments", "--case", "tilted", "--dA", "4", "--dB", "4", "--r", "2", "--eps", "0.1",
                         "--samples", "200", "--fourth-samples", "200", "--lipschitz-samples", "10", "--out",
                         dir / "m.csv"});
  ASSERT_NE(r.code, kExitUsage) << r.err;
  const auto rows = csv_rows(read_text(dir / "m.csv"));
  ASSERT_EQ(rows.size(), 1u + 4u + 1u + 5u);
  EXPECT_EQ(rows[0][0], "quantity");
  EXPECT_EQ(rows[1][0], "E Tr|C|^2");
  EXPECT_EQ(rows[1][4], "1");
  EXPECT_EQ(rows[1][5], "equals");
  EXPECT_EQ(rows[2][4], "16");
  EXPECT_TRUE(fs::exists(dir / "m.csv.summary.json"));
}

TEST(Moments, EqualCaseRowOrder) {
  const auto r = invoke({"moments", "--case", "equal", "--dA", "4", "--dB", "2", "--r", "2", "--eps", "0.2",
                         "--samples", "100", "--fourth-samples", "100", "--lipschitz-samples", "5"});
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 11u);
  EXPECT_EQ(rows[1][0], "E Tr|D|^2");
  EXPECT_DOUBLE_EQ(std::stod(rows[1][4]), 0.05544);
  EXPECT_EQ(rows[2][0], "E Tr|D|^2 (Weingarten)");
  EXPECT_EQ(rows[5][0], "max Lipschitz ratio");
}

TEST(Bounds, JsonValues) {
  TempDir dir;
  const auto r = invoke({"bounds", "--dA", "4", "--dB", "4", "--r", "4", "--eps", "0.01", "--logM", "300", "--out",
                         dir / "b.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = parse_json_file(dir / "b.json");
  EXPECT_EQ(j["N_main"]["N"], 16885);
  EXPECT_EQ(j["N_packing"]["N"], 34);
  EXPECT_EQ(j["N_general"]["N"], 373);
  EXPECT_EQ(j["inputs"]["log_M"], 300.0);
}

TEST(Report, EmptyDirectoryPasses) {
  TempDir dir;
  const auto r = invoke({"report", "--in", dir.path().string()});
  EXPECT_EQ(r.code, 0);
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["verdict"], "PASS");
  EXPECT_TRUE(j["runs"].empty());
}

TEST(Report, AnyFailFails) {
  TempDir dir;
  write_summary_file(dir.path() / "a.summary.json", true);
  fs::create_directories(dir.path() / "sub");
  write_summary_file(dir.path() / "sub" / "b.summary.json", false);
  const auto r = invoke({"report", "--in", dir.path().string()});
  EXPECT_EQ(r.code, kExitFail);
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["verdict"], "FAIL");
  EXPECT_EQ(j["runs"][0]["file"], "a.summary.json");
  EXPECT_EQ(j["runs"][1]["file"], "sub/b.summary.json");
}

TEST(Report, CorruptSummaryIsIoError) {
  TempDir dir;
  write_text_atomic(dir.path() / "x.summary.json", "{ not json");
  EXPECT_EQ(invoke({"report", "--in", dir.path().string()}).code, kExitIo);
  write_text_atomic(dir.path() / "x.summary.json", "{\"command\": 3}");
  EXPECT_EQ(invoke({"report", "--in", dir.path().string()}).code, kExitIo);
}

TEST(Binary, RunsAsSubprocess) {
  const char* bin = std::getenv("DIAMONDLAB_CLI");
  if (!bin) GTEST_SKIP() << "DIAMONDLAB_CLI not set";
  TempDir dir;
  const std::string cmd = std::string(bin) + " bounds --logM 300 --dA 4 --dB 4 --r 4 --eps 0.01 --out " + (dir / "b.json");
  const int status = std::system(cmd.c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
  EXPECT_EQ(parse_json_file(dir / "b.json")["N_main"]["N"], 16885);
  const int bad = std::system((std::string(bin) + " bounds --nope 2>/dev/null").c_str());
  ASSERT_TRUE(WIFEXITED(bad));
  EXPECT_EQ(WEXITSTATUS(bad), kExitUsage);
}

}  // namespace
}  // namespace diamondlab::cli
