// Copyright 2026 The Memfilter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "memfilter/cmmd/cmmd.hpp"
#include "memfilter/core/error.hpp"
#include "memfilter/core/io.hpp"
#include "memfilter/mia/mia.hpp"
#include "memfilter/report/manifest.hpp"
#include "memfilter/report/pipeline.hpp"
#include "memfilter/synth/synthetic.hpp"

namespace memfilter::report {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(fs::temp_directory_path() /
              ("memfilter_" + name + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) n += !line.empty();
  return n;
}

fs::path write_small_plan(const fs::path& dir) {
  synth::SyntheticPlan plan;
  plan.n_models = 3;
  plan.n_tickers = 5;
  plan.n_dates = 24;
  plan.tokens_per_prompt = 16;
  const auto path = dir / "plan.json";
  std::ofstream out(path);
  synth::write_plan(out, plan);
  return path;
}

RunContext context(const fs::path& out, std::uint64_t seed = 11) {
  RunContext ctx;
  ctx.out_dir = out;
  ctx.seed = seed;
  return ctx;
}

TEST(Fingerprint, KnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(fingerprint_hex(0xabcULL), "0000000000000abc");
}

TEST(OutputDir, ManifestListsInputsConfigAndOutputs) {
  TempDir t("manifest");
  {
    std::ofstream in(t / "input.txt");
    in << "foobar";
  }
  OutputDir od(t / "out", "demo");
  od.add_input("source", t / "input.txt");
  od.set_seed(99);
  od.config()["alpha"] = 0.5;
  od.write("a.csv", [](std::ostream& o) { o << "x\n1\n"; });
  od.finish(2, 1);
  const auto m = nlohmann::json::parse(slurp(t / "out" / "manifest.json"));
  EXPECT_EQ(m.at("subcommand"), "demo");
  EXPECT_EQ(m.at("seed"), 99);
  EXPECT_EQ(m.at("tool_version"), std::string(version()));
  EXPECT_EQ(m.at("inputs").at("source").at("fnv1a64"), "85944171f73967e8");
  EXPECT_EQ(m.at("inputs").at("source").at("file"), "input.txt");
  EXPECT_EQ(m.at("outputs").at("a.csv"), fingerprint_hex(fnv1a64("x\n1\n")));
  EXPECT_EQ(m.at("config").at("alpha"), 0.5);
  EXPECT_EQ(m.at("error_count"), 2);
  EXPECT_EQ(m.at("warning_count"), 1);
  EXPECT_EQ(slurp(t / "out" / "a.csv"), "x\n1\n");
}

struct SmallRun {
  TempDir dir{"pipeline"};
  fs::path sim = dir / "sim";
  fs::path score = dir / "score";
  fs::path fit = dir / "fit";
  fs::path cmmd = dir / "cmmd";
  fs::path backtest = dir / "backtest";

  SmallRun() {
    run_simulate({write_small_plan(dir.path())}, context(sim));
    run_score({sim / "corpus.jsonl", sim / "registry.jsonl", mia::kDefaultKPercent, ""},
              context(score));
    FitCommandOptions fo;
    fo.scores = score / "scores.jsonl";
    fo.registry = sim / "registry.jsonl";
    run_fit(fo, context(fit));
    run_cmmd({score / "scores.jsonl", sim / "registry.jsonl",
              fit / "mcs_model.json", sim / "signals.jsonl"},
             context(cmmd));
    BacktestOptions bo;
    bo.signals = sim / "signals.jsonl";
    bo.prices = sim / "prices.csv";
    bo.mcs = cmmd / "mcs.jsonl";
    bo.partitions = cmmd / "partitions.jsonl";
    bo.registry = sim / "registry.jsonl";
    bo.resamples = 100;
    run_backtest(bo, context(backtest));
  }
};

TEST(Pipeline, StagesProduceExpectedFiles) {
  SmallRun r;
  for (const char* f : {"plan.json", "registry.jsonl", "corpus.jsonl", "signals.jsonl",
                        "prices.csv", "oracle.json", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(r.sim / f)) << f;
  }
  const std::size_t prompts = 3 * 5 * 24;
  EXPECT_EQ(count_lines(r.sim / "corpus.jsonl"), prompts);
  EXPECT_EQ(count_lines(r.score / "scores.jsonl"), prompts);
  EXPECT_EQ(count_lines(r.fit / "mcs.jsonl"), prompts);
  // Header + 3 models x (5 methods + mcs) + pooled row.
  EXPECT_EQ(count_lines(r.fit / "separation_report.csv"), 1u + 3 * 6 + 1);
  EXPECT_EQ(count_lines(r.fit / "correlations.csv"), 6u);
  EXPECT_EQ(count_lines(r.cmmd / "partitions.jsonl"), 5u * 24);
  for (const char* f : {"summary.csv", "bootstrap.csv", "strategy_correlations.csv",
                        "diagnostics.csv", "sweep.csv", "leave_one_out.csv",
                        "quintiles.csv", "group_returns.csv", "decomposition.csv",
                        "manifest.json"}) {
    EXPECT_TRUE(fs::exists(r.backtest / f)) << f;
  }
  EXPECT_EQ(count_lines(r.backtest / "summary.csv"), 7u);
  EXPECT_EQ(count_lines(r.backtest / "quintiles.csv"), 6u);
  EXPECT_EQ(count_lines(r.backtest / "sweep.csv"), 7u);
  EXPECT_EQ(count_lines(r.backtest / "leave_one_out.csv"), 4u);
}

TEST(Pipeline, ScoreRerunAndThreadCountAreByteIdentical) {
  SmallRun r;
  auto ctx = context(r.dir / "again");
  ctx.jobs = 3;
  run_score({r.sim / "corpus.jsonl", r.sim / "registry.jsonl", mia::kDefaultKPercent, ""},
            ctx);
  EXPECT_EQ(slurp(r.score / "scores.jsonl"), slurp(r.dir / "again" / "scores.jsonl"));
  EXPECT_EQ(slurp(r.score / "manifest.json"), slurp(r.dir / "again" / "manifest.json"));
}

TEST(Pipeline, SimulateSeedOverridesPlanSeed) {
  TempDir t("seed");
  const auto plan = write_small_plan(t.path());
  run_simulate({plan}, context(t / "a", 1));
  run_simulate({plan}, context(t / "b", 1));
  run_simulate({plan}, context(t / "c", 2));
  EXPECT_EQ(slurp(t / "a" / "corpus.jsonl"), slurp(t / "b" / "corpus.jsonl"));
  EXPECT_NE(slurp(t / "a" / "corpus.jsonl"), slurp(t / "c" / "corpus.jsonl"));
}

TEST(Pipeline, MissingReferenceRecordsLeaveRefRatioEmpty) {
  SmallRun r;
  const auto registry = load_registry(r.sim / "registry.jsonl");
  const std::string ref = registry.models().front().model_id;
  std::ifstream in(r.sim / "corpus.jsonl");
  std::ofstream out(r.dir / "no_ref.jsonl");
  std::string line;
  std::size_t kept = 0;
  while (std::getline(in, line)) {
    if (nlohmann::json::parse(line).at("model_id") == ref) continue;
    out << line << '\n';
    ++kept;
  }
  out.close();
  const auto status =
      run_score({r.dir / "no_ref.jsonl", r.sim / "registry.jsonl", mia::kDefaultKPercent, ""},
                context(r.dir / "no_ref"));
  EXPECT_GT(status.warnings, 0u);
  std::ifstream scores(r.dir / "no_ref" / "scores.jsonl");
  const auto rows = mia::read_scores(scores);
  ASSERT_EQ(rows.size(), kept);
  for (const auto& row : rows) EXPECT_FALSE(row.scores.ref_ratio);
}

TEST(Pipeline, TemporalOnlyVariantHasUnitAuc) {
  SmallRun r;
  FitCommandOptions fo;
  fo.scores = r.score / "scores.jsonl";
  fo.registry = r.sim / "registry.jsonl";
  fo.variant = "temporal_only";
  run_fit(fo, context(r.dir / "temporal"));
  std::ifstream in(r.dir / "temporal" / "separation_report.csv");
  std::string line;
  std::getline(in, line);
  bool saw_pooled = false;
  while (std::getline(in, line)) {
    if (line.rfind("all,mcs,", 0) != 0) continue;
    saw_pooled = true;
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "1");
  }
  EXPECT_TRUE(saw_pooled);
}

TEST(Pipeline, ErrorsNameFileAndLine) {
  SmallRun r;
  std::ifstream in(r.sim / "corpus.jsonl");
  std::ofstream out(r.dir / "bad.jsonl");
  std::string line;
  for (int i = 0; i < 2 && std::getline(in, line); ++i) out << line << '\n';
  out << "{\"prompt_id\": 5}\n";
  out.close();
  try {
    run_score({r.dir / "bad.jsonl", r.sim / "registry.jsonl", mia::kDefaultKPercent, ""},
              context(r.dir / "x"));
    FAIL();
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("bad.jsonl"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  }
  FitCommandOptions fo;
  fo.scores = r.score / "scores.jsonl";
  fo.registry = r.sim / "registry.jsonl";
  fo.lambda = -1.0;
  EXPECT_THROW(run_fit(fo, context(r.dir / "y")), ConfigError);
}

TEST(Pipeline, ParseCommandReproducesGeneratedSignals) {
  SmallRun r;
  const auto status = run_parse({r.sim / "signals.jsonl", std::nullopt},
                                context(r.dir / "parse"));
  EXPECT_EQ(status.warnings, 0u);
  EXPECT_EQ(slurp(r.sim / "signals.jsonl"), slurp(r.dir / "parse" / "signals.jsonl"));
}

// The 3-stock x 5-day fixture, written to disk.
void write_hand_fixture(const fs::path& dir) {
  const char* dates[] = {"2024-01-02", "2024-01-03", "2024-01-04", "2024-01-05",
                         "2024-01-08", "2024-01-09", "2024-01-10", "2024-01-11"};
  const std::vector<std::pair<std::string, std::vector<double>>> closes = {
      {"AAA", {100, 101, 102.5, 101.8, 103.0, 104.2, 103.1, 105.0}},
      {"BBB", {50, 49.5, 49.0, 49.8, 50.6, 50.1, 51.0, 50.7}},
      {"CCC", {20, 20.4, 20.2, 20.6, 20.2, 20.5, 20.8}}};
  PriceTable prices;
  std::vector<SignalRecord> signals;
  std::vector<mcs::McsRow> rows;
  int k = 0;
  for (const auto& [t, c] : closes) {
    auto& s = prices[t];
    s.ticker = t;
    for (std::size_t i = 0; i < c.size(); ++i) {
      s.bars.push_back({Date::parse(dates[i]), c[i]});
    }
    for (int m = 1; m <= 3; ++m) {
      for (int d = 2; d <= 6; ++d) {
        SignalRecord r;
        r.model_id = "m" + std::to_string(m);
        r.ticker = t;
        r.date = Date::parse(dates[d]);
        r.alpha = (k % 3) - 1;
        r.confidence = 0.6;
        signals.push_back(r);
        rows.push_back({t + std::to_string(d), r.model_id, t, r.date,
                        0.05 + 0.9 * ((k * 37) % 45) / 45.0, 0.0});
        ++k;
      }
    }
  }
  const auto parts =
      cmmd::cmmd_signal_series(cmmd::join_signals(signals, rows).votes).partitions;
  std::ofstream(dir / "prices.csv") << [&] {
    std::ostringstream o;
    write_prices(o, prices);
    return o.str();
  }();
  std::ofstream sig(dir / "signals.jsonl");
  write_signals(sig, signals);
  std::ofstream m(dir / "mcs.jsonl");
  mcs::write_mcs(m, rows);
  std::ofstream p(dir / "partitions.jsonl");
  cmmd::write_partitions(p, parts);
}

TEST(Pipeline, SixStrategiesOnHandFixture) {
  TempDir t("hand");
  write_hand_fixture(t.path());
  BacktestOptions bo;
  bo.signals = t / "signals.jsonl";
  bo.prices = t / "prices.csv";
  bo.mcs = t / "mcs.jsonl";
  bo.partitions = t / "partitions.jsonl";
  bo.resamples = 50;
  const auto status = run_backtest(bo, context(t / "out"));
  int equity = 0;
  for (const auto& e : fs::directory_iterator(t / "out")) {
    equity += e.path().filename().string().rfind("equity_", 0) == 0;
  }
  EXPECT_EQ(equity, 6);
  EXPECT_EQ(count_lines(t / "out" / "summary.csv"), 7u);
  // Five days are too few to bootstrap; that is reported, not fatal.
  EXPECT_GT(status.warnings, 0u);
  EXPECT_EQ(status.errors, 0u);
}

#ifdef MEMFILTER_CLI_PATH
struct CliResult {
  int code;
  std::string err;
};

CliResult cli(const fs::path& dir, const std::string& args) {
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string(MEMFILTER_CLI_PATH) + " " + args + " > " +
                          (dir / "stdout.txt").string() + " 2> " + err.string();
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(err)};
}

TEST(Cli, ExitCodes) {
  TempDir t("cli");
  const auto plan = write_small_plan(t.path());
  const std::string out = " --quiet --out-dir " + (t / "sim").string();
  EXPECT_EQ(cli(t.path(), "--version").code, 0);
  EXPECT_EQ(cli(t.path(), "simulate --plan " + plan.string() + out).code, 0);
  const auto sim = t / "sim";
  ASSERT_EQ(cli(t.path(), "score --corpus " + (sim / "corpus.jsonl").string() +
                              " --registry " + (sim / "registry.jsonl").string() +
                              " --quiet --out-dir " + (t / "score").string())
                .code,
            0);
  const auto neg = cli(t.path(), "fit --scores " + (t / "score/scores.jsonl").string() +
                                     " --registry " + (sim / "registry.jsonl").string() +
                                     " --lambda -1 --out-dir " + (t / "fit").string());
  EXPECT_EQ(neg.code, 2);
  EXPECT_NE(neg.err.find("lambda"), std::string::npos) << neg.err;
  EXPECT_EQ(cli(t.path(), "fit --scores " + (t / "missing.jsonl").string() +
                              " --registry " + (sim / "registry.jsonl").string())
                .code,
            2);
  EXPECT_EQ(cli(t.path(), "frobnicate").code, 2);

  std::ofstream(t / "broken.jsonl") << "{\"model_id\": \"x\"}\nnot json\n";
  const auto bad = cli(t.path(), "parse --signals " + (t / "broken.jsonl").string() +
                                     " --out-dir " + (t / "p").string());
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("broken.jsonl"), std::string::npos) << bad.err;
  EXPECT_NE(bad.err.find("line 1"), std::string::npos) << bad.err;
}

TEST(Cli, StrictModeTurnsRecordErrorsIntoFailure) {
  TempDir t("strict");
  const auto plan = write_small_plan(t.path());
  ASSERT_EQ(cli(t.path(), "--quiet --out-dir " + (t / "sim").string() +
                              " simulate --plan " + plan.string())
                .code,
            0);
  // Alter one reference-model prompt text (same length) so the other
  // models' records for that prompt no longer pair with it.
  std::ifstream in(t / "sim" / "corpus.jsonl");
  std::ofstream out(t / "corpus.jsonl");
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      auto obj = nlohmann::ordered_json::parse(line);
      auto text = obj["text"].get<std::string>();
      text[0] = text[0] == 'x' ? 'y' : 'x';
      obj["text"] = text;
      line = obj.dump();
      first = false;
    }
    out << line << '\n';
  }
  out.close();
  const std::string args = "score --corpus " + (t / "corpus.jsonl").string() +
                           " --registry " + (t / "sim" / "registry.jsonl").string() +
                           " --quiet";
  const auto lenient = cli(t.path(), args + " --out-dir " + (t / "a").string());
  const auto strict = cli(t.path(), args + " --strict --out-dir " + (t / "b").string());
  EXPECT_EQ(lenient.code, 0) << lenient.err;
  EXPECT_EQ(strict.code, 1) << strict.err;
  const auto m = nlohmann::json::parse(slurp(t / "a" / "manifest.json"));
  EXPECT_EQ(m.at("error_count").get<int>(), 2);
  EXPECT_EQ(count_lines(t / "a" / "scores.jsonl"), 3u * 5 * 24 - 2);
}
#endif

}  // namespace
}  // namespace memfilter::report
