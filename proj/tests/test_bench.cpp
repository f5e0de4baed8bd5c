#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fim/bench.hpp"
#include "svg_check.hpp"
#include "test_support.hpp"

namespace {

namespace bench = fim::bench;
namespace mr = fim::mr;
using namespace std::chrono_literals;

std::filesystem::path write_db1() {
  auto path = std::filesystem::temp_directory_path() / ("fim-bench-db1-" + std::to_string(::getpid()) + ".txt");
  std::ofstream(path) << "0 1 2\n0 1\n0 2\n1 2\n";
  return path;
}

bench::BenchConfig tiny_config(const std::filesystem::path& db) {
  bench::BenchConfig c;
  c.datasets = {{"DB1", db}};
  c.minsups = {0.5};
  c.algorithms = {bench::Algorithm::apriori, bench::Algorithm::mr_apriori};
  c.backends = {mr::BackendKind::sequential, mr::BackendKind::pipelined};
  c.workers = 2;
  c.trials = 3;
  return c;
}

bench::BenchmarkRecord record(std::string ds, std::string algo, std::string backend, double rel,
                              std::vector<fim::Duration> times) {
  bench::BenchmarkRecord r;
  r.dataset = std::move(ds);
  r.algorithm = std::move(algo);
  r.backend = std::move(backend);
  r.minsup_rel = rel;
  r.minsup_abs = 5;
  r.trial_times = std::move(times);
  r.mean_time = bench::mean_of(r.trial_times);
  r.num_frequent = 42;
  r.verified = true;
  return r;
}

TEST(Algorithm, Names) {
  for (auto a : bench::kAllAlgorithms) EXPECT_EQ(bench::parse_algorithm(bench::to_string(a)), a);
  EXPECT_EQ(bench::parse_algorithm("mr-apriori"), bench::Algorithm::mr_apriori);
  EXPECT_THROW(bench::parse_algorithm("eclat"), fim::ConfigError);
}

TEST(RunBenchmark, Cardinality) {
  auto db = write_db1();
  auto report = bench::run_benchmark(tiny_config(db));
  ASSERT_EQ(report.records.size(), 4u);
  for (const auto& r : report.records) {
    EXPECT_EQ(r.trial_times.size(), 3u);
    EXPECT_EQ(r.minsup_abs, 2u);
    EXPECT_EQ(r.num_frequent, 6u);
    auto [lo, hi] = std::minmax_element(r.trial_times.begin(), r.trial_times.end());
    EXPECT_GT(lo->count(), 0);
    EXPECT_GE(r.mean_time, *lo);
    EXPECT_LE(r.mean_time, *hi);
    EXPECT_EQ(r.mean_time, bench::mean_of(r.trial_times));
    EXPECT_FALSE(r.verified);
  }
  std::filesystem::remove(db);
}

TEST(RunBenchmark, VerifiesAgainstOracle) {
  auto db = write_db1();
  auto cfg = tiny_config(db);
  cfg.verify = true;
  cfg.algorithms.assign(bench::kAllAlgorithms.begin(), bench::kAllAlgorithms.end());
  cfg.backends.assign(mr::kAllBackends.begin(), mr::kAllBackends.end());
  cfg.trials = 1;
  auto report = bench::run_benchmark(cfg);
  EXPECT_EQ(report.records.size(), 16u);
  for (const auto& r : report.records) EXPECT_TRUE(r.verified) << r.algorithm << "/" << r.backend;
  std::filesystem::remove(db);
}

TEST(RunBenchmark, SyntheticCellsAgree) {
  // Food Mart sized (4141 transactions, 1554 items) at 0.1%.
  bench::BenchConfig cfg;
  fim::SyntheticParams p;
  p.num_transactions = 4141;
  p.num_items = 1554;
  cfg.datasets = {{"Food Mart", p}};
  cfg.minsups = {0.001};
  cfg.algorithms.assign(bench::kAllAlgorithms.begin(), bench::kAllAlgorithms.end());
  cfg.backends.assign(mr::kAllBackends.begin(), mr::kAllBackends.end());
  cfg.workers = 2;
  cfg.trials = 1;
  cfg.verify = true;
  auto report = bench::run_benchmark(cfg);
  ASSERT_EQ(report.records.size(), 16u);
  for (const auto& r : report.records) {
    EXPECT_EQ(r.minsup_abs, 5u);
    EXPECT_EQ(r.num_frequent, report.records.front().num_frequent);
    EXPECT_FALSE(r.verified);  // too many items for the oracle
  }
  EXPECT_GT(report.records.front().num_frequent, 0u);
}

TEST(RunBenchmark, LoadErrorsAreRecordedAndRunContinues) {
  auto db = write_db1();
  auto cfg = tiny_config(db);
  cfg.datasets.insert(cfg.datasets.begin(), {"missing", std::filesystem::path("/nonexistent/x.txt")});
  std::ostringstream log;
  auto report = bench::run_benchmark(cfg, &log);
  ASSERT_EQ(report.errors.size(), 1u);
  EXPECT_EQ(report.errors[0].dataset, "missing");
  EXPECT_EQ(report.records.size(), 4u);
  EXPECT_NE(log.str().find("missing"), std::string::npos);
  std::filesystem::remove(db);
}

TEST(RunBenchmark, InvalidConfig) {
  auto db = write_db1();
  auto cfg = tiny_config(db);
  cfg.trials = 0;
  EXPECT_THROW(bench::run_benchmark(cfg), fim::ConfigError);
  cfg = tiny_config(db);
  cfg.algorithms.clear();
  EXPECT_THROW(bench::run_benchmark(cfg), fim::ConfigError);
  cfg = tiny_config(db);
  cfg.minsups = {1.5};
  EXPECT_THROW(bench::run_benchmark(cfg), fim::ConfigError);
  cfg = tiny_config(db);
  cfg.datasets.clear();
  EXPECT_THROW(bench::run_benchmark(cfg), fim::ConfigError);
  std::filesystem::remove(db);
}

TEST(EmitCsv, HeaderOnly) {
  EXPECT_EQ(bench::emit_csv({}),
            "dataset,algorithm,backend,minsup_rel,minsup_abs,trial1,trial2,trial3,mean_ms,num_frequent,verified\n");
}

TEST(EmitCsv, OneRecord) {
  auto r = record("DB1", "pfp", "batch", 0.001, {1500us, 2000us, 2500us});
  auto csv = bench::emit_csv({r});
  EXPECT_EQ(csv,
            "dataset,algorithm,backend,minsup_rel,minsup_abs,trial1,trial2,trial3,mean_ms,num_frequent,verified\n"
            "DB1,pfp,batch,0.001,5,1.500,2.000,2.500,2.000,42,true\n");
}

TEST(EmitCsv, DeterministicRowOrder) {
  std::vector<bench::BenchmarkRecord> recs = {
      record("b", "apriori", "sequential", 0.1, {1ms, 1ms, 1ms}),
      record("a", "pfp", "batch", 0.3, {1ms, 1ms, 1ms}),
      record("a", "pfp", "batch", 0.1, {1ms, 1ms, 1ms}),
      record("a", "apriori", "pipelined", 0.1, {1ms, 1ms, 1ms}),
  };
  auto csv = bench::emit_csv(recs);
  std::reverse(recs.begin(), recs.end());
  EXPECT_EQ(bench::emit_csv(recs), csv);
  std::istringstream in(csv);
  auto back = bench::parse_csv(in);
  ASSERT_EQ(back.size(), 4u);
  EXPECT_EQ(back[0].dataset, "a");
  EXPECT_EQ(back[0].algorithm, "apriori");
  EXPECT_EQ(back[1].minsup_rel, 0.1);
  EXPECT_EQ(back[2].minsup_rel, 0.3);
  EXPECT_EQ(back[3].dataset, "b");
}

TEST(EmitCsv, RoundTrip) {
  std::vector<bench::BenchmarkRecord> recs = {
      record("Food Mart", "mr_apriori", "inmemory", 0.005, {123456789ns, 2ms, 3s}),
      record("with,comma \"q\"", "fpgrowth", "sequential", 1.0, {1us, 2us, 4us}),
  };
  recs[1].verified = false;
  std::istringstream in(bench::emit_csv(recs));
  auto back = bench::parse_csv(in);
  ASSERT_EQ(back.size(), 2u);
  std::stable_sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) { return a.dataset < b.dataset; });
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].dataset, recs[i].dataset);
    EXPECT_EQ(back[i].algorithm, recs[i].algorithm);
    EXPECT_EQ(back[i].backend, recs[i].backend);
    EXPECT_DOUBLE_EQ(back[i].minsup_rel, recs[i].minsup_rel);
    EXPECT_EQ(back[i].minsup_abs, recs[i].minsup_abs);
    EXPECT_EQ(back[i].num_frequent, recs[i].num_frequent);
    EXPECT_EQ(back[i].verified, recs[i].verified);
    ASSERT_EQ(back[i].trial_times.size(), 3u);
    for (std::size_t t = 0; t < 3; ++t)
      EXPECT_NEAR(fim::to_ms(back[i].trial_times[t]), fim::to_ms(recs[i].trial_times[t]), 0.0005);
    EXPECT_NEAR(fim::to_ms(back[i].mean_time), fim::to_ms(recs[i].mean_time), 0.0005);
  }
}

TEST(EmitCsv, TrialColumnsFollowTrialCount) {
  auto csv = bench::emit_csv({record("a", "pfp", "batch", 0.1, {1ms, 1ms, 1ms, 1ms, 1ms})});
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "dataset,algorithm,backend,minsup_rel,minsup_abs,trial1,trial2,trial3,trial4,trial5,mean_ms,num_frequent,"
            "verified");
}

TEST(ParseCsv, RejectsMalformed) {
  std::istringstream empty("");
  EXPECT_THROW(bench::parse_csv(empty), fim::ParseError);
  std::istringstream bad_header("a,b\n");
  EXPECT_THROW(bench::parse_csv(bad_header), fim::ParseError);
  std::istringstream short_row(bench::emit_csv({}) + "x,y\n");
  EXPECT_THROW(bench::parse_csv(short_row), fim::ParseError);
}

TEST(EmitSvg, ThreeBackendsThreeBars) {
  std::vector<bench::BenchmarkRecord> recs = {
      record("Food Mart", "mr_apriori", "batch", 0.001, {26ms, 26ms, 26ms}),
      record("Food Mart", "mr_apriori", "inmemory", 0.001, {20ms, 20ms, 20ms}),
      record("Food Mart", "mr_apriori", "pipelined", 0.001, {11ms, 11ms, 11ms}),
  };
  auto svg = bench::emit_svg_chart(recs);
  auto doc = fim::testing::parse_xml(svg);
  ASSERT_TRUE(doc.has_value()) << svg;
  EXPECT_EQ(doc->get<std::string>("svg.<xmlattr>.version"), "1.1");
  EXPECT_EQ(doc->get<std::string>("svg.<xmlattr>.xmlns"), "http://www.w3.org/2000/svg");
  auto bars = fim::testing::svg_bars(*doc);
  ASSERT_EQ(bars.size(), 3u);
  std::sort(bars.begin(), bars.end(), [](const auto& a, const auto& b) { return a.mean_ms < b.mean_ms; });
  EXPECT_EQ(bars[0].series, "pipelined");
  EXPECT_EQ(bars[2].series, "batch");
  EXPECT_LT(bars[0].height, bars[1].height);
  EXPECT_LT(bars[1].height, bars[2].height);
  EXPECT_NEAR(bars[2].height / bars[0].height, 26.0 / 11.0, 1e-3);
  EXPECT_NE(svg.find("Food Mart @ 0.1%"), std::string::npos);
  EXPECT_NE(svg.find("mean time (ms)"), std::string::npos);
  EXPECT_EQ(svg.find("href"), std::string::npos);  // self-contained
}

TEST(EmitSvg, HeightsMonotoneInMeanTime) {
  std::vector<bench::BenchmarkRecord> recs;
  const char* backends[] = {"batch", "inmemory", "pipelined", "sequential"};
  std::mt19937_64 rng(3);
  for (auto ds : {"A", "B"})
    for (double m : {0.001, 0.005})
      for (auto b : backends) {
        auto t = std::chrono::microseconds(1 + rng() % 100000);
        recs.push_back(record(ds, "pfp", b, m, {t, t, t}));
      }
  auto doc = fim::testing::parse_xml(bench::emit_svg_chart(recs));
  ASSERT_TRUE(doc.has_value());
  auto bars = fim::testing::svg_bars(*doc);
  ASSERT_EQ(bars.size(), recs.size());
  std::sort(bars.begin(), bars.end(), [](const auto& a, const auto& b) { return a.mean_ms < b.mean_ms; });
  for (std::size_t i = 1; i < bars.size(); ++i) EXPECT_LE(bars[i - 1].height, bars[i].height);
}

TEST(EmitSvg, EscapesNamesAndGroupsByAlgorithm) {
  std::vector<bench::BenchmarkRecord> recs = {
      record("<&>", "apriori", "batch", 0.5, {1ms, 1ms, 1ms}),
      record("<&>", "pfp", "batch", 0.5, {2ms, 2ms, 2ms}),
  };
  auto svg = bench::emit_svg_chart(recs, bench::GroupBy::algorithm);
  auto doc = fim::testing::parse_xml(svg);
  ASSERT_TRUE(doc.has_value());
  auto bars = fim::testing::svg_bars(*doc);
  ASSERT_EQ(bars.size(), 2u);
  EXPECT_NE(svg.find("&lt;&amp;&gt; @ 50%"), std::string::npos);
}

TEST(EmitSvg, EmptyRecordsRejected) { EXPECT_THROW(bench::emit_svg_chart({}), fim::InputError); }

TEST(BenchConfig, ParsesSectionsAndRelativePaths) {
  std::istringstream in(R"(# grid
[bench]
algorithms = mr-apriori, pfp
backends = batch,inmemory , pipelined
minsups = 0.001, 0.003
workers = 4
partitions = 8
groups = 6
trials = 5
verify = true
warmup = yes
channel_capacity = 1024
spill_dir = /dev/shm

[dataset Food Mart]
path = foodmart.txt

[dataset T10I4D100K]
transactions = 1000   # trailing comment
items = 870
avg_len = 10
avg_pattern_len = 4
patterns = 100
seed = 7
)");
  auto cfg = bench::parse_bench_config(in, "/data");
  EXPECT_EQ(cfg.algorithms, (std::vector<bench::Algorithm>{bench::Algorithm::mr_apriori, bench::Algorithm::pfp}));
  EXPECT_EQ(cfg.backends.size(), 3u);
  EXPECT_EQ(cfg.minsups, (std::vector<double>{0.001, 0.003}));
  EXPECT_EQ(cfg.workers, 4u);
  EXPECT_EQ(cfg.effective_partitions(), 8u);
  EXPECT_EQ(cfg.effective_groups(), 6u);
  EXPECT_EQ(cfg.trials, 5u);
  EXPECT_TRUE(cfg.verify);
  EXPECT_TRUE(cfg.warmup);
  EXPECT_EQ(cfg.channel_capacity, 1024u);
  EXPECT_EQ(cfg.spill_dir, "/dev/shm");
  ASSERT_EQ(cfg.datasets.size(), 2u);
  EXPECT_EQ(cfg.datasets[0].name, "Food Mart");
  EXPECT_EQ(std::get<std::filesystem::path>(cfg.datasets[0].source), std::filesystem::path("/data/foodmart.txt"));
  const auto& p = std::get<fim::SyntheticParams>(cfg.datasets[1].source);
  EXPECT_EQ(p.num_transactions, 1000u);
  EXPECT_EQ(p.num_patterns, 100u);
  EXPECT_EQ(p.seed, 7u);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(BenchConfig, Defaults) {
  std::istringstream in("[bench]\nalgorithms = apriori\nbackends = sequential\nminsups = 0.5\nworkers = 3\n"
                        "[dataset x]\nsynthetic = true\n");
  auto cfg = bench::parse_bench_config(in);
  EXPECT_EQ(cfg.trials, 3u);
  EXPECT_FALSE(cfg.verify);
  EXPECT_FALSE(cfg.warmup);
  EXPECT_EQ(cfg.effective_partitions(), 3u);
  EXPECT_EQ(cfg.effective_groups(), 6u);
  EXPECT_EQ(std::get<fim::SyntheticParams>(cfg.datasets[0].source).num_transactions, 100000u);
}

TEST(BenchConfig, Errors) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return bench::parse_bench_config(in);
  };
  EXPECT_THROW(parse("[bench\n"), fim::ParseError);
  EXPECT_THROW(parse("[other]\n"), fim::ParseError);
  EXPECT_THROW(parse("trials = 3\n"), fim::ParseError);
  EXPECT_THROW(parse("[bench]\ntrials\n"), fim::ParseError);
  EXPECT_THROW(parse("[bench]\ncolour = red\n"), fim::ParseError);
  EXPECT_THROW(parse("[bench]\ntrials = many\n"), fim::ParseError);
  EXPECT_THROW(parse("[bench]\nverify = maybe\n"), fim::ParseError);
  EXPECT_THROW(parse("[bench]\nminsups = 0.1, abc\n"), fim::ParseError);
  EXPECT_THROW(parse("[bench]\nbackends = hadoop\n"), fim::ConfigError);
  EXPECT_THROW(parse("[dataset d]\n"), fim::ParseError);
  EXPECT_THROW(parse("[dataset d]\npath = x\nitems = 5\n"), fim::ParseError);
  EXPECT_THROW(parse("[dataset d]\nflavour = x\n"), fim::ParseError);
  try {
    parse("[bench]\n\nworkers = -1\n");
    FAIL();
  } catch (const fim::ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

}  // namespace
