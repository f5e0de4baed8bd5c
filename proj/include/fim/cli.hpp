#pragma once

#include <charconv>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fim/bench.hpp"
#include "fim/datasets.hpp"
#include "fim/error.hpp"
#include "fim/mapreduce.hpp"

namespace fim::cli {

// Stable exit-code contract.
enum ExitCode : int { kOk = 0, kIoError = 1, kUsage = 2, kVerificationFailed = 3 };

// Worker default: FIM_WORKERS when set to a positive integer, else the
// hardware thread count.
inline std::size_t env_workers() {
  if (const char* v = std::getenv("FIM_WORKERS")) {
    std::size_t n = 0;
    std::string_view s(v);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec == std::errc() && p == s.data() + s.size() && n > 0) return n;
  }
  return mr::default_workers();
}

struct FormattedItemset {
  std::vector<std::string> tokens;
  std::vector<std::uint64_t> values;
  Support support = 0;
};

// Itemsets as external tokens, tokens sorted numerically, itemsets ordered by
// length and then lexicographically.
inline std::vector<FormattedItemset> format_result(const MiningResult& result, const ItemDictionary& dict) {
  std::vector<FormattedItemset> out;
  out.reserve(result.frequent.size());
  for (const auto& [set, sup] : result.frequent) {
    std::vector<std::pair<std::uint64_t, std::string>> toks;
    for (ItemId id : set) {
      const auto& t = dict.token(id);
      std::uint64_t v = 0;
      std::from_chars(t.data(), t.data() + t.size(), v);
      toks.emplace_back(v, t);
    }
    std::sort(toks.begin(), toks.end());
    FormattedItemset f;
    f.support = sup;
    for (auto& [v, t] : toks) {
      f.values.push_back(v);
      f.tokens.push_back(std::move(t));
    }
    out.push_back(std::move(f));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.values.size() != b.values.size()) return a.values.size() < b.values.size();
    if (a.values != b.values) return a.values < b.values;
    return a.tokens < b.tokens;
  });
  return out;
}

enum class OutputFormat { text, csv, json_lines };

inline void write_result(const std::vector<FormattedItemset>& sets, OutputFormat fmt, std::ostream& out) {
  if (fmt == OutputFormat::csv) out << "items,support\n";
  for (const auto& s : sets) {
    switch (fmt) {
      case OutputFormat::text:
        for (const auto& t : s.tokens) out << t << ' ';
        out << "#SUP: " << s.support << '\n';
        break;
      case OutputFormat::csv:
        for (std::size_t i = 0; i < s.tokens.size(); ++i) out << (i ? " " : "") << s.tokens[i];
        out << ',' << s.support << '\n';
        break;
      case OutputFormat::json_lines:
        out << "{\"items\":[";
        for (std::size_t i = 0; i < s.values.size(); ++i) out << (i ? "," : "") << s.values[i];
        out << "],\"support\":" << s.support << "}\n";
        break;
    }
  }
}

struct MineOptions {
  std::string input;
  double minsup = 0.0;
  std::string algo = "fpgrowth";
  std::string backend = "sequential";
  std::size_t partitions = 0;
  std::size_t workers = 0;
  std::size_t groups = 0;
  std::string output;
  std::string format = "text";
  std::string spill_dir;
  std::size_t channel_capacity = 1 << 16;
};

struct GenOptions {
  SyntheticParams params;
  std::string output;
};

struct InspectOptions {
  std::string input;
};

struct BenchOptions {
  std::string config;
  std::vector<std::string> inputs;
  std::vector<double> minsups;
  std::vector<std::string> algos;
  std::vector<std::string> backends;
  std::size_t partitions = 0;
  std::size_t workers = 0;
  std::size_t groups = 0;
  std::size_t trials = 3;
  bool verify = false;
  bool warmup = false;
  std::string csv_out;
  std::string svg_out;
  std::string group_by = "backend";
  std::string spill_dir;
};

inline void open_output(const std::string& path, std::ofstream& file) {
  file.open(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot write '" + path + "'");
}

inline int cmd_mine(const MineOptions& o, std::ostream& out) {
  if (!(o.minsup > 0.0 && o.minsup <= 1.0)) throw ConfigError("--minsup must lie in (0, 1]");
  const auto algo = bench::parse_algorithm(o.algo);
  OutputFormat fmt;
  if (o.format == "text") fmt = OutputFormat::text;
  else if (o.format == "csv") fmt = OutputFormat::csv;
  else if (o.format == "json-lines") fmt = OutputFormat::json_lines;
  else throw ConfigError("unknown --format '" + o.format + "'");

  bench::RunOptions run;
  run.backend.kind = mr::parse_backend(o.backend);
  run.backend.workers = o.workers ? o.workers : env_workers();
  if (!o.spill_dir.empty()) run.backend.spill_dir = o.spill_dir;
  run.backend.channel_capacity = o.channel_capacity;
  run.backend.validate();
  run.partitions = o.partitions ? o.partitions : run.backend.workers;
  run.groups = o.groups ? o.groups : 2 * run.backend.workers;

  const auto db = load_spmf(o.input);
  const auto result = bench::mine(db, absolute_minsup(o.minsup, db.size()), algo, run);
  const auto sets = format_result(result, db.dictionary());
  if (o.output.empty()) {
    write_result(sets, fmt, out);
  } else {
    std::ofstream file;
    open_output(o.output, file);
    write_result(sets, fmt, file);
    if (!file) throw IoError("write failed on '" + o.output + "'");
  }
  return kOk;
}

inline int cmd_gen(const GenOptions& o, std::ostream& out) {
  const auto db = generate_synthetic(o.params);
  if (o.output.empty()) {
    write_spmf(db, out);
  } else {
    std::ofstream file;
    open_output(o.output, file);
    write_spmf(db, file);
    if (!file) throw IoError("write failed on '" + o.output + "'");
  }
  return kOk;
}

inline std::string describe_line(const DatabaseStats& s) {
  std::ostringstream os;
  os << s.transactions << " transactions, " << s.items << " items";
  if (s.transactions > 0) os << ", len min " << s.min_len << " mean " << s.mean_len << " max " << s.max_len;
  return os.str();
}

inline int cmd_inspect(const InspectOptions& o, std::ostream& out) {
  const auto db = load_spmf(o.input);
  out << describe_line(describe(db)) << '\n';
  return kOk;
}

inline int cmd_bench(const BenchOptions& o, std::ostream& out, std::ostream& err) {
  bench::BenchConfig cfg;
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw IoError("cannot open config '" + o.config + "'");
    cfg = bench::parse_bench_config(in, std::filesystem::path(o.config).parent_path());
  } else {
    cfg.algorithms = {bench::Algorithm::mr_apriori, bench::Algorithm::pfp};
    cfg.backends = {mr::BackendKind::batch_materialize, mr::BackendKind::in_memory_iterative,
                    mr::BackendKind::pipelined};
    cfg.workers = env_workers();
  }
  // Inline flags override the config file.
  for (const auto& path : o.inputs) cfg.datasets.push_back({std::filesystem::path(path).stem().string(), std::filesystem::path(path)});
  if (!o.minsups.empty()) cfg.minsups = o.minsups;
  if (!o.algos.empty()) {
    cfg.algorithms.clear();
    for (const auto& a : o.algos) cfg.algorithms.push_back(bench::parse_algorithm(a));
  }
  if (!o.backends.empty()) {
    cfg.backends.clear();
    for (const auto& b : o.backends) cfg.backends.push_back(mr::parse_backend(b));
  }
  if (o.partitions) cfg.partitions = o.partitions;
  if (o.workers) cfg.workers = o.workers;
  if (o.groups) cfg.groups = o.groups;
  if (o.config.empty() || o.trials != 3) cfg.trials = o.trials;
  if (o.verify) cfg.verify = true;
  if (o.warmup) cfg.warmup = true;
  if (!o.spill_dir.empty()) cfg.spill_dir = o.spill_dir;
  bench::GroupBy group_by;
  if (o.group_by == "backend") group_by = bench::GroupBy::backend;
  else if (o.group_by == "algorithm") group_by = bench::GroupBy::algorithm;
  else throw ConfigError("unknown --group-by '" + o.group_by + "'");

  bench::BenchReport report;
  try {
    report = bench::run_benchmark(cfg, &err);
  } catch (const VerificationError& e) {
    err << "verification failed: " << e.what() << '\n';
    return kVerificationFailed;
  }
  for (const auto& e : report.errors) err << "error: dataset '" << e.dataset << "': " << e.message << '\n';

  const auto csv = bench::emit_csv(report.records);
  if (o.csv_out.empty()) {
    out << csv;
  } else {
    std::ofstream file;
    open_output(o.csv_out, file);
    file << csv;
  }
  if (!o.svg_out.empty() && !report.records.empty()) {
    std::ofstream file;
    open_output(o.svg_out, file);
    file << bench::emit_svg_chart(report.records, group_by);
  }
  return kOk;
}

// Parses argv and dispatches to a subcommand. Never throws.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Frequent itemset mining on modeled MapReduce backends", "fim"};
  app.require_subcommand(1);

  MineOptions mine;
  auto* mine_cmd = app.add_subcommand("mine", "Mine the frequent itemsets of an SPMF dataset");
  mine_cmd->add_option("--input", mine.input, "SPMF transaction file")->required();
  mine_cmd->add_option("--minsup", mine.minsup, "Relative minimum support in (0, 1]")->required();
  mine_cmd->add_option("--algo", mine.algo, "apriori | fpgrowth | mr-apriori | pfp");
  mine_cmd->add_option("--backend", mine.backend, "sequential | batch | inmemory | pipelined");
  mine_cmd->add_option("--partitions", mine.partitions, "Input partitions (default: workers)");
  mine_cmd->add_option("--workers", mine.workers, "Worker threads (default: FIM_WORKERS or hardware threads)");
  mine_cmd->add_option("--groups", mine.groups, "PFP item groups (default: 2 x workers)");
  mine_cmd->add_option("--output", mine.output, "Output file (default: stdout)");
  mine_cmd->add_option("--format", mine.format, "text | csv | json-lines");
  mine_cmd->add_option("--spill-dir", mine.spill_dir, "Spill directory for the batch backend");
  mine_cmd->add_option("--channel-capacity", mine.channel_capacity, "Queue capacity in pairs (pipelined)");

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark grid");
  bench_cmd->add_option("--config", bench.config, "Grid definition file");
  bench_cmd->add_option("--input", bench.inputs, "SPMF dataset (repeatable)");
  bench_cmd->add_option("--minsups", bench.minsups, "Relative minimum supports")->delimiter(',');
  bench_cmd->add_option("--algos", bench.algos, "Algorithms")->delimiter(',');
  bench_cmd->add_option("--backends", bench.backends, "Backends")->delimiter(',');
  bench_cmd->add_option("--partitions", bench.partitions, "Input partitions");
  bench_cmd->add_option("--workers", bench.workers, "Worker threads");
  bench_cmd->add_option("--groups", bench.groups, "PFP item groups");
  bench_cmd->add_option("--trials", bench.trials, "Trials per cell");
  bench_cmd->add_flag("--verify", bench.verify, "Check results against the oracle and each other");
  bench_cmd->add_flag("--warmup", bench.warmup, "Run each cell once before timing");
  bench_cmd->add_option("--csv-out", bench.csv_out, "CSV output file (default: stdout)");
  bench_cmd->add_option("--svg-out", bench.svg_out, "SVG chart output file");
  bench_cmd->add_option("--group-by", bench.group_by, "Bar dimension: backend | algorithm");
  bench_cmd->add_option("--spill-dir", bench.spill_dir, "Spill directory for the batch backend");

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic SPMF dataset");
  gen_cmd->add_option("--transactions", gen.params.num_transactions, "Number of transactions");
  gen_cmd->add_option("--items", gen.params.num_items, "Number of distinct items");
  gen_cmd->add_option("--avg-len", gen.params.avg_transaction_len, "Average transaction length");
  gen_cmd->add_option("--avg-pattern-len", gen.params.avg_pattern_len, "Average pattern length");
  gen_cmd->add_option("--patterns", gen.params.num_patterns, "Number of pattern templates");
  gen_cmd->add_option("--seed", gen.params.seed, "Random seed");
  gen_cmd->add_option("--output", gen.output, "Output file (default: stdout)");

  InspectOptions inspect;
  auto* inspect_cmd = app.add_subcommand("inspect", "Print dataset statistics");
  inspect_cmd->add_option("--input", inspect.input, "SPMF transaction file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return kUsage;
  }

  try {
    if (*mine_cmd) return cmd_mine(mine, out);
    if (*bench_cmd) {
      if (bench.config.empty() && bench.inputs.empty())
        throw ConfigError("bench needs --config or at least one --input");
      return cmd_bench(bench, out, err);
    }
    if (*gen_cmd) return cmd_gen(gen, out);
    if (*inspect_cmd) return cmd_inspect(inspect, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const VerificationError& e) {
    err << "verification failed: " << e.what() << "\n";
    return kVerificationFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kUsage;
}

}  // namespace fim::cli
