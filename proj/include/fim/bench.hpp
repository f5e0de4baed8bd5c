#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include "fim/apriori.hpp"
#include "fim/datasets.hpp"
#include "fim/error.hpp"
#include "fim/fpgrowth.hpp"
#include "fim/mapreduce.hpp"
#include "fim/oracle.hpp"
#include "fim/parallel.hpp"
#include "fim/types.hpp"

namespace fim::bench {

enum class Algorithm { apriori, fpgrowth, mr_apriori, pfp };

inline constexpr std::array kAllAlgorithms{Algorithm::apriori, Algorithm::fpgrowth, Algorithm::mr_apriori,
                                           Algorithm::pfp};

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::apriori: return "apriori";
    case Algorithm::fpgrowth: return "fpgrowth";
    case Algorithm::mr_apriori: return "mr_apriori";
    case Algorithm::pfp: return "pfp";
  }
  return "?";
}

// Accepts both "mr_apriori" and "mr-apriori".
inline Algorithm parse_algorithm(std::string_view s) {
  std::string norm(s);
  std::replace(norm.begin(), norm.end(), '-', '_');
  for (auto a : kAllAlgorithms)
    if (to_string(a) == norm) return a;
  throw ConfigError("unknown algorithm '" + std::string(s) + "'");
}

struct RunOptions {
  mr::Backend backend;
  std::size_t partitions = 1;
  std::size_t groups = 2;
};

// Sequential algorithms ignore the backend.
inline MiningResult mine(const TransactionDatabase& db, Support minsup_abs, Algorithm algo, const RunOptions& opts) {
  switch (algo) {
    case Algorithm::apriori: return apriori_mine(db, minsup_abs);
    case Algorithm::fpgrowth: return fpgrowth_mine(db, minsup_abs);
    case Algorithm::mr_apriori: return mr_apriori(db, minsup_abs, opts.backend, opts.partitions);
    case Algorithm::pfp: return pfp_mine(db, minsup_abs, opts.backend, opts.partitions, opts.groups);
  }
  throw ConfigError("unknown algorithm");
}

struct DatasetSpec {
  std::string name;
  std::variant<std::filesystem::path, SyntheticParams> source;
};

struct BenchConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<double> minsups;
  std::vector<Algorithm> algorithms;
  std::vector<mr::BackendKind> backends;
  std::size_t partitions = 0;  // 0: same as workers
  std::size_t workers = mr::default_workers();
  std::size_t groups = 0;  // 0: twice the workers
  std::size_t trials = 3;
  bool verify = false;
  bool warmup = false;
  std::filesystem::path spill_dir = std::filesystem::temp_directory_path();
  std::size_t channel_capacity = 1 << 16;

  void validate() const {
    if (trials == 0) throw ConfigError("trials must be at least 1");
    if (workers == 0) throw ConfigError("workers must be at least 1");
    if (datasets.empty()) throw ConfigError("no datasets configured");
    if (algorithms.empty()) throw ConfigError("no algorithms configured");
    if (backends.empty()) throw ConfigError("no backends configured");
    if (minsups.empty()) throw ConfigError("no minimum supports configured");
    for (double m : minsups)
      if (!(m > 0.0 && m <= 1.0)) throw ConfigError("minimum support ratio must lie in (0, 1]");
  }

  std::size_t effective_partitions() const { return partitions ? partitions : workers; }
  std::size_t effective_groups() const { return groups ? groups : 2 * workers; }
};

struct BenchmarkRecord {
  std::string dataset;
  std::string algorithm;
  std::string backend;
  double minsup_rel = 0.0;
  Support minsup_abs = 0;
  std::vector<Duration> trial_times;
  Duration mean_time{0};
  std::size_t num_frequent = 0;
  bool verified = false;
};

struct DatasetError {
  std::string dataset;
  std::string message;
};

struct BenchReport {
  std::vector<BenchmarkRecord> records;
  std::vector<DatasetError> errors;
};

inline Duration mean_of(const std::vector<Duration>& times) {
  if (times.empty()) return Duration{0};
  const auto total = std::accumulate(times.begin(), times.end(), Duration{0});
  return total / static_cast<Duration::rep>(times.size());
}

inline TransactionDatabase load_dataset(const DatasetSpec& spec) {
  if (const auto* path = std::get_if<std::filesystem::path>(&spec.source)) return load_spmf(path->string(), spec.name);
  auto params = std::get<SyntheticParams>(spec.source);
  params.name = spec.name;
  return generate_synthetic(params);
}

// Runs every (dataset, minsup, algorithm, backend) cell `trials` times,
// timing only the mining call. Cells run one after another. With `verify`,
// oracle-sized datasets are checked against the brute-force oracle and every
// cell must agree with the first cell of its (dataset, minsup).
inline BenchReport run_benchmark(const BenchConfig& config, std::ostream* log = nullptr) {
  config.validate();
  BenchReport report;
  for (const auto& ds : config.datasets) {
    std::optional<TransactionDatabase> db;
    try {
      db = load_dataset(ds);
    } catch (const std::exception& e) {
      report.errors.push_back({ds.name, e.what()});
      if (log) *log << "dataset '" << ds.name << "' failed to load: " << e.what() << "\n";
      continue;
    }
    for (double rel : config.minsups) {
      const Support abs = absolute_minsup(rel, db->size());
      std::optional<FrequentMap> oracle;
      if (config.verify && db->num_items() <= kOracleMaxItems) oracle = brute_force_oracle(*db, abs).frequent;
      std::optional<FrequentMap> reference;

      for (auto algo : config.algorithms) {
        for (auto kind : config.backends) {
          RunOptions opts;
          opts.backend.kind = kind;
          opts.backend.workers = config.workers;
          opts.backend.spill_dir = config.spill_dir;
          opts.backend.channel_capacity = config.channel_capacity;
          opts.partitions = config.effective_partitions();
          opts.groups = config.effective_groups();

          BenchmarkRecord rec;
          rec.dataset = ds.name;
          rec.algorithm = std::string(to_string(algo));
          rec.backend = std::string(mr::to_string(kind));
          rec.minsup_rel = rel;
          rec.minsup_abs = abs;
          const std::string cell = rec.dataset + "/" + rec.algorithm + "/" + rec.backend + "/minsup=" +
                                   std::to_string(rel);
          if (config.warmup) (void)mine(*db, abs, algo, opts);
          MiningResult last;
          for (std::size_t t = 0; t < config.trials; ++t) {
            const auto t0 = Clock::now();
            last = mine(*db, abs, algo, opts);
            rec.trial_times.push_back(std::max(Duration{1}, Clock::now() - t0));
          }
          rec.mean_time = mean_of(rec.trial_times);
          rec.num_frequent = last.frequent.size();
          if (config.verify) {
            if (oracle) {
              if (last.frequent != *oracle)
                throw VerificationError("cell " + cell + " disagrees with the brute-force oracle");
              rec.verified = true;
            }
            if (!reference) reference = last.frequent;
            else if (last.frequent != *reference)
              throw VerificationError("cell " + cell + " disagrees with other cells of the same dataset and minsup");
          }
          if (log)
            *log << cell << ": mean " << std::fixed << std::setprecision(3) << to_ms(rec.mean_time) << " ms, "
                 << rec.num_frequent << " itemsets" << std::defaultfloat << "\n";
          report.records.push_back(std::move(rec));
        }
      }
    }
  }
  return report;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

inline std::string format_ms(Duration d) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << to_ms(d);
  return os.str();
}

inline std::string format_ratio(double r) {
  std::ostringstream os;
  os << std::setprecision(10) << r;
  return os.str();
}

inline bool record_less(const BenchmarkRecord& a, const BenchmarkRecord& b) {
  return std::tie(a.dataset, a.algorithm, a.backend, a.minsup_rel) <
         std::tie(b.dataset, b.algorithm, b.backend, b.minsup_rel);
}

}  // namespace detail

// One row per record, ordered by (dataset, algorithm, backend, minsup), times
// in milliseconds with three decimals. The number of trial columns is the
// largest trial count among the records (3 when there are none).
inline std::string emit_csv(std::vector<BenchmarkRecord> records) {
  std::stable_sort(records.begin(), records.end(), detail::record_less);
  std::size_t trials = records.empty() ? 3 : 0;
  for (const auto& r : records) trials = std::max(trials, r.trial_times.size());
  std::ostringstream os;
  os << "dataset,algorithm,backend,minsup_rel,minsup_abs";
  for (std::size_t t = 1; t <= trials; ++t) os << ",trial" << t;
  os << ",mean_ms,num_frequent,verified\n";
  for (const auto& r : records) {
    os << detail::csv_field(r.dataset) << ',' << r.algorithm << ',' << r.backend << ','
       << detail::format_ratio(r.minsup_rel) << ',' << r.minsup_abs;
    for (std::size_t t = 0; t < trials; ++t)
      os << ',' << (t < r.trial_times.size() ? detail::format_ms(r.trial_times[t]) : std::string());
    os << ',' << detail::format_ms(r.mean_time) << ',' << r.num_frequent << ',' << (r.verified ? "true" : "false")
       << '\n';
  }
  return os.str();
}

// Inverse of emit_csv (durations come back rounded to microseconds).
inline std::vector<BenchmarkRecord> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing CSV header");
  const auto header = detail::split_csv_line(line);
  if (header.size() < 8 || header[0] != "dataset") throw ParseError(1, "unexpected CSV header");
  const std::size_t trials = header.size() - 8;
  std::vector<BenchmarkRecord> out;
  std::size_t lineno = 1;
  auto ms = [](const std::string& s) {
    return std::chrono::duration_cast<Duration>(std::chrono::duration<double, std::milli>(std::stod(s)));
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    if (f.size() != header.size()) throw ParseError(lineno, "wrong number of CSV fields");
    try {
      BenchmarkRecord r;
      r.dataset = f[0];
      r.algorithm = f[1];
      r.backend = f[2];
      r.minsup_rel = std::stod(f[3]);
      r.minsup_abs = std::stoull(f[4]);
      for (std::size_t t = 0; t < trials; ++t)
        if (!f[5 + t].empty()) r.trial_times.push_back(ms(f[5 + t]));
      r.mean_time = ms(f[5 + trials]);
      r.num_frequent = std::stoull(f[6 + trials]);
      r.verified = f[7 + trials] == "true";
      out.push_back(std::move(r));
    } catch (const std::logic_error& e) {
      throw ParseError(lineno, std::string("bad CSV value: ") + e.what());
    }
  }
  return out;
}

enum class GroupBy { backend, algorithm };

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string percent_label(double ratio) {
  std::ostringstream os;
  os << std::setprecision(6) << ratio * 100.0 << '%';
  return os.str();
}

inline std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace detail

// Grouped bar chart of mean time. Each cluster is one (dataset, minsup) pair,
// split further by the dimension not used for the bars; each bar is one value
// of `group_by`. Bar height is proportional to mean_time.
inline std::string emit_svg_chart(const std::vector<BenchmarkRecord>& records, GroupBy group_by = GroupBy::backend) {
  if (records.empty()) throw InputError("cannot chart an empty record set");

  auto series_of = [&](const BenchmarkRecord& r) { return group_by == GroupBy::backend ? r.backend : r.algorithm; };
  auto other_of = [&](const BenchmarkRecord& r) { return group_by == GroupBy::backend ? r.algorithm : r.backend; };

  using ClusterKey = std::tuple<std::string, double, std::string>;
  std::map<ClusterKey, std::vector<const BenchmarkRecord*>> clusters;
  std::vector<std::string> series;
  std::vector<std::string> others;
  for (const auto& r : records) {
    clusters[{r.dataset, r.minsup_rel, other_of(r)}].push_back(&r);
    if (std::find(series.begin(), series.end(), series_of(r)) == series.end()) series.push_back(series_of(r));
    if (std::find(others.begin(), others.end(), other_of(r)) == others.end()) others.push_back(other_of(r));
  }
  std::sort(series.begin(), series.end());

  double max_ms = 0.0;
  for (const auto& r : records) max_ms = std::max(max_ms, to_ms(r.mean_time));
  if (max_ms <= 0.0) max_ms = 1.0;

  const bool single_other = others.size() == 1;
  auto cluster_label = [&](const ClusterKey& k) {
    std::string label = std::get<0>(k) + " @ " + detail::percent_label(std::get<1>(k));
    if (!single_other) label += " / " + std::get<2>(k);
    return label;
  };

  std::string title;
  {
    std::vector<std::string> labels;
    for (const auto& [k, _] : clusters) {
      std::string l = std::get<0>(k) + " @ " + detail::percent_label(std::get<1>(k));
      if (std::find(labels.begin(), labels.end(), l) == labels.end()) labels.push_back(l);
    }
    for (std::size_t i = 0; i < labels.size(); ++i) title += (i ? ", " : "") + labels[i];
    if (single_other) title += " (" + others.front() + ")";
  }

  static constexpr std::array kPalette{"#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948"};
  const double bar_w = 28.0;
  const double gap = 24.0;
  const double left = 80.0;
  const double top = 50.0;
  const double plot_h = 300.0;
  const double cluster_w = bar_w * static_cast<double>(series.size()) + gap;
  const double plot_w = cluster_w * static_cast<double>(clusters.size()) + gap;
  const double width = left + plot_w + 150.0;
  const double height = top + plot_h + 110.0;

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << detail::fixed(width, 0)
     << "\" height=\"" << detail::fixed(height, 0) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "  <title>" << detail::xml_escape(title) << "</title>\n";
  os << "  <rect x=\"0\" y=\"0\" width=\"" << detail::fixed(width, 0) << "\" height=\"" << detail::fixed(height, 0)
     << "\" fill=\"white\"/>\n";
  os << "  <text class=\"chart-title\" x=\"" << detail::fixed(width / 2, 1)
     << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << detail::xml_escape(title) << "</text>\n";

  // Axes and ticks.
  const double x0 = left;
  const double y0 = top + plot_h;
  os << "  <line x1=\"" << x0 << "\" y1=\"" << top << "\" x2=\"" << x0 << "\" y2=\"" << y0
     << "\" stroke=\"black\"/>\n";
  os << "  <line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << detail::fixed(x0 + plot_w, 1) << "\" y2=\"" << y0
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = max_ms * i / 4.0;
    const double y = y0 - plot_h * i / 4.0;
    os << "  <text x=\"" << x0 - 6 << "\" y=\"" << detail::fixed(y + 4, 1) << "\" text-anchor=\"end\">"
       << detail::fixed(v, 1) << "</text>\n";
  }
  os << "  <text class=\"axis-label\" x=\"20\" y=\"" << detail::fixed(top + plot_h / 2, 1)
     << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " << detail::fixed(top + plot_h / 2, 1)
     << ")\">mean time (ms)</text>\n";
  os << "  <text class=\"axis-label\" x=\"" << detail::fixed(x0 + plot_w / 2, 1) << "\" y=\""
     << detail::fixed(height - 12, 1) << "\" text-anchor=\"middle\">dataset @ minimum support</text>\n";

  std::size_t ci = 0;
  for (const auto& [key, recs] : clusters) {
    const double cx = x0 + gap + cluster_w * static_cast<double>(ci);
    for (std::size_t si = 0; si < series.size(); ++si) {
      auto it = std::find_if(recs.begin(), recs.end(), [&](const auto* r) { return series_of(*r) == series[si]; });
      if (it == recs.end()) continue;
      const double ms = to_ms((*it)->mean_time);
      const double h = plot_h * ms / max_ms;
      os << "  <rect class=\"bar\" x=\"" << detail::fixed(cx + bar_w * static_cast<double>(si), 1) << "\" y=\""
         << detail::fixed(y0 - h, 3) << "\" width=\"" << detail::fixed(bar_w - 2, 1) << "\" height=\""
         << detail::fixed(h, 3) << "\" fill=\"" << kPalette[si % kPalette.size()] << "\" data-series=\""
         << detail::xml_escape(series[si]) << "\" data-mean-ms=\"" << detail::fixed(ms, 3) << "\"><title>"
         << detail::xml_escape(series[si]) << ": " << detail::fixed(ms, 3) << " ms</title></rect>\n";
    }
    os << "  <text class=\"cluster-label\" x=\"" << detail::fixed(cx + bar_w * series.size() / 2.0, 1) << "\" y=\""
       << detail::fixed(y0 + 16, 1) << "\" text-anchor=\"middle\">" << detail::xml_escape(cluster_label(key))
       << "</text>\n";
    ++ci;
  }

  for (std::size_t si = 0; si < series.size(); ++si) {
    const double ly = top + 16.0 * static_cast<double>(si);
    const double lx = x0 + plot_w + 20;
    os << "  <rect x=\"" << detail::fixed(lx, 1) << "\" y=\"" << detail::fixed(ly, 1)
       << "\" width=\"10\" height=\"10\" fill=\"" << kPalette[si % kPalette.size()] << "\"/>\n";
    os << "  <text x=\"" << detail::fixed(lx + 16, 1) << "\" y=\"" << detail::fixed(ly + 9, 1) << "\">"
       << detail::xml_escape(series[si]) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto next = s.find(',', pos);
    if (next == std::string_view::npos) next = s.size();
    auto item = trim(s.substr(pos, next - pos));
    if (!item.empty()) out.push_back(item);
    pos = next + 1;
  }
  return out;
}

inline bool parse_bool(const std::string& v, std::size_t line) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ParseError(line, "expected a boolean, got '" + v + "'");
}

inline std::size_t parse_count(const std::string& v, std::size_t line) {
  std::size_t value = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
  if (ec != std::errc() || p != v.data() + v.size()) throw ParseError(line, "expected a count, got '" + v + "'");
  return value;
}

inline double parse_double(const std::string& v, std::size_t line) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::logic_error&) {
    throw ParseError(line, "expected a number, got '" + v + "'");
  }
}

}  // namespace detail

// Reads a grid definition. Sections are `[bench]` and `[dataset <name>]`;
// entries are `key = value`, lists are comma-separated, `#` starts a comment.
// Relative dataset paths are resolved against `base_dir`.
inline BenchConfig parse_bench_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
  BenchConfig cfg;
  cfg.partitions = 0;
  cfg.groups = 0;
  std::string line;
  std::size_t lineno = 0;
  enum class Section { none, bench, dataset } section = Section::none;
  struct PendingDataset {
    std::string name;
    std::optional<std::filesystem::path> path;
    SyntheticParams params;
    bool synthetic = false;
    std::size_t line = 0;
  };
  std::vector<PendingDataset> pending;

  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ParseError(lineno, "unterminated section header");
      const auto inner = detail::trim(std::string_view(text).substr(1, text.size() - 2));
      if (inner == "bench") {
        section = Section::bench;
      } else if (inner.rfind("dataset", 0) == 0 && inner.size() > 7 && (inner[7] == ' ' || inner[7] == '\t')) {
        section = Section::dataset;
        PendingDataset d;
        d.name = detail::trim(std::string_view(inner).substr(7));
        d.params.name = d.name;
        d.line = lineno;
        pending.push_back(std::move(d));
      } else {
        throw ParseError(lineno, "unknown section '" + inner + "'");
      }
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key = value");
    const auto key = detail::trim(std::string_view(text).substr(0, eq));
    const auto value = detail::trim(std::string_view(text).substr(eq + 1));

    if (section == Section::bench) {
      if (key == "algorithms") {
        cfg.algorithms.clear();
        for (const auto& a : detail::split_list(value)) cfg.algorithms.push_back(parse_algorithm(a));
      } else if (key == "backends") {
        cfg.backends.clear();
        for (const auto& b : detail::split_list(value)) cfg.backends.push_back(mr::parse_backend(b));
      } else if (key == "minsups") {
        cfg.minsups.clear();
        for (const auto& m : detail::split_list(value)) cfg.minsups.push_back(detail::parse_double(m, lineno));
      } else if (key == "partitions") {
        cfg.partitions = detail::parse_count(value, lineno);
      } else if (key == "workers") {
        cfg.workers = detail::parse_count(value, lineno);
      } else if (key == "groups") {
        cfg.groups = detail::parse_count(value, lineno);
      } else if (key == "trials") {
        cfg.trials = detail::parse_count(value, lineno);
      } else if (key == "verify") {
        cfg.verify = detail::parse_bool(value, lineno);
      } else if (key == "warmup") {
        cfg.warmup = detail::parse_bool(value, lineno);
      } else if (key == "spill_dir") {
        cfg.spill_dir = value;
      } else if (key == "channel_capacity") {
        cfg.channel_capacity = detail::parse_count(value, lineno);
      } else {
        throw ParseError(lineno, "unknown bench key '" + key + "'");
      }
    } else if (section == Section::dataset) {
      auto& d = pending.back();
      if (key == "path") {
        std::filesystem::path p(value);
        d.path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
      } else if (key == "synthetic") {
        d.synthetic = detail::parse_bool(value, lineno);
      } else if (key == "transactions") {
        d.params.num_transactions = detail::parse_count(value, lineno);
        d.synthetic = true;
      } else if (key == "items") {
        d.params.num_items = detail::parse_count(value, lineno);
        d.synthetic = true;
      } else if (key == "avg_len") {
        d.params.avg_transaction_len = detail::parse_count(value, lineno);
        d.synthetic = true;
      } else if (key == "avg_pattern_len") {
        d.params.avg_pattern_len = detail::parse_count(value, lineno);
        d.synthetic = true;
      } else if (key == "patterns") {
        d.params.num_patterns = detail::parse_count(value, lineno);
        d.synthetic = true;
      } else if (key == "seed") {
        d.params.seed = detail::parse_count(value, lineno);
        d.synthetic = true;
      } else {
        throw ParseError(lineno, "unknown dataset key '" + key + "'");
      }
    } else {
      throw ParseError(lineno, "entry outside of a section");
    }
  }

  for (auto& d : pending) {
    if (d.path && d.synthetic) throw ParseError(d.line, "dataset '" + d.name + "' has both a path and synthetic parameters");
    if (d.path) cfg.datasets.push_back({d.name, *d.path});
    else if (d.synthetic) cfg.datasets.push_back({d.name, d.params});
    else throw ParseError(d.line, "dataset '" + d.name + "' needs a path or synthetic parameters");
  }
  return cfg;
}

}  // namespace fim::bench
