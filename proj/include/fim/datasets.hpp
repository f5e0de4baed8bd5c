#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fim/error.hpp"
#include "fim/types.hpp"

namespace fim {

// Maps external item tokens to dense ids 0..size()-1 in registration order.
class ItemDictionary {
 public:
  ItemId intern(std::string_view token) {
    auto [it, inserted] = token_to_id_.try_emplace(std::string(token), static_cast<ItemId>(id_to_token_.size()));
    if (inserted) id_to_token_.emplace_back(token);
    return it->second;
  }

  const std::string& token(ItemId id) const { return id_to_token_.at(id); }

  std::optional<ItemId> find(std::string_view token) const {
    auto it = token_to_id_.find(std::string(token));
    if (it == token_to_id_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const noexcept { return id_to_token_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return id_to_token_; }

 private:
  std::unordered_map<std::string, ItemId> token_to_id_;
  std::vector<std::string> id_to_token_;
};

// Immutable after construction; safe to share between readers.
class TransactionDatabase {
 public:
  TransactionDatabase() = default;

  TransactionDatabase(std::vector<Transaction> transactions, ItemDictionary dictionary, std::string name = {})
      : transactions_(std::move(transactions)), dictionary_(std::move(dictionary)), name_(std::move(name)) {
    for (const auto& t : transactions_) {
      if (t.empty()) throw InputError("empty transaction");
      if (!is_strictly_increasing(t)) throw InputError("transaction items not strictly increasing");
      if (t.back() >= dictionary_.size()) throw InputError("item id outside dictionary");
    }
  }

  // Builds a database directly from dense ids. Each transaction is sorted and
  // deduplicated, empty ones are dropped. Token of id i is its decimal value.
  static TransactionDatabase from_ids(std::vector<Transaction> transactions, std::string name = {}) {
    ItemId max_id = 0;
    bool any = false;
    std::vector<Transaction> kept;
    kept.reserve(transactions.size());
    for (auto& t : transactions) {
      std::sort(t.begin(), t.end());
      t.erase(std::unique(t.begin(), t.end()), t.end());
      if (t.empty()) continue;
      max_id = std::max(max_id, t.back());
      any = true;
      kept.push_back(std::move(t));
    }
    ItemDictionary dict;
    if (any) {
      for (ItemId i = 0; i <= max_id; ++i) dict.intern(std::to_string(i));
    }
    return TransactionDatabase(std::move(kept), std::move(dict), std::move(name));
  }

  const std::vector<Transaction>& transactions() const noexcept { return transactions_; }
  const ItemDictionary& dictionary() const noexcept { return dictionary_; }
  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return transactions_.size(); }
  bool empty() const noexcept { return transactions_.empty(); }
  std::size_t num_items() const noexcept { return dictionary_.size(); }

  auto begin() const noexcept { return transactions_.begin(); }
  auto end() const noexcept { return transactions_.end(); }

 private:
  std::vector<Transaction> transactions_;
  ItemDictionary dictionary_;
  std::string name_;
};

namespace detail {

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

inline void validate_token(std::string_view tok, std::size_t line) {
  if (tok.front() == '-') {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(tok.data() + 1, tok.data() + tok.size(), v);
    if (ec == std::errc() && p == tok.data() + tok.size())
      throw ParseError(line, "negative item value '" + std::string(tok) + "'");
    throw ParseError(line, "non-integer token '" + std::string(tok) + "'");
  }
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec == std::errc::result_out_of_range) throw ParseError(line, "item value out of range '" + std::string(tok) + "'");
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw ParseError(line, "non-integer token '" + std::string(tok) + "'");
}

}  // namespace detail

// Reads the SPMF transaction format: one transaction per line, items as
// whitespace-separated non-negative integers. Blank lines and SPMF metadata
// lines (starting with '#', '%' or '@') are skipped.
inline TransactionDatabase parse_spmf(std::istream& in, std::string name = {}) {
  ItemDictionary dict;
  std::vector<Transaction> txns;
  std::string line;
  std::size_t lineno = 0;
  Transaction current;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view rest(line);
    std::size_t first = 0;
    while (first < rest.size() && detail::is_space(rest[first])) ++first;
    if (first == rest.size()) continue;
    if (rest[first] == '#' || rest[first] == '%' || rest[first] == '@') continue;

    current.clear();
    std::size_t pos = first;
    while (pos < rest.size()) {
      while (pos < rest.size() && detail::is_space(rest[pos])) ++pos;
      if (pos == rest.size()) break;
      std::size_t end = pos;
      while (end < rest.size() && !detail::is_space(rest[end])) ++end;
      auto tok = rest.substr(pos, end - pos);
      detail::validate_token(tok, lineno);
      current.push_back(dict.intern(tok));
      pos = end;
    }
    std::sort(current.begin(), current.end());
    current.erase(std::unique(current.begin(), current.end()), current.end());
    txns.push_back(current);
  }
  if (in.bad()) throw IoError("read failure");
  return TransactionDatabase(std::move(txns), std::move(dict), std::move(name));
}

inline TransactionDatabase parse_spmf(std::string_view text, std::string name = {}) {
  std::istringstream in{std::string(text)};
  return parse_spmf(in, std::move(name));
}

inline TransactionDatabase load_spmf(const std::string& path, std::string name = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  if (name.empty()) name = path;
  return parse_spmf(in, std::move(name));
}

// Items of each transaction are written in dense-id order, so parsing the
// output reproduces the same ids.
inline void write_spmf(const TransactionDatabase& db, std::ostream& out) {
  const auto& dict = db.dictionary();
  for (const auto& t : db) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i) out.put(' ');
      out << dict.token(t[i]);
    }
    out.put('\n');
  }
}

inline std::string write_spmf(const TransactionDatabase& db) {
  std::ostringstream out;
  write_spmf(db, out);
  return out.str();
}

// Converts a relative threshold to a transaction count: ceil(ratio * n), at least 1.
inline Support absolute_minsup(double ratio, std::size_t db_size) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("minimum support ratio must lie in (0, 1]");
  // The epsilon absorbs representation error, e.g. 0.003 * 100000.
  const double scaled = ratio * static_cast<double>(db_size);
  const double count = std::ceil(scaled - 1e-9 * std::max(1.0, scaled));
  return std::max<Support>(1, static_cast<Support>(count));
}

struct SyntheticParams {
  std::size_t num_transactions = 100000;
  std::size_t num_items = 870;
  std::size_t avg_transaction_len = 10;
  std::size_t avg_pattern_len = 4;
  std::size_t num_patterns = 1000;
  std::uint64_t seed = 42;
  std::string name = "T10I4D100K";
};

inline void validate(const SyntheticParams& p) {
  if (p.num_items == 0) throw ConfigError("num_items must be positive");
  if (p.avg_pattern_len == 0) throw ConfigError("avg_pattern_len must be positive");
  if (p.avg_transaction_len == 0) throw ConfigError("avg_transaction_len must be positive");
  if (p.avg_pattern_len > p.avg_transaction_len) throw ConfigError("avg_pattern_len exceeds avg_transaction_len");
  if (p.avg_transaction_len > p.num_items) throw ConfigError("avg_transaction_len exceeds num_items");
  if (p.num_patterns == 0) throw ConfigError("num_patterns must be positive");
}

// IBM Quest style generator. A pool of weighted pattern templates is drawn
// first; each transaction is filled from corrupted templates up to a
// Poisson-distributed length, with a small share of uniform noise items.
inline TransactionDatabase generate_synthetic(const SyntheticParams& params) {
  validate(params);
  constexpr double kNoiseRate = 0.1;
  constexpr double kCorrelation = 0.5;

  std::mt19937_64 rng(params.seed);
  std::uniform_int_distribution<std::uint32_t> any_item(0, static_cast<std::uint32_t>(params.num_items - 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  struct Pattern {
    std::vector<std::uint32_t> items;
    double corruption;
  };
  std::vector<Pattern> patterns;
  std::vector<double> weights;
  patterns.reserve(params.num_patterns);
  {
    std::poisson_distribution<std::size_t> plen(static_cast<double>(params.avg_pattern_len));
    std::exponential_distribution<double> shared(1.0 / kCorrelation);
    std::exponential_distribution<double> weight(1.0);
    std::normal_distribution<double> corruption(0.5, 0.1);
    for (std::size_t i = 0; i < params.num_patterns; ++i) {
      std::size_t len = std::clamp<std::size_t>(plen(rng), 1, params.num_items);
      std::vector<std::uint32_t> items;
      if (!patterns.empty()) {
        // Part of each template is inherited from its predecessor.
        auto prev = patterns.back().items;
        std::shuffle(prev.begin(), prev.end(), rng);
        auto take = static_cast<std::size_t>(std::min(1.0, shared(rng)) * static_cast<double>(len));
        take = std::min({take, prev.size(), len});
        items.assign(prev.begin(), prev.begin() + static_cast<std::ptrdiff_t>(take));
      }
      while (items.size() < len) {
        auto it = any_item(rng);
        if (std::find(items.begin(), items.end(), it) == items.end()) items.push_back(it);
      }
      patterns.push_back({std::move(items), std::clamp(corruption(rng), 0.0, 1.0)});
      weights.push_back(weight(rng));
    }
  }
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::poisson_distribution<std::size_t> tlen(static_cast<double>(params.avg_transaction_len));
  std::binomial_distribution<std::size_t> noise_count;

  ItemDictionary dict;
  std::vector<Transaction> txns;
  txns.reserve(params.num_transactions);
  std::vector<std::uint32_t> raw;
  std::vector<std::uint32_t> scratch;
  for (std::size_t n = 0; n < params.num_transactions; ++n) {
    const std::size_t len = std::clamp<std::size_t>(tlen(rng), 1, params.num_items);
    const std::size_t noise = noise_count(rng, decltype(noise_count)::param_type(len, kNoiseRate));
    const std::size_t from_patterns = len - noise;
    raw.clear();
    auto add = [&raw](std::uint32_t it) {
      if (std::find(raw.begin(), raw.end(), it) == raw.end()) raw.push_back(it);
    };
    for (std::size_t attempts = 0; raw.size() < from_patterns && attempts < 4 * len + 8; ++attempts) {
      const auto& pat = patterns[pick(rng)];
      scratch = pat.items;
      std::shuffle(scratch.begin(), scratch.end(), rng);
      std::size_t drop = 0;
      while (drop < scratch.size() && unit(rng) < pat.corruption) ++drop;
      for (std::size_t i = drop; i < scratch.size() && raw.size() < from_patterns; ++i) add(scratch[i]);
    }
    while (raw.size() < len) add(any_item(rng));

    std::sort(raw.begin(), raw.end());
    Transaction t;
    t.reserve(raw.size());
    for (auto it : raw) t.push_back(dict.intern(std::to_string(it)));
    std::sort(t.begin(), t.end());
    txns.push_back(std::move(t));
  }
  return TransactionDatabase(std::move(txns), std::move(dict), params.name);
}

struct DatabaseStats {
  std::size_t transactions = 0;
  std::size_t items = 0;
  std::size_t min_len = 0;
  std::size_t max_len = 0;
  double mean_len = 0.0;
};

inline DatabaseStats describe(const TransactionDatabase& db) {
  DatabaseStats s;
  s.transactions = db.size();
  s.items = db.num_items();
  if (db.empty()) return s;
  s.min_len = db.transactions().front().size();
  std::size_t total = 0;
  for (const auto& t : db) {
    s.min_len = std::min(s.min_len, t.size());
    s.max_len = std::max(s.max_len, t.size());
    total += t.size();
  }
  s.mean_len = static_cast<double>(total) / static_cast<double>(db.size());
  return s;
}

}  // namespace fim
