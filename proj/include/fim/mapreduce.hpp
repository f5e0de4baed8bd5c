#pragma once

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fim/datasets.hpp"
#include "fim/error.hpp"
#include "fim/mapreduce/bounded_queue.hpp"
#include "fim/mapreduce/codec.hpp"
#include "fim/mapreduce/thread_pool.hpp"
#include "fim/types.hpp"

namespace fim::mr {

enum class BackendKind { sequential, batch_materialize, in_memory_iterative, pipelined };

inline constexpr std::array kAllBackends{BackendKind::sequential, BackendKind::batch_materialize,
                                         BackendKind::in_memory_iterative, BackendKind::pipelined};

inline std::string_view to_string(BackendKind k) {
  switch (k) {
    case BackendKind::sequential: return "sequential";
    case BackendKind::batch_materialize: return "batch";
    case BackendKind::in_memory_iterative: return "inmemory";
    case BackendKind::pipelined: return "pipelined";
  }
  return "?";
}

inline BackendKind parse_backend(std::string_view s) {
  for (auto k : kAllBackends)
    if (to_string(k) == s) return k;
  throw ConfigError("unknown backend '" + std::string(s) + "'");
}

inline std::size_t default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Backend {
  BackendKind kind = BackendKind::sequential;
  std::size_t workers = default_workers();
  std::filesystem::path spill_dir = std::filesystem::temp_directory_path();  // batch only
  std::size_t channel_capacity = 1 << 16;                                   // pipelined only, in pairs

  void validate() const {
    if (workers == 0) throw ConfigError("backend needs at least one worker");
    if (channel_capacity == 0) throw ConfigError("channel capacity must be at least 1");
  }
};

// Opaque byte-comparable key.
using Key = std::string;

template <class V>
struct KeyValue {
  Key key;
  V value;

  bool operator==(const KeyValue&) const = default;
};

// Big-endian item ids, so byte order matches lexicographic itemset order.
inline Key encode_itemset(std::span<const ItemId> items) {
  Key k(items.size() * 4, '\0');
  for (std::size_t i = 0; i < items.size(); ++i) {
    k[4 * i] = static_cast<char>((items[i] >> 24) & 0xff);
    k[4 * i + 1] = static_cast<char>((items[i] >> 16) & 0xff);
    k[4 * i + 2] = static_cast<char>((items[i] >> 8) & 0xff);
    k[4 * i + 3] = static_cast<char>(items[i] & 0xff);
  }
  return k;
}

inline Itemset decode_itemset(std::string_view k) {
  Itemset s(k.size() / 4);
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto b = [&](std::size_t j) { return static_cast<ItemId>(static_cast<unsigned char>(k[4 * i + j])); };
    s[i] = (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
  }
  return s;
}

inline std::uint64_t key_hash(std::string_view key) {
  constexpr std::uint64_t kSeed = 0x9e3779b97f4a7c15ULL;
  std::uint64_t h = 0xcbf29ce484222325ULL ^ kSeed;
  for (char c : key) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return h;
}

template <class T>
struct Partition {
  std::size_t index = 0;
  std::span<const T> items;
};

// Contiguous, balanced split: sizes differ by at most one and the first
// (n mod p) partitions take the extra element.
template <class T>
std::vector<Partition<T>> partition(std::span<const T> data, std::size_t p) {
  if (p == 0) throw ConfigError("partition count must be at least 1");
  std::vector<Partition<T>> parts;
  const std::size_t n = data.size();
  const std::size_t count = std::min(p, n);
  if (count == 0) return parts;
  const std::size_t base = n / count;
  const std::size_t extra = n % count;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t len = base + (i < extra ? 1 : 0);
    parts.push_back({i, data.subspan(offset, len)});
    offset += len;
  }
  return parts;
}

inline std::vector<Partition<Transaction>> partition(const TransactionDatabase& db, std::size_t p) {
  return partition(std::span<const Transaction>(db.transactions()), p);
}

template <class V>
class Emitter {
 public:
  virtual ~Emitter() = default;
  virtual void emit(Key key, V value) = 0;
  void operator()(Key key, V value) { emit(std::move(key), std::move(value)); }
};

// map runs once per partition; reduce folds the values of one key. When
// `associative` is set the reducer is declared associative and commutative,
// so it may also be applied incrementally to two values at a time.
template <class In, class V>
struct Stage {
  std::string name;
  std::function<void(const Partition<In>&, Emitter<V>&)> map;
  std::function<V(const Key&, std::span<V>)> reduce;
  bool associative = false;
};

struct StageReport {
  std::string stage_name;
  Duration map_time{0};
  Duration shuffle_time{0};
  Duration reduce_time{0};
  std::uint64_t bytes_materialized = 0;
  std::uint64_t pairs_emitted = 0;
  std::size_t max_buffered_pairs = 0;  // pipelined only
  Duration wall_time{0};
};

template <class V>
struct StageResult {
  std::vector<KeyValue<V>> output;  // sorted by key
  StageReport report;
};

template <class V>
struct IterationResult {
  std::vector<KeyValue<V>> result;
  std::vector<StageReport> reports;
};

class IterationLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultIterationCap = 64;

namespace detail {

template <class V>
class BufferEmitter final : public Emitter<V> {
 public:
  explicit BufferEmitter(std::vector<KeyValue<V>>& out) : out_(out) {}
  void emit(Key key, V value) override { out_.push_back({std::move(key), std::move(value)}); }

 private:
  std::vector<KeyValue<V>>& out_;
};

// Groups pairs by key (stable, so values keep emission order) and reduces.
template <class V>
void reduce_sorted(std::vector<KeyValue<V>>& pairs, const std::function<V(const Key&, std::span<V>)>& reduce,
                   std::vector<KeyValue<V>>& out) {
  std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
  std::vector<V> values;
  for (std::size_t i = 0; i < pairs.size();) {
    std::size_t j = i;
    values.clear();
    while (j < pairs.size() && pairs[j].key == pairs[i].key) values.push_back(std::move(pairs[j++].value));
    V reduced = reduce(pairs[i].key, values);
    out.push_back({std::move(pairs[i].key), std::move(reduced)});
    i = j;
  }
}

inline void sort_by_key(auto& out) {
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
}

// Append-only file with explicit fsync, closed on destruction.
class SpillFile {
 public:
  SpillFile() = default;
  explicit SpillFile(const std::filesystem::path& path) : path_(path) {
    fd_ = ::open(path.c_str(), O_CREAT | O_TRUNC | O_WRONLY | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError("cannot create spill file '" + path.string() + "'");
  }
  SpillFile(SpillFile&& o) noexcept : path_(std::move(o.path_)), fd_(std::exchange(o.fd_, -1)) {}
  SpillFile& operator=(SpillFile&& o) noexcept {
    close();
    path_ = std::move(o.path_);
    fd_ = std::exchange(o.fd_, -1);
    return *this;
  }
  ~SpillFile() { close(); }

  void append(std::string_view bytes) {
    const char* p = bytes.data();
    std::size_t left = bytes.size();
    while (left > 0) {
      auto n = ::write(fd_, p, left);
      if (n < 0) throw IoError("write failed on '" + path_.string() + "'");
      p += n;
      left -= static_cast<std::size_t>(n);
    }
  }

  void sync() {
    if (fd_ >= 0 && ::fsync(fd_) != 0) throw IoError("fsync failed on '" + path_.string() + "'");
  }

  void close() {
    if (fd_ >= 0) ::close(std::exchange(fd_, -1));
  }

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::string data;
  const int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd < 0) throw IoError("cannot open spill file '" + path.string() + "'");
  char buf[1 << 16];
  for (;;) {
    auto n = ::read(fd, buf, sizeof buf);
    if (n < 0) {
      ::close(fd);
      throw IoError("read failed on '" + path.string() + "'");
    }
    if (n == 0) break;
    data.append(buf, static_cast<std::size_t>(n));
  }
  ::close(fd);
  return data;
}

inline std::filesystem::path make_job_dir(const std::filesystem::path& root) {
  static std::atomic<std::uint64_t> counter{0};
  std::error_code ec;
  for (int attempt = 0; attempt < 16; ++attempt) {
    auto dir = root / ("fim-job-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(root, ec);
    if (std::filesystem::create_directory(dir, ec)) return dir;
    if (ec && ec != std::errc::file_exists) break;
  }
  throw IoError("spill directory '" + root.string() + "' is not writable" + (ec ? ": " + ec.message() : ""));
}

}  // namespace detail

// Runs map/reduce stages over a fixed set of input partitions under one
// backend contract. An executor is the unit of state that lives across the
// stages of an iterative job:
//  - sequential: one thread, map output grouped directly.
//  - batch_materialize: input partitions are written to spill files once and
//    re-read for every stage; map output goes through fsync'd per-bucket spill
//    files; a fresh worker pool is started per stage.
//  - in_memory_iterative: input partitions are copied into an in-memory cache
//    once; map output is buffered per task, shuffled into buckets and grouped.
//  - pipelined: mappers stream batches of pairs through bounded queues to
//    bucket reducers that fold values as they arrive; the worker pool lives as
//    long as the executor.
template <class In>
class Executor {
 public:
  Executor(Backend backend, std::vector<Partition<In>> partitions)
      : backend_(std::move(backend)), source_(std::move(partitions)) {
    backend_.validate();
    switch (backend_.kind) {
      case BackendKind::sequential:
        break;
      case BackendKind::batch_materialize:
        spill_input();
        break;
      case BackendKind::in_memory_iterative:
        pool_ = std::make_unique<ThreadPool>(backend_.workers);
        cache_.resize(source_.size());
        for (std::size_t i = 0; i < source_.size(); ++i)
          cache_[i].assign(source_[i].items.begin(), source_[i].items.end());
        break;
      case BackendKind::pipelined:
        pool_ = std::make_unique<ThreadPool>(2 * backend_.workers);
        break;
    }
  }

  Executor(const Executor&) = delete;
  Executor& operator=(const Executor&) = delete;

  ~Executor() {
    pool_.reset();
    if (job_dir_.empty()) return;
    if (failed_) {
      std::cerr << "warning: keeping spill directory " << job_dir_ << " after failure\n";
      return;
    }
    std::error_code ec;
    std::filesystem::remove_all(job_dir_, ec);
  }

  const Backend& backend() const noexcept { return backend_; }
  std::size_t num_partitions() const noexcept { return source_.size(); }
  const std::filesystem::path& spill_directory() const noexcept { return job_dir_; }

  template <class V>
  StageResult<V> run(const Stage<In, V>& stage) {
    if (!stage.map || !stage.reduce) throw ConfigError("stage '" + stage.name + "' needs map and reduce functions");
    if (backend_.kind == BackendKind::pipelined && !stage.associative)
      throw ConfigError("pipelined backend requires an associative reducer (stage '" + stage.name + "')");
    StageResult<V> result;
    if (source_.empty()) {
      result.report.stage_name = stage.name;
      return result;
    }
    const auto start = Clock::now();
    try {
      switch (backend_.kind) {
        case BackendKind::sequential: result = run_sequential(stage); break;
        case BackendKind::batch_materialize: result = run_batch(stage); break;
        case BackendKind::in_memory_iterative: result = run_in_memory(stage); break;
        case BackendKind::pipelined: result = run_pipelined(stage); break;
      }
    } catch (...) {
      failed_ = true;
      throw;
    }
    result.report.stage_name = stage.name;
    result.report.wall_time = Clock::now() - start;
    return result;
  }

 private:
  template <class V>
  StageResult<V> run_sequential(const Stage<In, V>& stage) {
    StageResult<V> r;
    std::vector<KeyValue<V>> pairs;
    detail::BufferEmitter<V> emitter(pairs);
    auto t0 = Clock::now();
    for (const auto& part : source_) stage.map(part, emitter);
    auto t1 = Clock::now();
    r.report.pairs_emitted = pairs.size();
    detail::reduce_sorted(pairs, stage.reduce, r.output);
    r.report.map_time = t1 - t0;
    r.report.reduce_time = Clock::now() - t1;
    return r;
  }

  static constexpr std::size_t kFlushBytes = 1 << 20;

  std::size_t buckets() const noexcept { return backend_.workers; }

  template <class V>
  StageResult<V> run_in_memory(const Stage<In, V>& stage) {
    StageResult<V> r;
    const std::size_t n = cache_.size();
    std::vector<std::vector<KeyValue<V>>> task_out(n);
    auto t0 = Clock::now();
    parallel_for(*pool_, n, [&](std::size_t i) {
      detail::BufferEmitter<V> emitter(task_out[i]);
      stage.map(Partition<In>{source_[i].index, std::span<const In>(cache_[i])}, emitter);
    });
    auto t1 = Clock::now();

    const std::size_t nb = buckets();
    std::vector<std::vector<KeyValue<V>>> bucket(nb);
    for (auto& out : task_out) {
      r.report.pairs_emitted += out.size();
      for (auto& kv : out) bucket[key_hash(kv.key) % nb].push_back(std::move(kv));
      out.clear();
      out.shrink_to_fit();
    }
    auto t2 = Clock::now();

    std::vector<std::vector<KeyValue<V>>> reduced(nb);
    parallel_for(*pool_, nb, [&](std::size_t b) { detail::reduce_sorted(bucket[b], stage.reduce, reduced[b]); });
    for (auto& part : reduced)
      for (auto& kv : part) r.output.push_back(std::move(kv));
    detail::sort_by_key(r.output);
    r.report.map_time = t1 - t0;
    r.report.shuffle_time = t2 - t1;
    r.report.reduce_time = Clock::now() - t2;
    return r;
  }

  void spill_input() {
    job_dir_ = detail::make_job_dir(backend_.spill_dir);
    for (const auto& part : source_) {
      std::string bytes;
      for (const auto& rec : part.items) Codec<In>::write(bytes, rec);
      detail::SpillFile f(job_dir_ / ("input-" + std::to_string(part.index) + ".bin"));
      f.append(bytes);
      f.sync();
      input_files_.push_back(f.path());
    }
  }

  // Spill files hold chunks: [u32 partition][u64 length][records], each
  // record being a length-prefixed key followed by the encoded value.
  template <class V>
  StageResult<V> run_batch(const Stage<In, V>& stage) {
    StageResult<V> r;
    const std::size_t nb = buckets();
    const auto stage_dir = job_dir_ / ("stage-" + std::to_string(stage_seq_++));
    std::filesystem::create_directory(stage_dir);
    std::vector<detail::SpillFile> files;
    std::vector<std::mutex> file_mu(nb);
    for (std::size_t b = 0; b < nb; ++b) files.emplace_back(stage_dir / ("bucket-" + std::to_string(b) + ".spill"));
    std::atomic<std::uint64_t> bytes{0};
    std::atomic<std::uint64_t> pairs{0};

    auto t0 = Clock::now();
    {
      ThreadPool pool(backend_.workers);
      parallel_for(pool, input_files_.size(), [&](std::size_t i) {
        const std::string raw = detail::read_file(input_files_[i]);
        std::vector<In> records;
        for (const char *p = raw.data(), *end = raw.data() + raw.size(); p < end;)
          records.push_back(Codec<In>::read(p, end));

        struct SpillEmitter final : Emitter<V> {
          std::vector<std::string> buf;
          std::function<void(std::size_t)> flush;
          std::uint64_t count = 0;
          void emit(Key key, V value) override {
            const std::size_t b = key_hash(key) % buf.size();
            Codec<std::string>::write(buf[b], key);
            Codec<V>::write(buf[b], value);
            ++count;
            if (buf[b].size() >= kFlushBytes) flush(b);
          }
        } emitter;
        emitter.buf.resize(nb);
        emitter.flush = [&](std::size_t b) {
          auto& chunk = emitter.buf[b];
          if (chunk.empty()) return;
          std::string header;
          detail::put_le<std::uint32_t>(header, static_cast<std::uint32_t>(i));
          detail::put_le<std::uint64_t>(header, chunk.size());
          {
            std::lock_guard lock(file_mu[b]);
            files[b].append(header);
            files[b].append(chunk);
          }
          bytes += header.size() + chunk.size();
          chunk.clear();
        };
        stage.map(Partition<In>{source_[i].index, std::span<const In>(records)}, emitter);
        for (std::size_t b = 0; b < nb; ++b) emitter.flush(b);
        pairs += emitter.count;
      });
    }
    for (auto& f : files) {
      f.sync();
      f.close();
    }
    auto t1 = Clock::now();

    std::vector<std::vector<KeyValue<V>>> reduced(nb);
    auto t2 = t1;
    {
      ThreadPool pool(backend_.workers);
      std::vector<Duration> read_time(nb);
      parallel_for(pool, nb, [&](std::size_t b) {
        auto rs = Clock::now();
        const std::string raw = detail::read_file(files[b].path());
        struct Tagged {
          std::uint32_t part;
          KeyValue<V> kv;
        };
        std::vector<Tagged> recs;
        for (const char *p = raw.data(), *end = raw.data() + raw.size(); p < end;) {
          const auto part = detail::get_le<std::uint32_t>(p, end);
          const auto len = detail::get_le<std::uint64_t>(p, end);
          const char* chunk_end = p + len;
          if (chunk_end > end) throw IoError("truncated spill chunk");
          while (p < chunk_end) {
            Key key = Codec<std::string>::read(p, chunk_end);
            V value = Codec<V>::read(p, chunk_end);
            recs.push_back({part, {std::move(key), std::move(value)}});
          }
        }
        std::stable_sort(recs.begin(), recs.end(), [](const Tagged& a, const Tagged& c) { return a.part < c.part; });
        std::vector<KeyValue<V>> kvs;
        kvs.reserve(recs.size());
        for (auto& t : recs) kvs.push_back(std::move(t.kv));
        recs.clear();
        read_time[b] = Clock::now() - rs;
        detail::reduce_sorted(kvs, stage.reduce, reduced[b]);
      });
      t2 = t1 + *std::max_element(read_time.begin(), read_time.end());
    }
    for (auto& part : reduced)
      for (auto& kv : part) r.output.push_back(std::move(kv));
    detail::sort_by_key(r.output);
    std::error_code ec;
    std::filesystem::remove_all(stage_dir, ec);

    r.report.map_time = t1 - t0;
    r.report.shuffle_time = t2 - t1;
    r.report.reduce_time = Clock::now() - t2;
    r.report.bytes_materialized = bytes.load();
    r.report.pairs_emitted = pairs.load();
    return r;
  }

  template <class V>
  StageResult<V> run_pipelined(const Stage<In, V>& stage) {
    StageResult<V> r;
    const std::size_t nb = buckets();
    const std::size_t batch_size = std::min<std::size_t>(1024, backend_.channel_capacity);
    std::vector<std::unique_ptr<BoundedBatchQueue<KeyValue<V>>>> queues;
    for (std::size_t b = 0; b < nb; ++b)
      queues.push_back(std::make_unique<BoundedBatchQueue<KeyValue<V>>>(backend_.channel_capacity));
    std::vector<std::unordered_map<Key, V>> acc(nb);
    std::atomic<std::uint64_t> pairs{0};

    struct StreamEmitter final : Emitter<V> {
      std::vector<std::unique_ptr<BoundedBatchQueue<KeyValue<V>>>>* queues;
      std::vector<std::vector<KeyValue<V>>> pending;
      std::size_t batch_size;
      std::uint64_t count = 0;
      void emit(Key key, V value) override {
        const std::size_t b = key_hash(key) % pending.size();
        pending[b].push_back({std::move(key), std::move(value)});
        ++count;
        if (pending[b].size() >= batch_size) flush(b);
      }
      void flush(std::size_t b) {
        if (pending[b].empty()) return;
        auto batch = std::move(pending[b]);
        pending[b].clear();
        if (!(*queues)[b]->push(std::move(batch))) throw std::runtime_error("pipeline aborted");
      }
    };

    auto abort_all = [&] {
      for (auto& q : queues) q->abort();
    };

    auto t0 = Clock::now();
    TaskGroup reducers;
    for (std::size_t b = 0; b < nb; ++b) {
      reducers.run(*pool_, [&, b] {
        try {
          auto& table = acc[b];
          std::array<V, 2> pair_buf;
          while (auto batch = queues[b]->pop()) {
            for (auto& kv : *batch) {
              auto [it, inserted] = table.try_emplace(std::move(kv.key), std::move(kv.value));
              if (inserted) continue;
              pair_buf[0] = std::move(it->second);
              pair_buf[1] = std::move(kv.value);
              it->second = stage.reduce(it->first, pair_buf);
            }
          }
        } catch (...) {
          abort_all();
          throw;
        }
      });
    }
    TaskGroup mappers;
    for (std::size_t i = 0; i < source_.size(); ++i) {
      mappers.run(*pool_, [&, i] {
        StreamEmitter emitter;
        emitter.queues = &queues;
        emitter.pending.resize(nb);
        emitter.batch_size = batch_size;
        try {
          stage.map(source_[i], emitter);
          for (std::size_t b = 0; b < nb; ++b) emitter.flush(b);
        } catch (...) {
          abort_all();
          throw;
        }
        pairs += emitter.count;
      });
    }
    std::exception_ptr error;
    try {
      mappers.wait();
    } catch (...) {
      error = std::current_exception();
    }
    auto t1 = Clock::now();
    for (auto& q : queues) q->close();
    try {
      reducers.wait();
    } catch (...) {
      if (!error) error = std::current_exception();
    }
    if (error) std::rethrow_exception(error);

    for (std::size_t b = 0; b < nb; ++b) {
      r.report.max_buffered_pairs = std::max(r.report.max_buffered_pairs, queues[b]->high_water_mark());
      for (auto& [k, v] : acc[b]) r.output.push_back({k, std::move(v)});
    }
    detail::sort_by_key(r.output);
    r.report.map_time = t1 - t0;
    r.report.reduce_time = Clock::now() - t1;
    r.report.pairs_emitted = pairs.load();
    return r;
  }

  Backend backend_;
  std::vector<Partition<In>> source_;
  std::vector<std::vector<In>> cache_;
  std::unique_ptr<ThreadPool> pool_;
  std::filesystem::path job_dir_;
  std::vector<std::filesystem::path> input_files_;
  std::size_t stage_seq_ = 0;
  bool failed_ = false;
};

template <class In, class V>
StageResult<V> run_stage(const Stage<In, V>& stage, std::vector<Partition<In>> partitions, const Backend& backend) {
  Executor<In> exec(backend, std::move(partitions));
  return exec.run(stage);
}

// Repeatedly asks `body(iteration, prior_output)` for the next stage and runs
// it, until the body returns std::nullopt. Throws IterationLimitError when more
// than `cap` stages would run.
template <class In, class V, class Body>
IterationResult<V> iterate(Executor<In>& exec, Body&& body, std::vector<KeyValue<V>> initial = {},
                           std::size_t cap = kDefaultIterationCap) {
  IterationResult<V> out;
  out.result = std::move(initial);
  for (std::size_t i = 0;; ++i) {
    std::optional<Stage<In, V>> stage = body(i, std::as_const(out.result));
    if (!stage) break;
    if (i >= cap) throw IterationLimitError("iteration cap of " + std::to_string(cap) + " exceeded");
    auto r = exec.run(*stage);
    out.result = std::move(r.output);
    out.reports.push_back(std::move(r.report));
  }
  return out;
}

}  // namespace fim::mr
