#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <thread>

#include "actordb/durability/log_format.hpp"

namespace actordb::durability {

enum class FlushPolicy : std::uint8_t { PerCommit, Group, None };

struct LogOptions {
  std::string path;
  FlushPolicy policy = FlushPolicy::PerCommit;
  std::uint32_t group_interval_ms = 5;
};

/// Append-only redo log with a single appender. Commit threads hand their batch to append(),
/// which assigns the tid inside the append critical section so log order equals tid order.
class RedoLog {
 public:
  explicit RedoLog(LogOptions options);
  ~RedoLog();

  RedoLog(const RedoLog&) = delete;
  RedoLog& operator=(const RedoLog&) = delete;

  /// Assigns a tid via `assign_tid`, writes the batch and flushes per policy. Returns the tid.
  /// Throws IoError; nothing is considered written in that case.
  std::uint64_t append(const CommitBatch& batch, const std::function<std::uint64_t()>& assign_tid);

  void flush();
  /// Drops buffered, unflushed bytes and closes the file without flushing.
  void crash();

  /// Test hook: the next `n` appends fail with IoError.
  void inject_failures(int n) { injected_failures_.store(n); }

  const LogOptions& options() const { return options_; }
  std::uint64_t bytes_written() const { return bytes_.load(); }

 private:
  void write_all(const std::string& bytes);
  void flusher();

  LogOptions options_;
  int fd_ = -1;
  std::mutex mu_;
  std::string pending_;  // group-commit buffer
  std::atomic<int> injected_failures_{0};
  std::atomic<std::uint64_t> bytes_{0};
  bool stop_ = false;
  std::condition_variable cv_;
  std::thread flusher_;
};

}  // namespace actordb::durability
