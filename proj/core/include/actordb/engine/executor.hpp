#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace actordb {

/// Fixed-width thread pool. A worker blocked on a future keeps draining its own pool through
/// run_one(), so nested calls into a saturated pool cannot starve.
class Executor {
 public:
  Executor(std::string id, unsigned width, std::vector<int> cpus = {});
  ~Executor();

  Executor(const Executor&) = delete;
  Executor& operator=(const Executor&) = delete;

  void post(std::function<void()> task);
  bool run_one();

  const std::string& id() const { return id_; }
  unsigned width() const { return static_cast<unsigned>(threads_.size()); }
  std::size_t queued() const;

  /// Pool of the calling worker thread, or nullptr.
  static Executor* current();

 private:
  void work(std::size_t index);

  std::string id_;
  std::vector<int> cpus_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::function<void()>> tasks_;
  bool stop_ = false;
  std::vector<std::thread> threads_;
};

}  // namespace actordb
