#include "actordb/engine/executor.hpp"

#include <pthread.h>
#include <sched.h>

namespace actordb {

namespace {
thread_local Executor* tl_current = nullptr;
}

Executor::Executor(std::string id, unsigned width, std::vector<int> cpus) : id_(std::move(id)), cpus_(std::move(cpus)) {
  if (width == 0) width = 1;
  for (unsigned i = 0; i < width; ++i) threads_.emplace_back([this, i] { work(i); });
}

Executor::~Executor() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  for (auto& t : threads_) t.join();
}

Executor* Executor::current() { return tl_current; }

void Executor::post(std::function<void()> task) {
  {
    std::lock_guard lock(mu_);
    tasks_.push_back(std::move(task));
  }
  cv_.notify_one();
}

bool Executor::run_one() {
  std::function<void()> task;
  {
    std::lock_guard lock(mu_);
    if (tasks_.empty()) return false;
    task = std::move(tasks_.front());
    tasks_.pop_front();
  }
  task();
  return true;
}

std::size_t Executor::queued() const {
  std::lock_guard lock(mu_);
  return tasks_.size();
}

void Executor::work(std::size_t index) {
  tl_current = this;
  if (!cpus_.empty()) {
    cpu_set_t set;
    CPU_ZERO(&set);
    CPU_SET(cpus_[index % cpus_.size()], &set);
    pthread_setaffinity_np(pthread_self(), sizeof set, &set);  // hint only
  }
  for (;;) {
    std::function<void()> task;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [this] { return stop_ || !tasks_.empty(); });
      if (tasks_.empty()) return;
      task = std::move(tasks_.front());
      tasks_.pop_front();
    }
    task();
  }
}

}  // namespace actordb
