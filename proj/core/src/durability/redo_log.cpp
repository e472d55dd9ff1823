#include "actordb/durability/redo_log.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

#include "actordb/common/error.hpp"

namespace actordb::durability {

namespace {

[[noreturn]] void io_failure(const std::string& what) {
  raise(ErrorCode::IoError, what + ": " + std::strerror(errno));
}

}  // namespace

RedoLog::RedoLog(LogOptions options) : options_(std::move(options)) {
  fd_ = ::open(options_.path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) io_failure("cannot open log " + options_.path);
  off_t end = ::lseek(fd_, 0, SEEK_END);
  bytes_.store(end < 0 ? 0 : static_cast<std::uint64_t>(end));
  if (options_.policy == FlushPolicy::Group) flusher_ = std::thread([this] { flusher(); });
}

RedoLog::~RedoLog() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  if (flusher_.joinable()) flusher_.join();
  std::lock_guard lock(mu_);
  if (fd_ >= 0) {
    try {
      if (!pending_.empty()) write_all(pending_);
      ::fdatasync(fd_);
    } catch (const Error&) {
    }
    ::close(fd_);
  }
}

std::uint64_t RedoLog::append(const CommitBatch& batch, const std::function<std::uint64_t()>& assign_tid) {
  std::lock_guard lock(mu_);
  if (fd_ < 0) raise(ErrorCode::IoError, "log is closed");
  if (int n = injected_failures_.load(); n > 0) {
    injected_failures_.store(n - 1);
    raise(ErrorCode::IoError, "injected log failure");
  }
  const std::uint64_t tid = assign_tid();
  std::string bytes = encode_batch(tid, batch);
  switch (options_.policy) {
    case FlushPolicy::PerCommit:
      write_all(bytes);
      if (::fdatasync(fd_) != 0) io_failure("fdatasync");
      break;
    case FlushPolicy::Group: pending_ += bytes; break;
    case FlushPolicy::None: write_all(bytes); break;
  }
  return tid;
}

// Writes all of `bytes` or rolls the file back to its previous length.
void RedoLog::write_all(const std::string& bytes) {
  const std::uint64_t start = bytes_.load();
  std::size_t done = 0;
  while (done < bytes.size()) {
    ssize_t n = ::write(fd_, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      int saved = errno;
      [[maybe_unused]] int rc = ::ftruncate(fd_, static_cast<off_t>(start));
      errno = saved;
      io_failure("log write");
    }
    done += static_cast<std::size_t>(n);
  }
  bytes_.fetch_add(bytes.size());
}

void RedoLog::flush() {
  std::lock_guard lock(mu_);
  if (fd_ < 0) return;
  if (!pending_.empty()) {
    write_all(pending_);
    pending_.clear();
  }
  if (::fdatasync(fd_) != 0) io_failure("fdatasync");
}

void RedoLog::crash() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
    pending_.clear();
  }
  cv_.notify_all();
  if (flusher_.joinable()) flusher_.join();
  std::lock_guard lock(mu_);
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void RedoLog::flusher() {
  std::unique_lock lock(mu_);
  while (!stop_) {
    cv_.wait_for(lock, std::chrono::milliseconds(options_.group_interval_ms));
    if (stop_ || fd_ < 0 || pending_.empty()) continue;
    try {
      write_all(pending_);
      pending_.clear();
      ::fdatasync(fd_);
    } catch (const Error&) {
      // Retried on the next interval; the group window is the documented loss bound.
    }
  }
}

}  // namespace actordb::durability
