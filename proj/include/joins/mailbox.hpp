// Actor mailbox: a multi-producer blocking FIFO plus a consumer-private
// backlog that supports bulk prepend. Dynamic pattern switches push a
// matcher's unconsumed messages back through the backlog so the next
// matcher sees the full history in arrival order.

#pragma once

#include "joins/core.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>

namespace joins {

class MailboxClosed : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class Mailbox {
public:
  Mailbox() = default;
  Mailbox(const Mailbox&) = delete;
  Mailbox& operator=(const Mailbox&) = delete;

  /// Appends to the main queue. Safe from any thread.
  void put(Message m) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (closed_) throw MailboxClosed("Mailbox: put on closed mailbox");
      main_.push_back(std::move(m));
      ++puts_;
    }
    cv_.notify_one();
  }

  /// Signals that no further puts will happen; blocked takes drain the
  /// remaining messages and then return nothing.
  void close() {
    {
      std::lock_guard<std::mutex> lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

  bool closed() const {
    std::lock_guard<std::mutex> lock(mu_);
    return closed_;
  }

  /// Consumer-side take: backlog head if the backlog is nonempty, otherwise
  /// blocks on the main queue. Returns nothing once closed and drained.
  std::optional<Message> take() {
    if (!backlog_.empty()) {
      Message m = std::move(backlog_.front());
      backlog_.pop_front();
      return m;
    }
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [&] { return !main_.empty() || closed_; });
    if (main_.empty()) return std::nullopt;
    Message m = std::move(main_.front());
    main_.pop_front();
    return m;
  }

  /// Timed take: like take(), but gives up after `timeout` when nothing
  /// arrives.
  template <class Rep, class Period>
  std::optional<Message> take_for(std::chrono::duration<Rep, Period> timeout) {
    if (!backlog_.empty()) {
      Message m = std::move(backlog_.front());
      backlog_.pop_front();
      return m;
    }
    std::unique_lock<std::mutex> lock(mu_);
    if (!cv_.wait_for(lock, timeout, [&] { return !main_.empty() || closed_; }))
      return std::nullopt;
    if (main_.empty()) return std::nullopt;
    Message m = std::move(main_.front());
    main_.pop_front();
    return m;
  }

  /// Consumer-side bulk prepend: subsequent takes see `msgs` in order,
  /// before any older backlog and before any main-queue message. A later
  /// prepend batch precedes earlier backlog (stack of batches).
  void prepend_all(std::vector<Message> msgs) {
    backlog_.insert(backlog_.begin(), std::make_move_iterator(msgs.begin()),
                    std::make_move_iterator(msgs.end()));
  }

  /// Messages never taken; meaningful once the consumer has terminated.
  std::vector<Message> drain_remaining() {
    std::vector<Message> out(std::make_move_iterator(backlog_.begin()),
                             std::make_move_iterator(backlog_.end()));
    backlog_.clear();
    std::lock_guard<std::mutex> lock(mu_);
    out.insert(out.end(), std::make_move_iterator(main_.begin()),
               std::make_move_iterator(main_.end()));
    main_.clear();
    return out;
  }

  std::uint64_t total_put() const {
    std::lock_guard<std::mutex> lock(mu_);
    return puts_;
  }

  std::size_t pending() const {
    std::lock_guard<std::mutex> lock(mu_);
    return backlog_.size() + main_.size();
  }

private:
  std::deque<Message> backlog_;  // consumer lane only; no lock needed
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Message> main_;
  bool closed_ = false;
  std::uint64_t puts_ = 0;
};

/// Send endpoint of an actor: delivers messages to the target mailbox's
/// main queue.
class ActorRef {
public:
  ActorRef() = default;
  explicit ActorRef(std::shared_ptr<Mailbox> mb) : mb_(std::move(mb)) {}

  bool valid() const { return mb_ != nullptr; }

  void tell(Message m) const {
    if (!mb_) throw ContractViolation("ActorRef: tell on empty reference");
    mb_->put(std::move(m));
  }

  Mailbox& mailbox() const {
    if (!mb_) throw ContractViolation("ActorRef: empty reference");
    return *mb_;
  }

  const std::shared_ptr<Mailbox>& mailbox_ptr() const { return mb_; }

private:
  std::shared_ptr<Mailbox> mb_;
};

}  // namespace joins
