// Minimal actor: one dedicated consumer lane draining a mailbox through a
// matcher. Rule bodies steer the lifecycle: Continue keeps matching,
// Stop(v) fulfills the completion handle, Switch(m) prepends the current
// matcher's unconsumed messages to the mailbox and swaps the matcher in.

#pragma once

#include "joins/mailbox.hpp"
#include "joins/matcher.hpp"

#include <future>
#include <thread>

namespace joins {

/// Post-termination bookkeeping for conservation checks.
struct ActorAccounting {
  std::uint64_t taken = 0;
  std::uint64_t consumed = 0;
  std::uint64_t filtered = 0;
  std::vector<Message> stored_at_exit;
};

class Actor {
public:
  explicit Actor(std::shared_ptr<Matcher> matcher)
      : matcher_(std::move(matcher)), mailbox_(std::make_shared<Mailbox>()) {
    if (!matcher_) throw ContractViolation("Actor: null matcher");
  }

  Actor(const Actor&) = delete;
  Actor& operator=(const Actor&) = delete;

  ~Actor() {
    if (lane_.joinable()) {
      mailbox_->close();
      lane_.join();
    }
  }

  /// Spawns the actor lane. Callable once.
  std::pair<std::future<Value>, ActorRef> start() {
    if (started_.exchange(true))
      throw ContractViolation("Actor: started twice");
    std::promise<Value> promise;
    std::future<Value> completion = promise.get_future();
    lane_ = std::thread([this, p = std::move(promise)]() mutable { run_loop(p); });
    return {std::move(completion), ref()};
  }

  ActorRef ref() const { return ActorRef(mailbox_); }
  Mailbox& mailbox() { return *mailbox_; }

  /// Valid after the completion handle resolves.
  const ActorAccounting& accounting() const { return accounting_; }

private:
  void run_loop(std::promise<Value>& promise) {
    ActorRef self = ref();
    ActorContext ctx{&self};
    for (;;) {
      std::optional<Result> result;
      try {
        result = matcher_->apply(*mailbox_, ctx);
      } catch (...) {
        absorb_stats();
        promise.set_exception(std::current_exception());
        return;
      }
      if (!result) {
        // Mailbox closed and drained while the matcher was still waiting.
        absorb_stats();
        accounting_.stored_at_exit = matcher_->stored_messages();
        promise.set_exception(std::make_exception_ptr(
            MailboxClosed("actor: message source exhausted")));
        return;
      }
      if (std::holds_alternative<Continue>(*result)) continue;
      if (auto* stop = std::get_if<Stop>(&*result)) {
        absorb_stats();
        accounting_.stored_at_exit = matcher_->stored_messages();
        promise.set_value(stop->value);
        return;
      }
      auto& sw = std::get<Switch>(*result);
      if (!sw.next) {
        absorb_stats();
        promise.set_exception(std::make_exception_ptr(
            ContractViolation("actor: Switch carried no matcher")));
        return;
      }
      std::vector<Message> stored = matcher_->stored_messages();
      absorb_stats();
      matcher_->reset();
      mailbox_->prepend_all(std::move(stored));
      matcher_ = std::move(sw.next);
      stats_baseline_ = matcher_->stats();
    }
  }

  // Accumulates the current matcher's counters since it was installed;
  // matchers may be reused across switches, so deltas are tracked.
  void absorb_stats() {
    const MatcherStats s = matcher_->stats();
    accounting_.taken += s.messages_taken - stats_baseline_.messages_taken;
    accounting_.consumed += s.messages_consumed - stats_baseline_.messages_consumed;
    accounting_.filtered += s.messages_filtered - stats_baseline_.messages_filtered;
    stats_baseline_ = s;
  }

  std::shared_ptr<Matcher> matcher_;
  std::shared_ptr<Mailbox> mailbox_;
  std::thread lane_;
  std::atomic<bool> started_{false};
  ActorAccounting accounting_;
  MatcherStats stats_baseline_;
};

}  // namespace joins
