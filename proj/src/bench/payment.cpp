#include "joins/bench/payment.hpp"

#include "joins/rule_builder.hpp"

#include <iostream>
#include <mutex>

namespace joins::bench::payment {

namespace {

using events::kCustomerValidated;
using events::kExternalPaymentRequest;
using events::kExternalTokenRequest;
using events::kMerchantValidated;
using events::kPaymentRequested;
using events::kPaymentSucceeded;
using events::kServiceStop;
using events::kTokenConsumed;
using events::kTokenGenerated;
using events::kTokenGenerationRequested;

/// Late-bound actor reference; filled once all services are started.
using RefCell = std::shared_ptr<ActorRef>;

struct Transcript {
  std::ostream* out = nullptr;
  std::mutex mu;

  void log(const char* service, const std::string& line) {
    if (!out) return;
    std::lock_guard<std::mutex> lock(mu);
    (*out) << "[" << service << "] " << line << "\n";
  }
};

ReactionRule stop_rule() {
  return std::move(RuleBuilder{}.pattern(kServiceStop, 0))
      .body([](const BoundArgs&, ActorContext&) -> Result { return Stop{Value(0)}; });
}

ReactionRule forward_rule(TypeTag on, RefCell to, TypeTag emit,
                          std::shared_ptr<Transcript> tr, const char* service,
                          const char* what) {
  return std::move(RuleBuilder{}.pattern(on, 1))
      .body([=](const BoundArgs& args, ActorContext&) -> Result {
        const std::int64_t cid = args.arg_int(0, 0);
        tr->log(service, std::string(what) + " cid=" + std::to_string(cid));
        (*to).tell(make_message(emit, {cid}));
        return Continue{};
      });
}

}  // namespace

PaymentSystem::PaymentSystem(AlgorithmId algo, std::ostream* transcript)
    : sink_(std::make_shared<Mailbox>()) {
  auto tr = std::make_shared<Transcript>();
  tr->out = transcript;

  auto core_ref = std::make_shared<ActorRef>();
  auto account_ref = std::make_shared<ActorRef>();
  auto token_ref = std::make_shared<ActorRef>();
  auto payment_ref = std::make_shared<ActorRef>();
  auto sink = sink_;

  // Core service: assigns correlation IDs to external requests, fans the
  // internal events out, and forwards terminal events to the driver sink.
  JoinDefinition core_defn;
  {
    auto next_cid = std::make_shared<std::int64_t>(0);
    core_defn.rules.push_back(
        std::move(RuleBuilder{}.pattern(kExternalTokenRequest, 0))
            .body([=](const BoundArgs&, ActorContext&) -> Result {
              const std::int64_t cid = ++*next_cid;
              tr->log("core", "token request; correlation id " + std::to_string(cid));
              (*account_ref).tell(make_message(kTokenGenerationRequested, {cid}));
              (*token_ref).tell(make_message(kTokenGenerationRequested, {cid}));
              return Continue{};
            }));
    core_defn.rules.push_back(
        std::move(RuleBuilder{}.pattern(kExternalPaymentRequest, 0))
            .body([=](const BoundArgs&, ActorContext&) -> Result {
              const std::int64_t cid = ++*next_cid;
              tr->log("core", "payment request; correlation id " + std::to_string(cid));
              (*account_ref).tell(make_message(kPaymentRequested, {cid}));
              (*token_ref).tell(make_message(kPaymentRequested, {cid}));
              (*payment_ref).tell(make_message(kPaymentRequested, {cid}));
              return Continue{};
            }));
    core_defn.rules.push_back(
        std::move(RuleBuilder{}.pattern(kTokenGenerated, 1))
            .body([=](const BoundArgs& args, ActorContext&) -> Result {
              tr->log("core", "token generated cid=" +
                                  std::to_string(args.arg_int(0, 0)));
              sink->put(make_message(kTokenGenerated, {args.arg(0, 0)}));
              return Continue{};
            }));
    core_defn.rules.push_back(
        std::move(RuleBuilder{}.pattern(kPaymentSucceeded, 1))
            .body([=](const BoundArgs& args, ActorContext&) -> Result {
              tr->log("core", "payment succeeded cid=" +
                                  std::to_string(args.arg_int(0, 0)));
              sink->put(make_message(kPaymentSucceeded, {args.arg(0, 0)}));
              return Continue{};
            }));
    core_defn.rules.push_back(stop_rule());
  }

  // Account service: validates customers and merchants (always successfully).
  JoinDefinition account_defn;
  account_defn.rules.push_back(forward_rule(kTokenGenerationRequested, token_ref,
                                            kCustomerValidated, tr, "account",
                                            "customer validated"));
  account_defn.rules.push_back(forward_rule(kPaymentRequested, payment_ref,
                                            kMerchantValidated, tr, "account",
                                            "merchant validated"));
  account_defn.rules.push_back(forward_rule(kTokenConsumed, payment_ref,
                                            kCustomerValidated, tr, "account",
                                            "customer validated (token)"));
  account_defn.rules.push_back(stop_rule());

  // Token service: the two-way correlation join, plus token consumption.
  JoinDefinition token_defn;
  token_defn.rules.push_back(
      std::move(RuleBuilder{}
                    .pattern(kTokenGenerationRequested, 1)
                    .pattern(kCustomerValidated, 1)
                    .equal_ints(0, 0, 1, 0, "cid-eq"))
          .body([=](const BoundArgs& args, ActorContext&) -> Result {
            const std::int64_t cid = args.arg_int(0, 0);
            tr->log("token", "generating token cid=" + std::to_string(cid));
            (*core_ref).tell(make_message(kTokenGenerated, {cid}));
            return Continue{};
          }));
  token_defn.rules.push_back(forward_rule(kPaymentRequested, account_ref,
                                          kTokenConsumed, tr, "token",
                                          "token consumed"));
  token_defn.rules.push_back(stop_rule());

  // Payment service: the three-way correlation join.
  JoinDefinition payment_defn;
  payment_defn.rules.push_back(
      std::move(RuleBuilder{}
                    .pattern(kPaymentRequested, 1)
                    .pattern(kMerchantValidated, 1)
                    .pattern(kCustomerValidated, 1)
                    .equal_ints(0, 0, 1, 0, "cid-eq-12")
                    .equal_ints(1, 0, 2, 0, "cid-eq-23"))
          .body([=](const BoundArgs& args, ActorContext&) -> Result {
            const std::int64_t cid = args.arg_int(0, 0);
            tr->log("payment", "payment effectuated cid=" + std::to_string(cid));
            (*core_ref).tell(make_message(kPaymentSucceeded, {cid}));
            return Continue{};
          }));
  payment_defn.rules.push_back(stop_rule());

  core_ = std::make_unique<Actor>(make_matcher(algo, std::move(core_defn)));
  account_ = std::make_unique<Actor>(make_matcher(algo, std::move(account_defn)));
  token_ = std::make_unique<Actor>(make_matcher(algo, std::move(token_defn)));
  payment_ = std::make_unique<Actor>(make_matcher(algo, std::move(payment_defn)));

  auto [core_done, core_r] = core_->start();
  auto [account_done, account_r] = account_->start();
  auto [token_done, token_r] = token_->start();
  auto [payment_done, payment_r] = payment_->start();
  done_ = {std::move(core_done), std::move(account_done), std::move(token_done),
           std::move(payment_done)};
  *core_ref = core_r;
  *account_ref = account_r;
  *token_ref = token_r;
  *payment_ref = payment_r;
}

PaymentSystem::~PaymentSystem() {
  try {
    shutdown();
  } catch (...) {
  }
}

std::vector<std::int64_t> PaymentSystem::await_terminal(
    TypeTag tag, std::size_t n, std::chrono::milliseconds timeout) {
  std::vector<std::int64_t> cids;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (cids.size() < n) {
    const auto left = deadline - std::chrono::steady_clock::now();
    if (left <= std::chrono::milliseconds::zero())
      throw FlowTimeout("payment flow timed out awaiting terminal events");
    auto msg = sink_->take_for(left);
    if (!msg) throw FlowTimeout("payment flow timed out awaiting terminal events");
    if (msg->type == tag) cids.push_back(msg->fields.at(0).as_int());
  }
  return cids;
}

void PaymentSystem::shutdown() {
  if (stopped_) return;
  stopped_ = true;
  for (Actor* a : {core_.get(), account_.get(), token_.get(), payment_.get()})
    a->ref().tell(make_message(kServiceStop));
  for (auto& f : done_) f.get();
}

std::vector<std::int64_t> run_token_flow(int requests, AlgorithmId algo,
                                         std::ostream* transcript) {
  PaymentSystem system(algo, transcript);
  for (int i = 0; i < requests; ++i)
    system.core().tell(make_message(events::kExternalTokenRequest));
  auto cids = system.await_terminal(
      kTokenGenerated, static_cast<std::size_t>(requests),
      std::chrono::milliseconds(2000 + 50 * requests));
  system.shutdown();
  return cids;
}

std::vector<std::int64_t> run_payment_flow(int requests, AlgorithmId algo,
                                           std::ostream* transcript) {
  PaymentSystem system(algo, transcript);
  for (int i = 0; i < requests; ++i)
    system.core().tell(make_message(events::kExternalPaymentRequest));
  auto cids = system.await_terminal(
      kPaymentSucceeded, static_cast<std::size_t>(requests),
      std::chrono::milliseconds(2000 + 50 * requests));
  system.shutdown();
  return cids;
}

}  // namespace joins::bench::payment
