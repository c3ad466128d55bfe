// Payment microservices demonstration: four service actors coordinating
// token-generation and payment flows through correlation-ID join patterns.

#pragma once

#include "joins/actor.hpp"

#include <array>
#include <iosfwd>

namespace joins::bench::payment {

namespace events {
inline constexpr TypeTag kExternalTokenRequest = 101;    // ()
inline constexpr TypeTag kTokenGenerationRequested = 102;  // (cid)
inline constexpr TypeTag kCustomerValidated = 103;       // (cid)
inline constexpr TypeTag kTokenGenerated = 104;          // (cid)
inline constexpr TypeTag kExternalPaymentRequest = 105;  // ()
inline constexpr TypeTag kPaymentRequested = 106;        // (cid)
inline constexpr TypeTag kMerchantValidated = 107;       // (cid)
inline constexpr TypeTag kTokenConsumed = 108;           // (cid)
inline constexpr TypeTag kPaymentSucceeded = 109;        // (cid)
inline constexpr TypeTag kServiceStop = 110;             // ()
}  // namespace events

class FlowTimeout : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The four running services plus a driver-owned sink mailbox that receives
/// the terminal event of every flow.
class PaymentSystem {
public:
  explicit PaymentSystem(AlgorithmId algo, std::ostream* transcript = nullptr);
  ~PaymentSystem();

  ActorRef core() const { return core_->ref(); }
  ActorRef account() const { return account_->ref(); }
  ActorRef token() const { return token_->ref(); }
  ActorRef payment() const { return payment_->ref(); }
  Mailbox& sink() { return *sink_; }

  /// Awaits `n` terminal events of type `tag` from the sink, returning their
  /// correlation IDs in arrival order. Throws FlowTimeout on expiry.
  std::vector<std::int64_t> await_terminal(TypeTag tag, std::size_t n,
                                           std::chrono::milliseconds timeout);

  /// Stops all four services and joins their lanes.
  void shutdown();

private:
  std::shared_ptr<Mailbox> sink_;
  std::unique_ptr<Actor> core_, account_, token_, payment_;
  std::array<std::future<Value>, 4> done_;
  bool stopped_ = false;
};

/// Sends `requests` external token requests; returns the correlation IDs of
/// the TokenGenerated events, one per request.
std::vector<std::int64_t> run_token_flow(int requests,
                                         AlgorithmId algo = AlgorithmId::WhileLazy,
                                         std::ostream* transcript = nullptr);

/// Sends `requests` external payment requests; returns the correlation IDs
/// of the PaymentSucceeded events, one per request.
std::vector<std::int64_t> run_payment_flow(int requests,
                                           AlgorithmId algo = AlgorithmId::WhileLazy,
                                           std::ostream* transcript = nullptr);

}  // namespace joins::bench::payment
