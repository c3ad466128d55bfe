// Benchmark archetypes over the matcher library: prepare/run pairs with
// workload generation confined to prepare, so the timed region is the
// matching work alone.

#pragma once

#include "joins/actor.hpp"
#include "joins/matcher.hpp"

#include <random>

namespace joins::bench {

/// Bad parameters or names at the harness boundary; the CLI reports these
/// and exits with the usage status.
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Post-run diagnostics used by conservation and work-count checks.
struct RunReport {
  std::uint64_t sent = 0;
  std::uint64_t taken = 0;
  std::uint64_t consumed = 0;
  std::uint64_t filtered = 0;
  std::uint64_t stored = 0;
  std::uint64_t undelivered = 0;
  std::uint64_t matches_fired = 0;
  std::uint64_t guard_evaluations = 0;
  std::uint64_t filter_evaluations = 0;
  std::uint64_t nodes_inserted = 0;
  std::int64_t extra = 0;  // benchmark-specific (bounded buffer: Full high-water)
};

/// One ready repetition; run() is the timed region.
class PreparedRun {
public:
  virtual ~PreparedRun() = default;
  virtual void run() = 0;
  virtual const RunReport& report() const = 0;
};

class Benchmark {
public:
  virtual ~Benchmark() = default;
  virtual std::unique_ptr<PreparedRun> prepare(std::int64_t main_param) = 0;
};

/// Benchmark-specific configuration; every field has a default so any
/// benchmark runs with zero extra flags.
struct BenchConfig {
  std::int64_t matches = 10;
  bool noise = false;
  std::string variant = "normal";  // size-with-guards: normal|noisy|non-satisfying
  bool heavy_guard = false;
  std::int64_t heavy_guard_micros = 100;
  std::int64_t buffer_bound = 10;
  std::int64_t count = 50;
  std::uint64_t seed = 42;
  unsigned workers = 0;  // matcher worker override; 0 = default
};

struct BenchmarkFactory {
  std::string name;
  std::string main_param_name;
  std::int64_t default_min_param = 0;
  std::int64_t default_max_param = 5;
  std::function<std::unique_ptr<Benchmark>(AlgorithmId, const BenchConfig&)> make;
};

std::span<const BenchmarkFactory> benchmark_registry();
const BenchmarkFactory* find_benchmark(std::string_view name);
std::vector<std::string> benchmark_names();

// ---------------------------------------------------------------------------
// Message vocabulary (exposed for tests)

namespace tags {
inline constexpr TypeTag kMotion = 1;
inline constexpr TypeTag kAmbient = 2;
inline constexpr TypeTag kLight = 3;
inline constexpr TypeTag kContact = 4;
inline constexpr TypeTag kConsumption = 5;
inline constexpr TypeTag kHeating = 6;
inline constexpr TypeTag kShutdown = 7;
inline constexpr TypeTag kSizeBase = 11;   // size benchmarks: kSizeBase + 0..5
inline constexpr TypeTag kNoiseBase = 900;  // fresh types never in any rule
inline constexpr TypeTag kPut = 21;
inline constexpr TypeTag kGet = 22;
inline constexpr TypeTag kFree = 23;
inline constexpr TypeTag kFull = 24;
inline constexpr TypeTag kBufferStop = 25;
inline constexpr TypeTag kAck = 26;
inline constexpr TypeTag kItem = 27;
}  // namespace tags

/// Pre-generated workload for the single-actor benchmarks.
struct FeedPlan {
  JoinDefinition defn;
  std::vector<Message> messages;
};

FeedPlan size_plan(std::int64_t pattern_size, std::int64_t matches, bool noise,
                   std::uint64_t seed);
FeedPlan size_with_guards_plan(std::int64_t pattern_size, std::int64_t matches,
                               std::string_view variant, std::uint64_t seed);
FeedPlan simple_smart_house_plan(std::int64_t prefixes, std::int64_t matches,
                                 bool heavy_guard, std::int64_t heavy_guard_micros);
FeedPlan complex_smart_house_plan(std::int64_t noise_per_cycle, std::int64_t matches,
                                  std::uint64_t seed);

/// One random sensor reading whose payloads mostly fail the smart-house
/// filtering clauses; rooms and timestamps are drawn from ranges disjoint
/// from the matching triples'.
Message complex_noise_message(std::mt19937_64& rng);

/// Feeds a pre-generated message stream to one actor and awaits its Stop.
class MessageFeedRun final : public PreparedRun {
public:
  MessageFeedRun(AlgorithmId algo, FeedPlan plan, unsigned workers);
  void run() override;
  const RunReport& report() const override { return report_; }

private:
  std::shared_ptr<Matcher> matcher_;
  std::unique_ptr<Actor> actor_;
  std::future<Value> done_;
  ActorRef ref_;
  std::vector<Message> messages_;
  RunReport report_;
};

/// Bounded buffer: one buffer actor, `lanes` producer and `lanes` consumer
/// threads moving `count` items each through a buffer of capacity `bound`.
class BoundedBufferRun final : public PreparedRun {
public:
  BoundedBufferRun(AlgorithmId algo, std::int64_t lanes, std::int64_t bound,
                   std::int64_t count, unsigned workers);
  void run() override;
  const RunReport& report() const override { return report_; }

  /// Items received across all consumers, in no particular order.
  const std::vector<std::int64_t>& delivered() const { return delivered_; }
  std::int64_t full_high_water() const;

private:
  struct FullGauge;
  std::shared_ptr<Matcher> matcher_;
  std::unique_ptr<Actor> actor_;
  std::future<Value> done_;
  ActorRef buffer_;
  std::shared_ptr<FullGauge> gauge_;
  std::int64_t lanes_;
  std::int64_t bound_;
  std::int64_t count_;
  std::vector<std::int64_t> delivered_;
  RunReport report_;
};

}  // namespace joins::bench
