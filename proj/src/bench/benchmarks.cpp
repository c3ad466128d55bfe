#include "joins/bench/benchmark.hpp"

#include "joins/rule_builder.hpp"

#include <chrono>
#include <mutex>

namespace joins::bench {

namespace {

// Field layouts:
//   Motion / Light:  [id, on, room, ts]
//   AmbientLight:    [id, lux, room, ts]
//   Contact:         [id, open, room, ts]
//   Consumption:     [id, watts, ts]
//   HeatingF:        [id, kind, ts]
constexpr int kArityMotion = 4, kArityAmbient = 4, kArityLight = 4;
constexpr int kArityContact = 4, kArityConsumption = 3, kArityHeating = 3;

void busy_wait_micros(std::int64_t micros) {
  const auto until =
      std::chrono::steady_clock::now() + std::chrono::microseconds(micros);
  while (std::chrono::steady_clock::now() < until) {
  }
}

/// Stop the actor once `target` matches have fired, otherwise Continue.
BodyFn counting_body(std::int64_t target) {
  auto fired = std::make_shared<std::int64_t>(0);
  return [fired, target](const BoundArgs&, ActorContext&) -> Result {
    if (++*fired >= target) return Stop{Value(*fired)};
    return Continue{};
  };
}

GuardClause ts_window_clause(std::vector<int> positions, std::vector<int> ts_fields,
                             std::int64_t window) {
  return GuardClause{
      positions,
      [positions, ts_fields, window](const BoundArgs& args) {
        std::int64_t lo = std::numeric_limits<std::int64_t>::max();
        std::int64_t hi = std::numeric_limits<std::int64_t>::min();
        for (std::size_t i = 0; i < positions.size(); ++i) {
          const std::int64_t ts = args.arg_int(positions[i], ts_fields[i]);
          lo = std::min(lo, ts);
          hi = std::max(hi, ts);
        }
        return hi - lo <= window;
      },
      "ts-window"};
}

/// Motion & AmbientLight & Light rule used by both smart-house benchmarks:
/// motion on, lux <= 40, light off, equal rooms, timestamps within a
/// 60-unit window.
ReactionRule e1_rule(BodyFn body, bool heavy_guard, std::int64_t heavy_micros) {
  RuleBuilder b;
  b.pattern(tags::kMotion, kArityMotion)
      .pattern(tags::kAmbient, kArityAmbient)
      .pattern(tags::kLight, kArityLight);
  if (heavy_guard)
    b.clause({0, 1, 2},
             [heavy_micros](const BoundArgs&) {
               busy_wait_micros(heavy_micros);
               return true;
             },
             "heavy-delay");
  b.where_int(0, 1, [](std::int64_t on) { return on == 1; }, "motion-on")
      .where_int(1, 1, [](std::int64_t lux) { return lux <= 40; }, "lux<=40")
      .where_int(2, 1, [](std::int64_t on) { return on == 0; }, "light-off")
      .equal_ints(0, 2, 1, 2, "room-m-a")
      .equal_ints(1, 2, 2, 2, "room-a-l")
      .clause(ts_window_clause({0, 1, 2}, {3, 3, 3}, 60));
  return std::move(b).body(std::move(body));
}

ReactionRule e2_rule(BodyFn body) {
  return std::move(
             RuleBuilder{}
                 .pattern(tags::kContact, kArityContact)
                 .pattern(tags::kConsumption, kArityConsumption)
                 .pattern(tags::kHeating, kArityHeating)
                 .where_int(0, 1, [](std::int64_t open) { return open == 1; },
                            "contact-open")
                 .where_int(1, 1, [](std::int64_t w) { return w >= 200; }, "watts>=200")
                 .where_int(2, 1, [](std::int64_t k) { return k == 1; }, "heating-on")
                 .clause(ts_window_clause({0, 1, 2}, {3, 2, 2}, 60)))
      .body(std::move(body));
}

ReactionRule e3_rule(BodyFn body) {
  return std::move(
             RuleBuilder{}
                 .pattern(tags::kMotion, kArityMotion)
                 .pattern(tags::kLight, kArityLight)
                 .pattern(tags::kConsumption, kArityConsumption)
                 .where_int(0, 1, [](std::int64_t on) { return on == 1; }, "motion-on")
                 .where_int(1, 1, [](std::int64_t on) { return on == 0; }, "light-off")
                 .where_int(2, 1, [](std::int64_t w) { return w >= 200; }, "watts>=200")
                 .equal_ints(0, 2, 1, 2, "room-m-l")
                 .clause(ts_window_clause({0, 1, 2}, {3, 3, 2}, 60)))
      .body(std::move(body));
}

Message motion(std::int64_t id, std::int64_t on, std::int64_t room, std::int64_t ts) {
  return make_message(tags::kMotion, {id, on, room, ts});
}
Message ambient(std::int64_t id, std::int64_t lux, std::int64_t room, std::int64_t ts) {
  return make_message(tags::kAmbient, {id, lux, room, ts});
}
Message light(std::int64_t id, std::int64_t on, std::int64_t room, std::int64_t ts) {
  return make_message(tags::kLight, {id, on, room, ts});
}

}  // namespace

// ---------------------------------------------------------------------------
// Size

FeedPlan size_plan(std::int64_t pattern_size, std::int64_t matches, bool noise,
                   std::uint64_t seed) {
  if (pattern_size < 1 || pattern_size > 6)
    throw UsageError("size: pattern size must be between 1 and 6");
  if (matches < 1) throw UsageError("size: matches must be at least 1");

  FeedPlan plan;
  RuleBuilder b;
  for (std::int64_t t = 0; t < pattern_size; ++t)
    b.pattern(tags::kSizeBase + static_cast<TypeTag>(t), 0);
  plan.defn.rules.push_back(std::move(b).body(counting_body(matches)));

  std::mt19937_64 rng(seed);
  for (std::int64_t c = 0; c < matches; ++c) {
    std::vector<Message> cycle;
    for (std::int64_t t = 0; t < pattern_size; ++t)
      cycle.push_back(make_message(tags::kSizeBase + static_cast<TypeTag>(t)));
    if (noise) {
      // One fresh-type message per pattern message, at a random offset.
      for (std::int64_t t = 0; t < pattern_size; ++t) {
        const TypeTag fresh = tags::kNoiseBase + static_cast<TypeTag>(rng() % 8);
        const std::size_t at = rng() % (cycle.size() + 1);
        cycle.insert(cycle.begin() + static_cast<std::ptrdiff_t>(at),
                     make_message(fresh, {static_cast<std::int64_t>(rng() % 100)}));
      }
    }
    for (Message& m : cycle) plan.messages.push_back(std::move(m));
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Size with guards

FeedPlan size_with_guards_plan(std::int64_t pattern_size, std::int64_t matches,
                               std::string_view variant, std::uint64_t seed) {
  if (pattern_size < 1 || pattern_size > 6)
    throw UsageError("size-with-guards: pattern size must be between 1 and 6");
  if (matches < 1) throw UsageError("size-with-guards: matches must be at least 1");
  const bool noisy = variant == "noisy";
  const bool non_satisfying = variant == "non-satisfying";
  if (!noisy && !non_satisfying && variant != "normal")
    throw UsageError("size-with-guards: variant must be normal, noisy, or "
                     "non-satisfying");

  FeedPlan plan;
  RuleBuilder b;
  for (std::int64_t t = 0; t < pattern_size; ++t)
    b.pattern(tags::kSizeBase + static_cast<TypeTag>(t), 1);
  // Chained pairwise payload equality; a single-pattern rule instead keeps a
  // nonnegativity clause so the non-satisfying variant stays meaningful.
  if (pattern_size == 1) {
    b.where_int(0, 0, [](std::int64_t x) { return x >= 0; }, "x>=0");
  } else {
    for (std::int64_t t = 0; t + 1 < pattern_size; ++t)
      b.equal_ints(static_cast<int>(t), 0, static_cast<int>(t + 1), 0, "eq-chain");
  }
  plan.defn.rules.push_back(std::move(b).body(counting_body(matches)));

  std::mt19937_64 rng(seed);
  std::int64_t sentinel = -1;  // unique payloads that never equal any other
  for (std::int64_t c = 0; c < matches; ++c) {
    std::vector<Message> cycle;
    for (std::int64_t t = 0; t < pattern_size; ++t)
      cycle.push_back(make_message(tags::kSizeBase + static_cast<TypeTag>(t), {c}));
    if (noisy) {
      for (std::int64_t t = 0; t < pattern_size; ++t) {
        const TypeTag fresh = tags::kNoiseBase + static_cast<TypeTag>(rng() % 8);
        const std::size_t at = rng() % (cycle.size() + 1);
        cycle.insert(cycle.begin() + static_cast<std::ptrdiff_t>(at),
                     make_message(fresh, {static_cast<std::int64_t>(rng() % 100)}));
      }
    }
    if (non_satisfying) {
      for (std::int64_t t = 0; t < pattern_size; ++t) {
        const TypeTag tag = tags::kSizeBase + static_cast<TypeTag>(rng() % pattern_size);
        const std::size_t at = rng() % (cycle.size() + 1);
        cycle.insert(cycle.begin() + static_cast<std::ptrdiff_t>(at),
                     make_message(tag, {sentinel--}));
      }
    }
    for (Message& m : cycle) plan.messages.push_back(std::move(m));
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Simple Smart House

FeedPlan simple_smart_house_plan(std::int64_t prefixes, std::int64_t matches,
                                 bool heavy_guard, std::int64_t heavy_guard_micros) {
  if (prefixes < 0) throw UsageError("simple-smart-house: prefixes must be >= 0");
  if (matches < 1) throw UsageError("simple-smart-house: matches must be >= 1");

  FeedPlan plan;
  plan.defn.rules.push_back(
      e1_rule(counting_body(matches), heavy_guard, heavy_guard_micros));

  // Per cycle: (prefixes + 1) Motion/AmbientLight pairs, then one Light that
  // completes with any pair; fairness consumes the oldest. Timestamps are
  // constant so every pair stays in the window.
  std::int64_t id = 0;
  constexpr std::int64_t kRoom = 7, kTs = 0;
  for (std::int64_t c = 0; c < matches; ++c) {
    for (std::int64_t k = 0; k <= prefixes; ++k) {
      plan.messages.push_back(motion(id++, 1, kRoom, kTs));
      plan.messages.push_back(ambient(id++, 30, kRoom, kTs));
    }
    plan.messages.push_back(light(id++, 0, kRoom, kTs));
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Complex Smart House

Message complex_noise_message(std::mt19937_64& rng) {
  const TypeTag tag = static_cast<TypeTag>(1 + rng() % 6);
  const std::int64_t id = static_cast<std::int64_t>(rng() % 1000000);
  const std::int64_t room = 1000 + static_cast<std::int64_t>(rng() % 1000000);
  // Negative range, far from any matching triple's window.
  const std::int64_t ts = -2000000000 + static_cast<std::int64_t>(rng() % 1000000000);
  switch (tag) {
    case tags::kMotion:
      return motion(id, rng() % 5 == 0 ? 1 : 0, room, ts);
    case tags::kAmbient:
      return ambient(id, static_cast<std::int64_t>(rng() % 200), room, ts);
    case tags::kLight:
      return light(id, rng() % 5 == 0 ? 0 : 1, room, ts);
    case tags::kContact:
      return make_message(tags::kContact, {id, rng() % 5 == 0 ? 1 : 0, room, ts});
    case tags::kConsumption:
      return make_message(tags::kConsumption,
                          {id, static_cast<std::int64_t>(rng() % 250), ts});
    default:
      return make_message(tags::kHeating,
                          {id, static_cast<std::int64_t>(rng() % 6), ts});
  }
}

FeedPlan complex_smart_house_plan(std::int64_t noise_per_cycle, std::int64_t matches,
                                  std::uint64_t seed) {
  if (noise_per_cycle < 0) throw UsageError("complex-smart-house: noise must be >= 0");
  if (matches < 1) throw UsageError("complex-smart-house: matches must be >= 1");

  FeedPlan plan;
  auto continue_body = [](const BoundArgs&, ActorContext&) -> Result {
    return Continue{};
  };
  plan.defn.rules.push_back(e1_rule(continue_body, false, 0));
  plan.defn.rules.push_back(e2_rule(continue_body));
  plan.defn.rules.push_back(e3_rule(continue_body));
  plan.defn.rules.push_back(
      std::move(RuleBuilder{}.pattern(tags::kShutdown, 0)).body(
          [](const BoundArgs&, ActorContext&) -> Result { return Stop{Value(0)}; }));

  std::mt19937_64 rng(seed);
  std::int64_t id = 0;
  for (std::int64_t c = 0; c < matches; ++c) {
    const std::int64_t ts = 1000 * c;
    std::vector<Message> cycle;
    cycle.push_back(motion(id++, 1, 1, ts));
    cycle.push_back(ambient(id++, 30, 1, ts + 1));
    cycle.push_back(light(id++, 0, 1, ts + 2));
    cycle.push_back(make_message(tags::kContact, {id++, 1, 2, ts + 3}));
    cycle.push_back(make_message(tags::kConsumption, {id++, 300, ts + 4}));
    cycle.push_back(make_message(tags::kHeating, {id++, 1, ts + 5}));
    cycle.push_back(motion(id++, 1, 3, ts + 6));
    cycle.push_back(light(id++, 0, 3, ts + 7));
    cycle.push_back(make_message(tags::kConsumption, {id++, 250, ts + 8}));
    for (std::int64_t k = 0; k < noise_per_cycle; ++k) {
      const std::size_t at = rng() % (cycle.size() + 1);
      cycle.insert(cycle.begin() + static_cast<std::ptrdiff_t>(at),
                   complex_noise_message(rng));
    }
    for (Message& m : cycle) plan.messages.push_back(std::move(m));
  }
  plan.messages.push_back(make_message(tags::kShutdown));
  return plan;
}

// ---------------------------------------------------------------------------
// Feed runner

MessageFeedRun::MessageFeedRun(AlgorithmId algo, FeedPlan plan, unsigned workers) {
  matcher_ = make_matcher(algo, std::move(plan.defn), MatcherOptions{workers});
  actor_ = std::make_unique<Actor>(matcher_);
  auto [done, ref] = actor_->start();
  done_ = std::move(done);
  ref_ = ref;
  messages_ = std::move(plan.messages);
}

void MessageFeedRun::run() {
  for (const Message& m : messages_) ref_.tell(m);
  done_.get();

  const MatcherStats stats = matcher_->stats();
  const ActorAccounting& acc = actor_->accounting();
  report_.sent = actor_->mailbox().total_put();
  report_.taken = acc.taken;
  report_.consumed = acc.consumed;
  report_.filtered = acc.filtered;
  report_.stored = acc.stored_at_exit.size();
  report_.undelivered = actor_->mailbox().drain_remaining().size();
  report_.matches_fired = stats.matches_fired;
  report_.guard_evaluations = stats.guard_evaluations;
  report_.filter_evaluations = stats.filter_evaluations;
  report_.nodes_inserted = stats.nodes_inserted;
}

// ---------------------------------------------------------------------------
// Bounded buffer

struct BoundedBufferRun::FullGauge {
  std::atomic<std::int64_t> current{0};
  std::atomic<std::int64_t> peak{0};

  void up() {
    const std::int64_t v = current.fetch_add(1) + 1;
    std::int64_t prev = peak.load();
    while (prev < v && !peak.compare_exchange_weak(prev, v)) {
    }
  }
  void down() { current.fetch_sub(1); }
};

BoundedBufferRun::BoundedBufferRun(AlgorithmId algo, std::int64_t lanes,
                                   std::int64_t bound, std::int64_t count,
                                   unsigned workers)
    : gauge_(std::make_shared<FullGauge>()), lanes_(lanes), bound_(bound),
      count_(count) {
  if (lanes_ < 0) throw UsageError("bounded-buffer: lanes must be >= 0");
  if (bound_ < 1) throw UsageError("bounded-buffer: bound must be >= 1");
  if (count_ < 1) throw UsageError("bounded-buffer: count must be >= 1");

  JoinDefinition defn;
  auto gauge = gauge_;
  defn.rules.push_back(
      std::move(RuleBuilder{}.pattern(tags::kPut, 2).pattern(tags::kFree, 0))
          .body([gauge](const BoundArgs& args, ActorContext& ctx) -> Result {
            auto producer = args.arg(0, 0).as_ref<Mailbox>();
            gauge->up();
            ctx.self().tell(make_message(tags::kFull, {args.arg(0, 1)}));
            producer->put(make_message(tags::kAck));
            return Continue{};
          }));
  defn.rules.push_back(
      std::move(RuleBuilder{}.pattern(tags::kGet, 1).pattern(tags::kFull, 1))
          .body([gauge](const BoundArgs& args, ActorContext& ctx) -> Result {
            auto consumer = args.arg(0, 0).as_ref<Mailbox>();
            gauge->down();
            consumer->put(make_message(tags::kItem, {args.arg(1, 0)}));
            ctx.self().tell(make_message(tags::kFree));
            return Continue{};
          }));
  defn.rules.push_back(std::move(RuleBuilder{}.pattern(tags::kBufferStop, 0))
                           .body([](const BoundArgs&, ActorContext&) -> Result {
                             return Stop{Value(0)};
                           }));

  matcher_ = make_matcher(algo, std::move(defn), MatcherOptions{workers});
  actor_ = std::make_unique<Actor>(matcher_);
  auto [done, ref] = actor_->start();
  done_ = std::move(done);
  buffer_ = ref;
}

void BoundedBufferRun::run() {
  for (std::int64_t b = 0; b < bound_; ++b) buffer_.tell(make_message(tags::kFree));

  std::mutex delivered_mu;
  std::vector<std::future<void>> futures;
  futures.reserve(static_cast<std::size_t>(2 * lanes_));
  for (std::int64_t p = 0; p < lanes_; ++p) {
    futures.push_back(std::async(std::launch::async, [this, p] {
      auto ack = std::make_shared<Mailbox>();
      for (std::int64_t i = 0; i < count_; ++i) {
        buffer_.tell(make_message(tags::kPut,
                                  {Value::ref(ack), Value(p * 1000000 + i)}));
        ack->take();
      }
    }));
  }
  for (std::int64_t p = 0; p < lanes_; ++p) {
    futures.push_back(std::async(std::launch::async, [this, &delivered_mu] {
      auto inbox = std::make_shared<Mailbox>();
      std::vector<std::int64_t> got;
      got.reserve(static_cast<std::size_t>(count_));
      for (std::int64_t i = 0; i < count_; ++i) {
        buffer_.tell(make_message(tags::kGet, {Value::ref(inbox)}));
        auto item = inbox->take();
        got.push_back(item->fields.at(0).as_int());
      }
      std::lock_guard<std::mutex> lock(delivered_mu);
      delivered_.insert(delivered_.end(), got.begin(), got.end());
    }));
  }
  for (auto& f : futures) f.get();

  buffer_.tell(make_message(tags::kBufferStop));
  done_.get();

  const MatcherStats stats = matcher_->stats();
  const ActorAccounting& acc = actor_->accounting();
  report_.sent = actor_->mailbox().total_put();
  report_.taken = acc.taken;
  report_.consumed = acc.consumed;
  report_.filtered = acc.filtered;
  report_.stored = acc.stored_at_exit.size();
  report_.undelivered = actor_->mailbox().drain_remaining().size();
  report_.matches_fired = stats.matches_fired;
  report_.guard_evaluations = stats.guard_evaluations;
  report_.filter_evaluations = stats.filter_evaluations;
  report_.nodes_inserted = stats.nodes_inserted;
  report_.extra = full_high_water();
}

std::int64_t BoundedBufferRun::full_high_water() const { return gauge_->peak.load(); }

// ---------------------------------------------------------------------------
// Registry

namespace {

class FeedBenchmark final : public Benchmark {
public:
  FeedBenchmark(AlgorithmId algo, BenchConfig cfg,
                std::function<FeedPlan(std::int64_t, const BenchConfig&)> plan)
      : algo_(algo), cfg_(std::move(cfg)), plan_(std::move(plan)) {}

  std::unique_ptr<PreparedRun> prepare(std::int64_t main_param) override {
    return std::make_unique<MessageFeedRun>(algo_, plan_(main_param, cfg_),
                                            cfg_.workers);
  }

private:
  AlgorithmId algo_;
  BenchConfig cfg_;
  std::function<FeedPlan(std::int64_t, const BenchConfig&)> plan_;
};

class BoundedBufferBenchmark final : public Benchmark {
public:
  BoundedBufferBenchmark(AlgorithmId algo, BenchConfig cfg)
      : algo_(algo), cfg_(std::move(cfg)) {}

  std::unique_ptr<PreparedRun> prepare(std::int64_t main_param) override {
    return std::make_unique<BoundedBufferRun>(algo_, main_param, cfg_.buffer_bound,
                                              cfg_.count, cfg_.workers);
  }

private:
  AlgorithmId algo_;
  BenchConfig cfg_;
};

const std::vector<BenchmarkFactory>& registry() {
  static const std::vector<BenchmarkFactory> factories = [] {
    std::vector<BenchmarkFactory> v;
    v.push_back({"size", "pattern-size", 1, 6,
                 [](AlgorithmId a, const BenchConfig& c) -> std::unique_ptr<Benchmark> {
                   return std::make_unique<FeedBenchmark>(
                       a, c, [](std::int64_t n, const BenchConfig& cfg) {
                         return size_plan(n, cfg.matches, cfg.noise, cfg.seed);
                       });
                 }});
    v.push_back({"size-with-guards", "pattern-size", 1, 6,
                 [](AlgorithmId a, const BenchConfig& c) -> std::unique_ptr<Benchmark> {
                   return std::make_unique<FeedBenchmark>(
                       a, c, [](std::int64_t n, const BenchConfig& cfg) {
                         return size_with_guards_plan(n, cfg.matches, cfg.variant,
                                                      cfg.seed);
                       });
                 }});
    v.push_back({"simple-smart-house", "prefixes", 0, 10,
                 [](AlgorithmId a, const BenchConfig& c) -> std::unique_ptr<Benchmark> {
                   return std::make_unique<FeedBenchmark>(
                       a, c, [](std::int64_t n, const BenchConfig& cfg) {
                         return simple_smart_house_plan(n, cfg.matches,
                                                        cfg.heavy_guard,
                                                        cfg.heavy_guard_micros);
                       });
                 }});
    v.push_back({"complex-smart-house", "noise", 0, 10,
                 [](AlgorithmId a, const BenchConfig& c) -> std::unique_ptr<Benchmark> {
                   return std::make_unique<FeedBenchmark>(
                       a, c, [](std::int64_t n, const BenchConfig& cfg) {
                         return complex_smart_house_plan(n, cfg.matches, cfg.seed);
                       });
                 }});
    v.push_back({"bounded-buffer", "lanes", 1, 4,
                 [](AlgorithmId a, const BenchConfig& c) -> std::unique_ptr<Benchmark> {
                   return std::make_unique<BoundedBufferBenchmark>(a, c);
                 }});
    return v;
  }();
  return factories;
}

}  // namespace

std::span<const BenchmarkFactory> benchmark_registry() { return registry(); }

const BenchmarkFactory* find_benchmark(std::string_view name) {
  for (const BenchmarkFactory& f : registry())
    if (f.name == name) return &f;
  return nullptr;
}

std::vector<std::string> benchmark_names() {
  std::vector<std::string> names;
  for (const BenchmarkFactory& f : registry()) names.push_back(f.name);
  return names;
}

}  // namespace joins::bench
