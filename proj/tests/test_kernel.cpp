#include <catch2/catch_amalgamated.hpp>

#include "mgcheck/kernel.hpp"
#include "mgcheck/trace_io.hpp"
#include "toy_specs.hpp"

using namespace mgcheck;

TEST_CASE("enumerate_enabled") {
    SECTION("empty spec has nothing enabled") {
        auto spec = toys::empty_spec();
        CHECK(enumerate_enabled(spec, spec.init()).empty());
    }
    SECTION("guard arithmetic forces the instance set") {
        auto spec = toys::counter_spec();
        auto enabled = enumerate_enabled(spec, spec.init());
        REQUIRE(enabled.size() == 1);
        CHECK(enabled[0].name() == "inc");
    }
    SECTION("malformed state is rejected") {
        auto spec = toys::counter_spec();
        auto other = toys::mutex_spec(false);
        CHECK_THROWS_AS(enumerate_enabled(spec, other.init()), MalformedStateError);
    }
}

TEST_CASE("apply") {
    auto spec = toys::counter_spec();
    const ResolvedAction* inc = spec.find_action("inc");
    const ResolvedAction* dec = spec.find_action("dec");
    REQUIRE(inc);
    REQUIRE(dec);
    auto x_id = spec.table().require("x");

    SECTION("toy counter inc on x=1 gives x=2") {
        State s1 = spec.init().with({{x_id, Value::integer(1)}});
        State s2 = apply(ActionInstance{inc, {}}, s1);
        CHECK(s2.get("x").as_int() == 2);
    }
    SECTION("guard-not-enabled is a caller bug") {
        CHECK_THROWS_AS(apply(ActionInstance{dec, {}}, spec.init()), GuardNotEnabledError);
    }
    SECTION("action with empty write set leaves the state unchanged") {
        ModuleSpec m;
        m.name = "Noop";
        m.granularity = "baseline";
        m.declared_vars = {VarDecl("x", Value::integer(0))};
        m.actions.push_back(toys::action(
            "noop", "Noop", {}, {"x"}, {}, [](const GuardCtx&) { return true; },
            [](UpdateCtx&) {}));
        Library lib;
        lib.modules.push_back(m);
        CompositionPlan plan;
        plan.name = "noop";
        plan.selections = {{"Noop", "baseline"}};
        auto noop_spec = compose(plan, lib);
        const ResolvedAction* noop = noop_spec.find_action("noop");
        State s = apply(ActionInstance{noop, {}}, noop_spec.init());
        CHECK(s == noop_spec.init());
    }
}

TEST_CASE("metadata enforcement") {
    ModuleSpec m;
    m.name = "Bad";
    m.granularity = "baseline";
    m.declared_vars = {VarDecl("x", Value::integer(0)), VarDecl("y", Value::integer(0))};
    // Guard reads y but declares only x; update writes y but declares x only.
    m.actions.push_back(toys::action(
        "sneaky_read", "Bad", {}, {"x"}, {{"x", {{"x"}, "x := x"}}},
        [](const GuardCtx& c) { return c.var("y").as_int() == 0; },
        [](UpdateCtx& c) { c.set("x", c.var("x")); }));
    m.actions.push_back(toys::action(
        "sneaky_write", "Bad", {}, {"x"}, {{"x", {{"x"}, "x := x"}}},
        [](const GuardCtx&) { return true; },
        [](UpdateCtx& c) { c.set("y", Value::integer(1)); }));
    m.actions.push_back(toys::action(
        "sneaky_dep", "Bad", {}, {"x"}, {{"x", {{}, "x := 0"}}},
        [](const GuardCtx&) { return true; },
        [](UpdateCtx& c) { c.set("x", c.var("y")); }));
    Library lib;
    lib.modules.push_back(m);
    CompositionPlan plan;
    plan.name = "bad";
    plan.selections = {{"Bad", "baseline"}};
    auto spec = compose(plan, lib);

    State s = spec.init();
    auto instance = [&](const char* name) {
        return ActionInstance{spec.find_action(name), {}};
    };
    CHECK_THROWS_AS(guard_holds(*spec.find_action("sneaky_read"), s, Bindings{}),
                    MetadataViolationError);
    CHECK_THROWS_AS(apply(instance("sneaky_write"), s), MetadataViolationError);
    CHECK_THROWS_AS(apply(instance("sneaky_dep"), s), MetadataViolationError);
}

TEST_CASE("bfs_check on the toy counter") {
    auto spec = toys::counter_spec();
    auto inv = Invariant::on_state("x-bounded", "x stays at most 2", [](const State& s) {
        return s.get("x").as_int() <= 2;
    });
    auto result = bfs_check(spec, {inv}, {}, StopPolicy::to_completion());
    CHECK(result.outcome == Outcome::Complete);
    CHECK(result.distinct_states == 3);
    CHECK(result.violations.empty());
}

TEST_CASE("bfs finds the broken mutex at minimal depth") {
    auto spec = toys::mutex_spec(true);
    auto inv = toys::mutex_invariant();

    auto oracle = toys::oracle_explore(spec, {inv});
    REQUIRE(oracle.violation_depth.has_value());

    auto result = bfs_check(spec, {inv}, {}, StopPolicy::first_violation());
    REQUIRE(result.outcome == Outcome::ViolationFound);
    REQUIRE(result.violations.size() == 1);
    CHECK(result.violations[0].invariant_id == "mutual-exclusion");
    CHECK(result.violations[0].trace.depth() == *oracle.violation_depth);

    SECTION("violation trace replays and ends in a violating state") {
        const Trace& t = result.violations[0].trace;
        std::string why;
        CHECK(validate_trace(spec, t, &why));
        CHECK_FALSE(inv.holds(t.last()));
    }
    SECTION("the fixed variant is clean") {
        auto good = toys::mutex_spec(false);
        auto r = bfs_check(good, {toys::mutex_invariant()}, {}, StopPolicy::to_completion());
        CHECK(r.outcome == Outcome::Complete);
        CHECK(r.violations.empty());
    }
}

TEST_CASE("bfs completeness matches the worklist oracle") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        auto spec = toys::random_toy_spec(seed);
        auto oracle = toys::oracle_explore(spec, {});
        auto result = bfs_check(spec, {}, {}, StopPolicy::to_completion());
        INFO("seed " << seed);
        CHECK(result.outcome == Outcome::Complete);
        CHECK(result.distinct_states == oracle.depth_of.size());
    }
}

TEST_CASE("bfs minimality matches the oracle on randomized toys") {
    int checked = 0;
    for (std::uint64_t seed = 10; seed < 40 && checked < 10; ++seed) {
        auto spec = toys::random_toy_spec(seed, 3, 7, 0, 5);
        auto inv = Invariant::on_state("corner", "not all variables maxed", [](const State& s) {
            return !(s.get("v0").as_int() >= 4 && s.get("v1").as_int() >= 4);
        });
        auto oracle = toys::oracle_explore(spec, {inv});
        if (!oracle.violation_depth) continue;  // this toy never violates
        ++checked;
        auto result = bfs_check(spec, {inv}, {}, StopPolicy::first_violation());
        INFO("seed " << seed);
        REQUIRE(result.outcome == Outcome::ViolationFound);
        CHECK(result.violations[0].trace.depth() == *oracle.violation_depth);
        CHECK(validate_trace(spec, result.violations[0].trace));
    }
    CHECK(checked >= 3);
}

TEST_CASE("successor soundness: only written variables change") {
    auto spec = toys::random_toy_spec(7);
    auto r = bfs_check(spec, {}, {}, StopPolicy::to_completion());
    // Walk a few traces and compare changed variables against write sets.
    auto traces = random_walk(spec, 99, {20, 5});
    for (const auto& t : traces) {
        State prev = t.init;
        for (const auto& [inst, next] : t.steps) {
            for (std::size_t i = 0; i < spec.table().size(); ++i) {
                auto id = static_cast<VarTable::Id>(i);
                if (!(prev.get(id) == next.get(id))) CHECK(inst.action->may_write(id));
            }
            prev = next;
        }
    }
    CHECK(r.outcome == Outcome::Complete);
}

TEST_CASE("worker count never changes the result") {
    auto spec = toys::mutex_spec(true);
    auto inv = toys::mutex_invariant();
    ExplorationBounds one, eight;
    one.workers = 1;
    eight.workers = 8;
    auto a = bfs_check(spec, {inv}, one, StopPolicy::to_completion());
    auto b = bfs_check(spec, {inv}, eight, StopPolicy::to_completion());
    CHECK(a.distinct_states == b.distinct_states);
    CHECK(a.states_explored == b.states_explored);
    REQUIRE(a.violations.size() == b.violations.size());
    for (std::size_t i = 0; i < a.violations.size(); ++i) {
        CHECK(a.violations[i].invariant_id == b.violations[i].invariant_id);
        CHECK(trace_to_string(spec, a.violations[i].trace) ==
              trace_to_string(spec, b.violations[i].trace));
    }
}

TEST_CASE("budget exhaustion is reported") {
    auto spec = toys::mutex_spec(true);
    auto full = bfs_check(spec, {}, {}, StopPolicy::to_completion());
    REQUIRE(full.distinct_states > 3);
    ExplorationBounds bounds;
    bounds.max_states = 3;
    auto r = bfs_check(spec, {}, bounds, StopPolicy::to_completion());
    CHECK(r.outcome == Outcome::BudgetExhausted);
    CHECK(r.distinct_states < full.distinct_states);
}

TEST_CASE("random walks") {
    SECTION("no enabled action gives zero-step traces") {
        auto spec = toys::empty_spec();
        auto traces = random_walk(spec, 1, {5, 3});
        REQUIRE(traces.size() == 3);
        for (const auto& t : traces) CHECK(t.depth() == 0);
    }
    SECTION("same seed twice is bitwise identical") {
        auto spec = toys::mutex_spec(false);
        auto a = random_walk(spec, 42, {15, 4});
        auto b = random_walk(spec, 42, {15, 4});
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            CHECK(trace_to_string(spec, a[i]) == trace_to_string(spec, b[i]));
    }
    SECTION("counter walk of 5 steps validates under apply") {
        auto spec = toys::counter_spec();
        auto traces = random_walk(spec, 1, {5, 1});
        REQUIRE(traces.size() == 1);
        CHECK(traces[0].depth() == 5);
        State cur = traces[0].init;
        for (const auto& [inst, next] : traces[0].steps) {
            State expect = apply(inst, cur);
            CHECK(expect == next);
            cur = next;
        }
    }
}

TEST_CASE("trace files round-trip bit-exactly") {
    auto spec = toys::mutex_spec(true);
    auto result = bfs_check(spec, {toys::mutex_invariant()}, {}, StopPolicy::first_violation());
    REQUIRE(!result.violations.empty());
    const Trace& t = result.violations[0].trace;
    std::string text = trace_to_string(spec, t);
    CHECK(text.rfind(kTraceHeader, 0) == 0);
    Trace back = trace_from_string(spec, text);
    CHECK(validate_trace(spec, back));
    CHECK(trace_to_string(spec, back) == text);
    REQUIRE(back.depth() == t.depth());
    CHECK(back.last() == t.last());
}

TEST_CASE("exploration filter prunes known-buggy endpoints") {
    auto spec = toys::mutex_spec(true);
    auto inv = toys::mutex_invariant();
    auto base = bfs_check(spec, {inv}, {}, StopPolicy::to_completion());
    REQUIRE(!base.violations.empty());
    std::vector<State> known;
    for (const auto& v : base.violations) known.push_back(v.trace.last());
    ExplorationFilter filter = [&](const State& s) {
        for (const auto& k : known)
            if (k == s) return true;
        return false;
    };
    auto pruned = bfs_check(spec, {inv}, {}, StopPolicy::to_completion(), filter);
    CHECK(pruned.violations.empty());
    CHECK(pruned.distinct_states < base.distinct_states);
}
