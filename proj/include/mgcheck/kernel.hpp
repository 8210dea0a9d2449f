#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <random>
#include <thread>
#include <unordered_map>
#include <vector>

#include "mgcheck/spec.hpp"

namespace mgcheck {

/// An alternating sequence of states and action instances, starting from
/// `init`. Applying step k's action to the previous state yields step k's
/// state; `validate_trace` re-checks exactly that.
struct Trace {
    State init;
    std::vector<std::pair<ActionInstance, State>> steps;

    const State& last() const { return steps.empty() ? init : steps.back().second; }
    std::size_t depth() const { return steps.size(); }
};

enum class Outcome { Complete, ViolationFound, BudgetExhausted };

inline const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::Complete: return "complete";
        case Outcome::ViolationFound: return "violation-found";
        case Outcome::BudgetExhausted: return "budget-exhausted";
    }
    return "?";
}

struct Violation {
    std::string invariant_id;
    Trace trace;
};

struct CheckResult {
    Outcome outcome = Outcome::Complete;
    std::vector<Violation> violations;
    std::uint64_t states_explored = 0;  // generated successors, duplicates included
    std::uint64_t distinct_states = 0;
    std::uint32_t max_depth = 0;
};

struct ExplorationBounds {
    std::uint64_t max_states = ~std::uint64_t(0);
    std::uint32_t max_depth = ~std::uint32_t(0);
    std::uint64_t max_millis = ~std::uint64_t(0);
    int workers = 1;
};

struct StopPolicy {
    enum class Mode { FirstViolation, ToCompletion, ViolationLimit };
    Mode mode = Mode::FirstViolation;
    std::uint64_t limit = 1;

    static StopPolicy first_violation() { return {Mode::FirstViolation, 1}; }
    static StopPolicy to_completion() { return {Mode::ToCompletion, ~std::uint64_t(0)}; }
    static StopPolicy violation_limit(std::uint64_t n) { return {Mode::ViolationLimit, n}; }
};

/// Consulted before inserting a state; `true` means the state is a known
/// buggy endpoint whose extensions should not be explored or re-reported.
using ExplorationFilter = std::function<bool(const State&)>;

namespace detail {

inline void check_conforms(const ComposedSpec& spec, const State& s) {
    if (s.empty()) throw MalformedStateError("empty state");
    if (s.table_ptr() == spec.table_ptr()) return;
    if (s.table().size() != spec.table().size())
        throw MalformedStateError("state does not declare the spec's variables");
    for (std::size_t i = 0; i < spec.table().size(); ++i)
        if (spec.table().name(static_cast<VarTable::Id>(i)) !=
            s.table().name(static_cast<VarTable::Id>(i)))
            throw MalformedStateError("state omits declared variable '" +
                                      spec.table().name(static_cast<VarTable::Id>(i)) + "'");
}

template <typename Fn>
void for_each_binding(const ActionDef& def, Fn&& fn) {
    const auto& params = def.params;
    if (params.empty()) {
        fn(Bindings{});
        return;
    }
    std::vector<std::size_t> idx(params.size(), 0);
    for (;;) {
        std::vector<std::pair<std::string, Value>> entries;
        entries.reserve(params.size());
        for (std::size_t i = 0; i < params.size(); ++i)
            entries.emplace_back(params[i].first, params[i].second[idx[i]]);
        fn(Bindings(std::move(entries)));
        std::size_t i = params.size();
        while (i > 0) {
            --i;
            if (++idx[i] < params[i].second.size()) break;
            idx[i] = 0;
            if (i == 0) return;
        }
    }
}

}  // namespace detail

inline bool guard_holds(const ResolvedAction& ra, const State& s, const Bindings& b) {
    GuardCtx ctx(s, b, ra);
    return ra.def().guard(ctx);
}

/// Exactly the action instances whose guard holds in `s`, ordered by
/// (action name, serialized bindings).
inline std::vector<ActionInstance> enumerate_enabled(const ComposedSpec& spec, const State& s) {
    detail::check_conforms(spec, s);
    std::vector<ActionInstance> out;
    for (const auto& ra : spec.actions()) {
        detail::for_each_binding(ra.def(), [&](Bindings b) {
            if (guard_holds(ra, s, b)) out.push_back(ActionInstance{&ra, std::move(b)});
        });
    }
    std::stable_sort(out.begin(), out.end(), [](const ActionInstance& a, const ActionInstance& b) {
        if (a.name() != b.name()) return a.name() < b.name();
        return a.bindings.encoded() < b.bindings.encoded();
    });
    return out;
}

/// Applies an enabled action; variables outside its write set are unchanged.
inline State apply(const ActionInstance& inst, const State& s) {
    const ResolvedAction& ra = *inst.action;
    if (!guard_holds(ra, s, inst.bindings))
        throw GuardNotEnabledError("apply: guard of " + ra.name() + "(" +
                                   inst.bindings.encoded() + ") does not hold");
    UpdateCtx ctx(s, inst.bindings, ra);
    ra.def().update(ctx);
    return s.with(ctx.updates());
}

/// Re-validates the Trace invariant step by step.
inline bool validate_trace(const ComposedSpec& spec, const Trace& t, std::string* why = nullptr) {
    detail::check_conforms(spec, t.init);
    State cur = t.init;
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        const auto& [inst, recorded] = t.steps[i];
        try {
            State next = apply(inst, cur);
            if (next != recorded) {
                if (why) *why = "step " + std::to_string(i) + ": post-state mismatch";
                return false;
            }
            cur = next;
        } catch (const Error& e) {
            if (why) *why = "step " + std::to_string(i) + ": " + e.what();
            return false;
        }
    }
    return true;
}

namespace detail {

struct BfsEntry {
    State state;
    std::uint32_t parent = ~std::uint32_t(0);
    ActionInstance via;  // action that produced this state (empty for init)
};

struct Candidate {
    std::uint32_t parent;
    ActionInstance via;
    State next;
    std::vector<std::string> transition_violations;
};

inline Trace trace_to(const std::vector<BfsEntry>& entries, std::uint32_t idx,
                      const State& init,
                      const std::optional<std::pair<ActionInstance, State>>& extra = {}) {
    std::vector<std::pair<ActionInstance, State>> steps;
    for (std::uint32_t i = idx; entries[i].parent != ~std::uint32_t(0); i = entries[i].parent)
        steps.emplace_back(entries[i].via, entries[i].state);
    std::reverse(steps.begin(), steps.end());
    if (extra) steps.push_back(*extra);
    Trace t;
    t.init = init;
    t.steps = std::move(steps);
    return t;
}

}  // namespace detail

/// Bounded breadth-first exploration with invariant checking. Level-by-level
/// from the initial state; state invariants are evaluated when a distinct
/// state is inserted, transition invariants on every generated transition.
/// A returned violation trace has minimal depth among all violating traces
/// of its stop level. Frontier levels may be processed by several workers;
/// results are merged in deterministic order, so worker count never changes
/// the outcome.
inline CheckResult bfs_check(const ComposedSpec& spec, const std::vector<Invariant>& invariants,
                             const ExplorationBounds& bounds, StopPolicy stop,
                             const ExplorationFilter& filter = {}) {
    using detail::BfsEntry;
    using detail::Candidate;
    const auto started = std::chrono::steady_clock::now();
    auto out_of_time = [&] {
        if (bounds.max_millis == ~std::uint64_t(0)) return false;
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - started)
                      .count();
        return static_cast<std::uint64_t>(ms) > bounds.max_millis;
    };

    CheckResult result;
    std::vector<BfsEntry> entries;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> visited;
    auto find_or_insert = [&](const State& s, std::uint32_t parent,
                              const ActionInstance* via) -> std::pair<std::uint32_t, bool> {
        Hash128 h = s.hash();
        auto& bucket = visited[h.lo ^ (h.hi * 0x9e3779b97f4a7c15ULL)];
        for (std::uint32_t i : bucket)
            if (entries[i].state == s) return {i, false};
        BfsEntry e;
        e.state = s;
        e.parent = parent;
        if (via) e.via = *via;
        entries.push_back(std::move(e));
        bucket.push_back(static_cast<std::uint32_t>(entries.size() - 1));
        return {static_cast<std::uint32_t>(entries.size() - 1), true};
    };

    std::vector<const Invariant*> state_invs, trans_invs;
    for (const auto& inv : invariants)
        (inv.kind == Invariant::Kind::OnState ? state_invs : trans_invs).push_back(&inv);

    std::uint64_t budget_limit =
        stop.mode == StopPolicy::Mode::FirstViolation ? 1
        : stop.mode == StopPolicy::Mode::ToCompletion ? ~std::uint64_t(0)
                                                      : stop.limit;
    bool budget_hit = false;

    // Depth 0: the initial state.
    result.states_explored = 1;
    if (filter && filter(spec.init())) {
        result.outcome = Outcome::Complete;
        return result;
    }
    find_or_insert(spec.init(), ~std::uint32_t(0), nullptr);
    result.distinct_states = 1;
    for (const Invariant* inv : state_invs) {
        if (!inv->holds(spec.init()))
            result.violations.push_back({inv->id, Trace{spec.init(), {}}});
    }

    std::uint32_t level_begin = 0, level_end = 1, depth = 0;
    while (level_begin < level_end) {
        if (!result.violations.empty() && result.violations.size() >= budget_limit) break;
        if (depth >= bounds.max_depth) {
            budget_hit = true;
            break;
        }
        if (entries.size() >= bounds.max_states || out_of_time()) {
            budget_hit = true;
            break;
        }

        // Expand this level, possibly in parallel; merge preserves the
        // order a single worker would produce.
        int workers = std::max(1, bounds.workers);
        std::uint32_t span = level_end - level_begin;
        workers = static_cast<int>(std::min<std::uint32_t>(workers, span));
        std::vector<std::vector<Candidate>> chunks(workers);
        auto expand_range = [&](std::uint32_t lo, std::uint32_t hi, std::vector<Candidate>& out) {
            for (std::uint32_t i = lo; i < hi; ++i) {
                const State& s = entries[i].state;
                for (const ActionInstance& inst : enumerate_enabled(spec, s)) {
                    Candidate c;
                    c.parent = i;
                    c.via = inst;
                    c.next = apply(inst, s);
                    for (const Invariant* inv : trans_invs)
                        if (!inv->holds_transition(s, inst, c.next))
                            c.transition_violations.push_back(inv->id);
                    out.push_back(std::move(c));
                }
            }
        };
        if (workers == 1) {
            expand_range(level_begin, level_end, chunks[0]);
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w) {
                std::uint32_t lo = level_begin + span * w / workers;
                std::uint32_t hi = level_begin + span * (w + 1) / workers;
                pool.emplace_back([&, lo, hi, w] { expand_range(lo, hi, chunks[w]); });
            }
            for (auto& t : pool) t.join();
        }

        for (auto& chunk : chunks) {
            for (auto& c : chunk) {
                ++result.states_explored;
                for (const auto& inv_id : c.transition_violations) {
                    Trace t = detail::trace_to(entries, c.parent, spec.init(),
                                               std::make_pair(c.via, c.next));
                    result.violations.push_back({inv_id, std::move(t)});
                }
                if (filter && filter(c.next)) continue;
                auto [idx, fresh] = find_or_insert(c.next, c.parent, &c.via);
                if (!fresh) continue;
                for (const Invariant* inv : state_invs) {
                    if (!inv->holds(c.next)) {
                        Trace t = detail::trace_to(entries, idx, spec.init());
                        result.violations.push_back({inv->id, std::move(t)});
                    }
                }
            }
        }

        level_begin = level_end;
        level_end = static_cast<std::uint32_t>(entries.size());
        if (level_begin < level_end) ++depth;
    }

    result.distinct_states = entries.size();
    result.max_depth = depth;
    if (budget_hit)
        result.outcome = Outcome::BudgetExhausted;
    else if (!result.violations.empty())
        result.outcome = Outcome::ViolationFound;
    else
        result.outcome = Outcome::Complete;
    if (stop.mode != StopPolicy::Mode::ToCompletion &&
        result.violations.size() > budget_limit)
        result.violations.resize(budget_limit);
    return result;
}

struct WalkBudget {
    std::uint64_t max_steps = 0;
    std::uint64_t max_traces = 0;
};

namespace detail {
inline std::uint64_t bounded_rand(std::mt19937_64& rng, std::uint64_t n) {
    // Unbiased rejection sampling; reproducible independent of the
    // standard library's distribution implementation.
    std::uint64_t threshold = (~std::uint64_t(0) - n + 1) % n;
    for (;;) {
        std::uint64_t r = rng();
        if (r >= threshold) return r % n;
    }
}
}  // namespace detail

/// Bounded random walks: uniform choice over the enabled instances at each
/// step. The same seed and budget always produce the same traces.
inline std::vector<Trace> random_walk(const ComposedSpec& spec, std::uint64_t seed,
                                      const WalkBudget& budget) {
    std::mt19937_64 rng(seed);
    std::vector<Trace> traces;
    for (std::uint64_t k = 0; k < budget.max_traces; ++k) {
        Trace t;
        t.init = spec.init();
        State cur = t.init;
        for (std::uint64_t step = 0; step < budget.max_steps; ++step) {
            auto enabled = enumerate_enabled(spec, cur);
            if (enabled.empty()) break;
            const ActionInstance& pick =
                enabled[detail::bounded_rand(rng, enabled.size())];
            State next = apply(pick, cur);
            t.steps.emplace_back(pick, next);
            cur = next;
        }
        traces.push_back(std::move(t));
    }
    return traces;
}

}  // namespace mgcheck
