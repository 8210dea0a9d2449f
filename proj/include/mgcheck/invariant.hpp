#pragma once

#include <functional>
#include <string>

#include "mgcheck/action.hpp"
#include "mgcheck/state.hpp"

namespace mgcheck {

/// A checkable safety property. State invariants are evaluated on every
/// newly inserted state; transition invariants fire on transitions, which
/// is how path-conditional code-level checks and along-the-trace
/// monotonicity properties are expressed.
struct Invariant {
    enum class Kind { OnState, OnTransition };

    std::string id;
    std::string description;
    Kind kind = Kind::OnState;
    std::function<bool(const State&)> holds;
    std::function<bool(const State&, const ActionInstance&, const State&)> holds_transition;

    static Invariant on_state(std::string id, std::string description,
                              std::function<bool(const State&)> fn) {
        Invariant inv;
        inv.id = std::move(id);
        inv.description = std::move(description);
        inv.kind = Kind::OnState;
        inv.holds = std::move(fn);
        return inv;
    }
    static Invariant on_transition(
        std::string id, std::string description,
        std::function<bool(const State&, const ActionInstance&, const State&)> fn) {
        Invariant inv;
        inv.id = std::move(id);
        inv.description = std::move(description);
        inv.kind = Kind::OnTransition;
        inv.holds_transition = std::move(fn);
        return inv;
    }
};

}  // namespace mgcheck
