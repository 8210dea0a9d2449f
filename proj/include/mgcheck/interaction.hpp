#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mgcheck/kernel.hpp"
#include "mgcheck/spec.hpp"

namespace mgcheck {

/// Per-module dependency variables and the global interaction variables.
struct VariableClassification {
    std::map<std::string, std::set<std::string>> dependency;  // module name -> D_M
    std::set<std::string> interaction;                        // I

    const std::set<std::string>& deps_of(const std::string& module) const {
        auto it = dependency.find(module);
        if (it == dependency.end())
            throw ClassificationMissingError("no dependency set computed for module '" +
                                             module + "'");
        return it->second;
    }
};

/// Dependency variables of one module: variables of the guards, closed
/// transitively through assignment dependencies within the module. The
/// closure follows computed assignments (two or more source variables);
/// a plain copy x := w inside the module does not pull w in, which is
/// exactly what makes copies into other modules' dependency variables an
/// interaction concern below.
inline std::set<std::string> dependency_vars(const ModuleSpec& m) {
    std::set<std::string> deps;
    for (const auto& a : m.actions) deps.insert(a->reads.begin(), a->reads.end());
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& a : m.actions) {
            for (const auto& [v, w] : a->writes) {
                if (!deps.count(v) || w.deps.size() < 2) continue;
                for (const auto& d : w.deps)
                    if (deps.insert(d).second) grew = true;
            }
        }
    }
    return deps;
}

/// Least fixpoint of the three interaction rules: shared dependency
/// variables; closure through assignments to interaction variables; and
/// closure through assignments (from any module) to a module's internal
/// dependency variables.
inline std::set<std::string> interaction_vars(const std::vector<ModuleSpec>& modules) {
    std::map<std::string, std::set<std::string>> dep;
    for (const auto& m : modules) {
        auto d = dependency_vars(m);
        dep[m.name].insert(d.begin(), d.end());  // merge multi-part modules by name
    }

    std::set<std::string> inter;
    std::vector<std::string> names;
    for (const auto& [n, d] : dep) names.push_back(n);
    for (std::size_t i = 0; i < names.size(); ++i)
        for (std::size_t j = i + 1; j < names.size(); ++j)
            for (const auto& v : dep[names[i]])
                if (dep[names[j]].count(v)) inter.insert(v);

    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& m : modules) {
            const auto& dm = dep[m.name];
            for (const auto& a : m.actions) {
                for (const auto& [v, w] : a->writes) {
                    if (w.deps.empty()) continue;
                    // Rule 2: assignment to an interaction variable.
                    if (inter.count(v)) {
                        for (const auto& d : w.deps)
                            if (!dm.count(d) && inter.insert(d).second) grew = true;
                    }
                    // Rule 3: assignment (from anywhere) to another module's
                    // internal dependency variable.
                    for (const auto& [other, dother] : dep) {
                        if (!dother.count(v) || inter.count(v)) continue;
                        for (const auto& d : w.deps)
                            if (!dother.count(d) && inter.insert(d).second) grew = true;
                    }
                }
            }
        }
    }
    return inter;
}

inline VariableClassification classify(const std::vector<ModuleSpec>& modules) {
    VariableClassification c;
    for (const auto& m : modules) {
        auto d = dependency_vars(m);
        c.dependency[m.name].insert(d.begin(), d.end());
    }
    c.interaction = interaction_vars(modules);
    return c;
}

struct CoarseningVerdict {
    struct Entry {
        std::string rule;  // "vars-unchanged" | "updates-unchanged"
        std::string variable;
        std::string action;
        std::string explanation;
    };
    bool preserved = true;
    std::vector<Entry> violations;

    void flag(std::string rule, std::string variable, std::string action,
              std::string explanation) {
        preserved = false;
        violations.push_back(
            {std::move(rule), std::move(variable), std::move(action), std::move(explanation)});
    }
};

/// Checks the two interaction-preservation constraints structurally: the
/// coarsened variant must keep every variable in D_target ∪ I the original
/// touches, and for each such variable the multiset of normalized update
/// labels must be unchanged. The trace-equivalence oracle below backstops
/// this syntactic check at desk scale.
inline CoarseningVerdict check_interaction_preserving(const ModuleSpec& original,
                                                      const ModuleSpec& coarsened,
                                                      const std::vector<ModuleSpec>& context,
                                                      const std::string& target) {
    if (original.name != coarsened.name)
        throw SemanticError("original and coarsened must share a module name (" +
                            original.name + " vs " + coarsened.name + ")");
    if (target == original.name)
        throw SemanticError("target module must differ from the coarsened module");

    bool target_known = false;
    for (const auto& m : context) target_known = target_known || m.name == target;
    if (!target_known)
        throw ClassificationMissingError("target module '" + target +
                                         "' is not in the analysis context");

    std::vector<ModuleSpec> with_original = context;
    with_original.push_back(original);
    VariableClassification cls = classify(with_original);

    std::set<std::string> watched = cls.deps_of(target);
    watched.insert(cls.interaction.begin(), cls.interaction.end());

    CoarseningVerdict verdict;

    // Constraint 1: watched variables the original declares must be
    // declared identically by the coarsened variant.
    for (const auto& d : original.declared_vars) {
        if (!watched.count(d.name)) continue;
        bool found = false;
        for (const auto& cd : coarsened.declared_vars) {
            if (cd.name != d.name) continue;
            found = true;
            if (!(cd.init == d.init))
                verdict.flag("vars-unchanged", d.name, "",
                             "initializer changed by the coarsening");
        }
        if (!found)
            verdict.flag("vars-unchanged", d.name, "",
                         "variable dropped by the coarsening");
    }

    // Constraint 2: per watched variable, the multiset of update labels.
    auto labels_of = [&](const ModuleSpec& m) {
        std::map<std::string, std::multiset<std::string>> by_var;
        for (const auto& a : m.actions)
            for (const auto& [v, w] : a->writes)
                if (watched.count(v)) by_var[v].insert(w.label);
        return by_var;
    };
    auto orig_labels = labels_of(original);
    auto coarse_labels = labels_of(coarsened);
    auto first_writer = [](const ModuleSpec& m, const std::string& v,
                           const std::string& label) -> std::string {
        for (const auto& a : m.actions) {
            auto it = a->writes.find(v);
            if (it != a->writes.end() && it->second.label == label) return a->name;
        }
        return "";
    };
    std::set<std::string> vars;
    for (const auto& [v, ls] : orig_labels) vars.insert(v);
    for (const auto& [v, ls] : coarse_labels) vars.insert(v);
    for (const auto& v : vars) {
        const auto& o = orig_labels[v];
        const auto& c = coarse_labels[v];
        for (const auto& label : o)
            if (c.count(label) < o.count(label)) {
                verdict.flag("updates-unchanged", v, first_writer(original, v, label),
                             "update '" + label + "' missing after coarsening");
                break;
            }
        for (const auto& label : c)
            if (o.count(label) < c.count(label)) {
                verdict.flag("updates-unchanged", v, first_writer(coarsened, v, label),
                             "update '" + label + "' introduced by coarsening");
                break;
            }
    }
    return verdict;
}

/// A state restricted to D_target ∪ I, with stuttering removed.
struct ProjectedTrace {
    std::vector<std::string> var_names;       // sorted projection domain
    std::vector<std::vector<Value>> states;   // consecutive entries are distinct

    std::string key() const {
        std::string out;
        for (const auto& st : states) {
            for (const auto& v : st) v.encode(out);
            out += '|';
        }
        return out;
    }
    std::string to_text() const {
        std::string out;
        for (const auto& st : states) {
            out += "  [";
            for (std::size_t i = 0; i < st.size(); ++i) {
                if (i) out += ", ";
                out += var_names[i] + "=" + st[i].to_text();
            }
            out += "]\n";
        }
        return out;
    }
};

namespace detail {

struct Projector {
    std::vector<VarTable::Id> ids;
    std::vector<std::string> names;

    Projector(const ComposedSpec& spec, const std::set<std::string>& watched) {
        for (const auto& v : watched) {
            // A watched variable may be internal to the other granularity
            // and absent here; project over the common declared part.
            if (spec.table().has(v)) {
                ids.push_back(spec.table().require(v));
                names.push_back(v);
            }
        }
    }
    std::vector<Value> project(const State& s) const {
        std::vector<Value> out;
        out.reserve(ids.size());
        for (auto id : ids) out.push_back(s.get(id));
        return out;
    }
};

}  // namespace detail

/// Restricts every state of `t` to D_target ∪ I and merges the transitions
/// that leave the projection unchanged.
inline ProjectedTrace project_and_condense(const Trace& t, const ComposedSpec& spec,
                                           const VariableClassification& cls,
                                           const std::string& target) {
    std::set<std::string> watched = cls.deps_of(target);
    watched.insert(cls.interaction.begin(), cls.interaction.end());
    detail::Projector p(spec, watched);

    ProjectedTrace out;
    out.var_names = p.names;
    out.states.push_back(p.project(t.init));
    for (const auto& [inst, st] : t.steps) {
        auto proj = p.project(st);
        if (proj != out.states.back()) out.states.push_back(std::move(proj));
    }
    return out;
}

struct TheoremBounds {
    std::uint32_t raw_step_cap = 12;    // maximal raw trace length
    std::uint32_t projected_cap = 6;    // condensed prefix length compared
    std::uint64_t max_traces = 100000;  // enumeration budget per side
};

struct TheoremResult {
    enum class Outcome { Equivalent, Counterexample, BudgetExhausted };
    Outcome outcome = Outcome::Equivalent;
    std::optional<ProjectedTrace> witness;
    std::string witness_side;  // which spec realizes the unmatched behavior
    std::uint64_t traces_full = 0, traces_coarsened = 0;
    std::string note;
};

namespace detail {

using CondensedSet = std::map<std::vector<std::string>, std::vector<std::vector<Value>>>;

/// Depth-first unrolling of all maximal traces up to the raw cap. Every
/// visited path contributes its condensed projection, so the collected set
/// is prefix-closed by construction. Exploration is cut once the condensed
/// prefix reaches the cap: nothing deeper can change the compared sets.
/// Returns false when the trace budget is exceeded.
inline bool enumerate_condensed(const ComposedSpec& spec, const Projector& p,
                                const TheoremBounds& bounds, std::uint64_t& traces,
                                CondensedSet& out) {
    std::vector<std::string> keys;
    std::vector<std::vector<Value>> vals;

    auto key_of = [&](const std::vector<Value>& projected) {
        std::string k;
        for (const Value& v : projected) v.encode(k);
        return k;
    };
    auto record = [&] {
        if (!out.count(keys)) out.emplace(keys, vals);
    };

    std::function<bool(const State&, std::uint32_t)> dfs =
        [&](const State& s, std::uint32_t depth) -> bool {
        record();
        if (keys.size() >= bounds.projected_cap || depth >= bounds.raw_step_cap)
            return ++traces <= bounds.max_traces;
        auto enabled = enumerate_enabled(spec, s);
        if (enabled.empty()) return ++traces <= bounds.max_traces;
        for (const auto& inst : enabled) {
            State next = apply(inst, s);
            auto projected = p.project(next);
            bool interesting = key_of(projected) != keys.back();
            if (interesting) {
                keys.push_back(key_of(projected));
                vals.push_back(projected);
            }
            bool ok = dfs(next, depth + 1);
            if (interesting) {
                keys.pop_back();
                vals.pop_back();
            }
            if (!ok) return false;
        }
        return true;
    };

    auto projected = p.project(spec.init());
    keys.push_back(key_of(projected));
    vals.push_back(projected);
    return dfs(spec.init(), 0);
}

}  // namespace detail

/// Bounded check of the trace-set equivalence behind interaction-preserving
/// coarsening: both specs are exhaustively unrolled to the raw cap, every
/// trace is projected to D_target ∪ I and condensed, and the prefix-closed
/// sets of condensed behaviors (up to the projected cap) are compared as
/// sets. A behavior present on one side only is returned as the witness.
/// This is a bounded approximation of the unbounded trace equivalence; the
/// result's note says so.
inline TheoremResult theorem_oracle(const ComposedSpec& full, const ComposedSpec& coarsened,
                                    const std::string& target,
                                    const VariableClassification& cls,
                                    const TheoremBounds& bounds = {}) {
    std::set<std::string> watched = cls.deps_of(target);
    watched.insert(cls.interaction.begin(), cls.interaction.end());

    detail::Projector pf(full, watched);
    detail::Projector pc(coarsened, watched);
    if (pf.names != pc.names)
        throw SemanticError(
            "projection domains differ between the two specs; the coarsening dropped a "
            "watched variable");

    TheoremResult r;
    r.note = "bounded approximation: raw cap " + std::to_string(bounds.raw_step_cap) +
             ", condensed prefix cap " + std::to_string(bounds.projected_cap);

    detail::CondensedSet full_set, coarse_set;
    if (!detail::enumerate_condensed(full, pf, bounds, r.traces_full, full_set) ||
        !detail::enumerate_condensed(coarsened, pc, bounds, r.traces_coarsened, coarse_set)) {
        r.outcome = TheoremResult::Outcome::BudgetExhausted;
        return r;
    }

    auto witness_from = [&](const detail::CondensedSet::value_type& entry, const char* side) {
        ProjectedTrace w;
        w.var_names = pf.names;
        w.states = entry.second;
        r.witness = std::move(w);
        r.witness_side = side;
        r.outcome = TheoremResult::Outcome::Counterexample;
    };
    for (const auto& entry : full_set)
        if (!coarse_set.count(entry.first)) {
            witness_from(entry, "full");
            return r;
        }
    for (const auto& entry : coarse_set)
        if (!full_set.count(entry.first)) {
            witness_from(entry, "coarsened");
            return r;
        }
    r.outcome = TheoremResult::Outcome::Equivalent;
    return r;
}

}  // namespace mgcheck
