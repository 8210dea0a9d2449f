#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mgcheck/action.hpp"
#include "mgcheck/invariant.hpp"
#include "mgcheck/state.hpp"

namespace mgcheck {

/// What survives a node fault. `Volatile` state is lost on crash and also
/// dropped when a node falls back to election; `ThreadVolatile` state
/// belongs to a thread that keeps running across role changes, so only a
/// real crash clears it.
enum class Volatility { Persistent, Volatile, ThreadVolatile };

struct VarDecl {
    std::string name;
    Value init;
    Volatility volatility = Volatility::Persistent;
    bool per_node = false;  // value is a sequence indexed by node id

    VarDecl() = default;
    VarDecl(std::string n, Value i, Volatility v = Volatility::Persistent, bool pn = false)
        : name(std::move(n)), init(std::move(i)), volatility(v), per_node(pn) {}
};

/// One module at one granularity: a set of actions plus the variables it
/// declares and the invariants that make sense at this granularity.
struct ModuleSpec {
    std::string name;
    std::string granularity;
    std::vector<std::shared_ptr<const ActionDef>> actions;
    std::vector<VarDecl> declared_vars;
    std::set<std::string> attached_invariants;

    bool declares(std::string_view var) const {
        for (const auto& d : declared_vars)
            if (d.name == var) return true;
        return false;
    }
};

struct Scale {
    int nodes = 3;
    int max_txns = 2;
};

struct FaultBudget {
    int max_crashes = 0;
    int max_partitions = 0;
};

struct CompositionPlan {
    std::string name;                               // spec label, e.g. "mSpec-2"
    std::map<std::string, std::string> selections;  // module -> granularity
    Scale scale;
    FaultBudget faults;
};

/// A module whose action set depends on the final composition (the fault
/// module: crash/restart must reset exactly the volatile variables the
/// selected variants declare). Always included in every composition.
struct GeneratedModule {
    std::string name;
    std::string granularity;
    std::function<ModuleSpec(const std::vector<VarDecl>&, const Scale&, const FaultBudget&)>
        build;
};

struct Library {
    std::vector<ModuleSpec> modules;
    std::vector<GeneratedModule> generated;
    std::map<std::string, Invariant> invariants;

    const ModuleSpec* find(std::string_view module, std::string_view granularity) const {
        for (const auto& m : modules)
            if (m.name == module && m.granularity == granularity) return &m;
        return nullptr;
    }
};

/// A mixed-grained system: one variant per module, next-state relation the
/// disjunction of all selected actions.
class ComposedSpec {
  public:
    std::string name;
    std::vector<ModuleSpec> modules;  // selected variants, selection order
    Scale scale;
    FaultBudget faults;

    const VarTable& table() const { return *table_; }
    const std::shared_ptr<const VarTable>& table_ptr() const { return table_; }
    const std::vector<ResolvedAction>& actions() const { return actions_; }
    const std::vector<Invariant>& invariants() const { return invariants_; }
    const State& init() const { return init_; }
    const std::vector<VarDecl>& decls() const { return decls_; }  // sorted by name

    const ResolvedAction* find_action(std::string_view name) const {
        for (const auto& a : actions_)
            if (a.name() == name) return &a;
        return nullptr;
    }
    const VarDecl& decl(std::string_view name) const {
        return decls_.at(table_->require(name));
    }

    /// Structural summary used by the determinism property tests.
    std::string signature() const {
        std::string out = name + "|";
        for (const auto& a : actions_) out += a.name() + ";";
        out += "|";
        for (std::size_t i = 0; i < table_->size(); ++i)
            out += table_->name(static_cast<VarTable::Id>(i)) + ";";
        out += "|";
        for (const auto& inv : invariants_) out += inv.id + ";";
        std::string st;
        for (std::size_t i = 0; i < table_->size(); ++i)
            init_.get(static_cast<VarTable::Id>(i)).encode(st);
        return out + "|" + st;
    }

    friend ComposedSpec compose(const CompositionPlan&, const Library&);

  private:
    std::shared_ptr<const VarTable> table_;
    std::vector<VarDecl> decls_;
    std::vector<ResolvedAction> actions_;
    std::vector<Invariant> invariants_;
    State init_;
};

/// Composes one variant per module into a mixed-grained spec. Declarations
/// are merged with conflict detection, every action's variable references
/// are resolved (dangling references are semantic errors naming the
/// variable), and invariants attached to the selected granularities are
/// collected from the registry.
inline ComposedSpec compose(const CompositionPlan& plan, const Library& library) {
    ComposedSpec spec;
    spec.name = plan.name;
    spec.scale = plan.scale;
    spec.faults = plan.faults;

    for (const auto& [module, granularity] : plan.selections) {
        const ModuleSpec* m = library.find(module, granularity);
        if (!m)
            throw SemanticError("plan selects unknown variant " + module + "/" + granularity);
        spec.modules.push_back(*m);
    }

    // Merge declarations; a variable declared twice is a conflict.
    std::vector<VarDecl> decls;
    std::map<std::string, std::string> owner;
    auto merge_decls = [&](const ModuleSpec& m) {
        for (const auto& d : m.declared_vars) {
            auto [it, fresh] = owner.emplace(d.name, m.name + "/" + m.granularity);
            if (!fresh)
                throw SemanticError("conflicting declarations of variable '" + d.name +
                                    "' by " + it->second + " and " + m.name + "/" +
                                    m.granularity);
            decls.push_back(d);
        }
    };
    for (const auto& m : spec.modules) merge_decls(m);

    // Generated modules see the protocol modules' declarations.
    for (const auto& g : library.generated) {
        ModuleSpec m = g.build(decls, plan.scale, plan.faults);
        spec.modules.push_back(m);
        merge_decls(spec.modules.back());
    }

    std::vector<std::string> names;
    names.reserve(decls.size());
    for (const auto& d : decls) names.push_back(d.name);
    spec.table_ = std::make_shared<VarTable>(std::move(names));

    spec.decls_.resize(decls.size());
    std::vector<Value> init_values(decls.size());
    for (auto& d : decls) {
        VarTable::Id id = spec.table_->require(d.name);
        init_values[id] = d.init;
        spec.decls_[id] = std::move(d);
    }
    spec.init_ = State(spec.table_, std::move(init_values));

    std::set<std::string> action_names;
    for (const auto& m : spec.modules) {
        std::set<std::string> in_module;
        for (const auto& a : m.actions) {
            if (!in_module.insert(a->name).second)
                throw SemanticError("module " + m.name + "/" + m.granularity +
                                    " declares action '" + a->name + "' twice");
            if (!action_names.insert(a->name).second)
                throw SemanticError("action name '" + a->name +
                                    "' is declared by two selected modules");
            try {
                spec.actions_.emplace_back(a, *spec.table_);
            } catch (const SemanticError& e) {
                throw SemanticError("in action " + a->name + ": " + e.what());
            }
        }
    }
    std::sort(spec.actions_.begin(), spec.actions_.end(),
              [](const ResolvedAction& a, const ResolvedAction& b) {
                  return a.name() < b.name();
              });

    std::set<std::string> inv_ids;
    for (const auto& m : spec.modules)
        inv_ids.insert(m.attached_invariants.begin(), m.attached_invariants.end());
    for (const auto& id : inv_ids) {
        auto it = library.invariants.find(id);
        if (it == library.invariants.end())
            throw SemanticError("attached invariant '" + id + "' is not in the registry");
        spec.invariants_.push_back(it->second);
    }
    return spec;
}

/// Complete, deterministic listing of the library's variants.
inline std::map<std::string, std::set<std::string>> list_variants(const Library& library) {
    std::map<std::string, std::set<std::string>> out;
    for (const auto& m : library.modules) out[m.name].insert(m.granularity);
    for (const auto& g : library.generated) out[g.name].insert(g.granularity);
    return out;
}

}  // namespace mgcheck
