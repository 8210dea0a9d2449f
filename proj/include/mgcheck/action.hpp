#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "mgcheck/state.hpp"

namespace mgcheck {

/// A parameter binding: (name, value) pairs in declaration order.
class Bindings {
  public:
    Bindings() = default;
    explicit Bindings(std::vector<std::pair<std::string, Value>> entries)
        : entries_(std::move(entries)) {}

    const Value& at(std::string_view name) const {
        for (const auto& [k, v] : entries_)
            if (k == name) return v;
        throw Error("no binding for parameter '" + std::string(name) + "'");
    }
    const std::vector<std::pair<std::string, Value>>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

    /// Canonical text used for deterministic frontier ordering and traces.
    std::string encoded() const {
        std::string out;
        for (const auto& [k, v] : entries_) {
            out += k;
            out += '=';
            v.encode(out);
            out += ',';
        }
        return out;
    }
    friend bool operator==(const Bindings& a, const Bindings& b) {
        if (a.entries_.size() != b.entries_.size()) return false;
        for (std::size_t i = 0; i < a.entries_.size(); ++i)
            if (a.entries_[i].first != b.entries_[i].first ||
                !(a.entries_[i].second == b.entries_[i].second))
                return false;
        return true;
    }

  private:
    std::vector<std::pair<std::string, Value>> entries_;
};

/// Per-written-variable metadata: which variables the assigned expression
/// reads, plus a normalized label for the expression itself. The labels are
/// what the coarsening checker compares; alpha-renaming of bound parameters
/// is the author's responsibility when writing them.
struct WriteSpec {
    std::set<std::string> deps;
    std::string label;
};

class GuardCtx;
class UpdateCtx;

/// A named guarded deterministic update. `reads` must cover every variable
/// the guard touches and `writes` every assignment with its dependencies;
/// both are enforced at evaluation time, not trusted.
struct ActionDef {
    std::string name;
    std::string module;
    std::vector<std::pair<std::string, std::vector<Value>>> params;  // (name, finite domain)
    std::set<std::string> reads;
    std::map<std::string, WriteSpec> writes;
    std::function<bool(const GuardCtx&)> guard;
    std::function<void(UpdateCtx&)> update;

    std::set<std::string> referenced_vars() const {
        std::set<std::string> out = reads;
        for (const auto& [w, spec] : writes) {
            out.insert(w);
            out.insert(spec.deps.begin(), spec.deps.end());
        }
        return out;
    }
};

/// An ActionDef resolved against a composed spec's variable table.
class ResolvedAction {
  public:
    ResolvedAction(std::shared_ptr<const ActionDef> def, const VarTable& table)
        : def_(std::move(def)) {
        for (const std::string& r : def_->reads) read_ids_.push_back(table.require(r));
        for (const auto& [w, spec] : def_->writes) {
            write_ids_.push_back(table.require(w));
            for (const std::string& d : spec.deps) dep_ids_.push_back(table.require(d));
        }
        std::sort(read_ids_.begin(), read_ids_.end());
        std::sort(write_ids_.begin(), write_ids_.end());
        std::sort(dep_ids_.begin(), dep_ids_.end());
        dep_ids_.erase(std::unique(dep_ids_.begin(), dep_ids_.end()), dep_ids_.end());
        for (const std::string& v : def_->referenced_vars())
            ids_.emplace_back(v, table.require(v));
        std::sort(ids_.begin(), ids_.end());
    }

    const ActionDef& def() const { return *def_; }
    const std::string& name() const { return def_->name; }

    VarTable::Id id_of(std::string_view name) const {
        auto it = std::lower_bound(
            ids_.begin(), ids_.end(), name,
            [](const auto& entry, std::string_view n) { return entry.first < n; });
        if (it == ids_.end() || it->first != name)
            throw MetadataViolationError("action " + def_->name + " touched variable '" +
                                         std::string(name) +
                                         "' absent from its reads/writes metadata");
        return it->second;
    }
    bool may_read(VarTable::Id id) const {
        return std::binary_search(read_ids_.begin(), read_ids_.end(), id);
    }
    bool may_write(VarTable::Id id) const {
        return std::binary_search(write_ids_.begin(), write_ids_.end(), id);
    }
    bool may_dep(VarTable::Id id) const {
        return std::binary_search(dep_ids_.begin(), dep_ids_.end(), id);
    }
    const std::vector<VarTable::Id>& write_ids() const { return write_ids_; }

  private:
    std::shared_ptr<const ActionDef> def_;
    std::vector<std::pair<std::string, VarTable::Id>> ids_;
    std::vector<VarTable::Id> read_ids_, write_ids_, dep_ids_;
};

/// Read-only view a guard evaluates against. Every access is checked
/// against the action's declared `reads`.
class GuardCtx {
  public:
    GuardCtx(const State& s, const Bindings& b, const ResolvedAction& ra)
        : state_(s), bindings_(b), action_(ra) {}

    const Value& var(std::string_view name) const {
        VarTable::Id id = action_.id_of(name);
        if (!action_.may_read(id))
            throw MetadataViolationError("guard of " + action_.name() + " read undeclared '" +
                                         std::string(name) + "'");
        return state_.get(id);
    }
    const Value& param(std::string_view name) const { return bindings_.at(name); }
    const Bindings& bindings() const { return bindings_; }

  private:
    const State& state_;
    const Bindings& bindings_;
    const ResolvedAction& action_;
};

/// Mutation collector an update runs against. Reads observe the pre-state
/// only (primed semantics); every read must be a declared write dependency
/// and every assignment a declared write.
class UpdateCtx {
  public:
    UpdateCtx(const State& s, const Bindings& b, const ResolvedAction& ra)
        : state_(s), bindings_(b), action_(ra) {}

    const Value& var(std::string_view name) const {
        VarTable::Id id = action_.id_of(name);
        if (!action_.may_dep(id))
            throw MetadataViolationError("update of " + action_.name() + " read '" +
                                         std::string(name) +
                                         "' which is not a declared write dependency");
        return state_.get(id);
    }
    void set(std::string_view name, Value v) {
        VarTable::Id id = action_.id_of(name);
        if (!action_.may_write(id))
            throw MetadataViolationError("update of " + action_.name() +
                                         " wrote undeclared variable '" + std::string(name) +
                                         "'");
        for (auto& [i, old] : updates_)
            if (i == id) {
                old = std::move(v);
                return;
            }
        updates_.emplace_back(id, std::move(v));
    }
    const Value& param(std::string_view name) const { return bindings_.at(name); }
    const Bindings& bindings() const { return bindings_; }

    const std::vector<std::pair<VarTable::Id, Value>>& updates() const { return updates_; }

  private:
    const State& state_;
    const Bindings& bindings_;
    const ResolvedAction& action_;
    std::vector<std::pair<VarTable::Id, Value>> updates_;
};

/// An action bound to concrete parameters.
struct ActionInstance {
    const ResolvedAction* action = nullptr;
    Bindings bindings;

    const std::string& name() const { return action->name(); }
    /// Deterministic order: (action name, serialized bindings).
    std::string sort_key() const { return action->name() + "(" + bindings.encoded() + ")"; }
    friend bool operator==(const ActionInstance& a, const ActionInstance& b) {
        return a.action == b.action && a.bindings == b.bindings;
    }
};

}  // namespace mgcheck
