#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mgcheck/value.hpp"

namespace mgcheck {

struct Hash128 {
    std::uint64_t lo = 0, hi = 0;
    friend bool operator==(const Hash128& a, const Hash128& b) {
        return a.lo == b.lo && a.hi == b.hi;
    }
    friend bool operator<(const Hash128& a, const Hash128& b) {
        return a.hi != b.hi ? a.hi < b.hi : a.lo < b.lo;
    }
};

/// Two-lane FNV-1a with a final avalanche. Collisions are tolerated anyway:
/// the kernel always falls back to full structural equality.
class StreamHash128 {
  public:
    void update(const char* data, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            auto b = static_cast<std::uint8_t>(data[i]);
            a_ = (a_ ^ b) * 0x100000001b3ULL;
            b_ = (b_ ^ (b ^ 0xa5u)) * 0x00000100000001b3ULL ^ (b_ >> 47);
        }
    }
    void update(const std::string& s) { update(s.data(), s.size()); }
    Hash128 digest() const {
        auto mix = [](std::uint64_t x) {
            x ^= x >> 33;
            x *= 0xff51afd7ed558ccdULL;
            x ^= x >> 33;
            x *= 0xc4ceb9fe1a85ec53ULL;
            x ^= x >> 33;
            return x;
        };
        return Hash128{mix(a_ ^ (b_ << 1)), mix(b_ ^ (a_ >> 1))};
    }

  private:
    std::uint64_t a_ = 0xcbf29ce484222325ULL;
    std::uint64_t b_ = 0x84222325cbf29ce4ULL;
};

/// The declared variables of a composed spec. Indices are assigned in
/// sorted-name order, so iterating by index is iterating the sorted
/// variable map; the canonical state serialization relies on this.
class VarTable {
  public:
    using Id = std::uint32_t;
    static constexpr Id npos = ~Id(0);

    explicit VarTable(std::vector<std::string> names) : names_(std::move(names)) {
        std::sort(names_.begin(), names_.end());
        for (std::size_t i = 1; i < names_.size(); ++i)
            if (names_[i] == names_[i - 1])
                throw SemanticError("duplicate variable name: " + names_[i]);
    }

    Id id(std::string_view name) const {
        auto it = std::lower_bound(names_.begin(), names_.end(), name);
        if (it == names_.end() || *it != name) return npos;
        return static_cast<Id>(it - names_.begin());
    }
    Id require(std::string_view name) const {
        Id v = id(name);
        if (v == npos)
            throw SemanticError("reference to undeclared variable '" + std::string(name) + "'");
        return v;
    }
    const std::string& name(Id i) const { return names_.at(i); }
    std::size_t size() const { return names_.size(); }
    bool has(std::string_view name) const { return id(name) != npos; }

  private:
    std::vector<std::string> names_;
};

/// A total assignment of the declared variables. Immutable, cheap to copy,
/// hashed over the canonical serialization of the sorted variable map.
class State {
  public:
    State() = default;
    State(std::shared_ptr<const VarTable> table, std::vector<Value> values) {
        if (values.size() != table->size())
            throw MalformedStateError("state has " + std::to_string(values.size()) +
                                      " values for " + std::to_string(table->size()) +
                                      " declared variables");
        auto d = std::make_shared<Data>();
        d->table = std::move(table);
        d->values = std::move(values);
        data_ = std::move(d);
    }

    bool empty() const { return data_ == nullptr; }
    const VarTable& table() const { return *data_->table; }
    const std::shared_ptr<const VarTable>& table_ptr() const { return data_->table; }

    const Value& get(VarTable::Id id) const { return data_->values.at(id); }
    const Value& get(std::string_view name) const { return get(data_->table->require(name)); }

    /// Functional update; unnamed variables keep their values.
    State with(const std::vector<std::pair<VarTable::Id, Value>>& updates) const {
        auto values = data_->values;
        for (const auto& [id, v] : updates) values.at(id) = v;
        return State(data_->table, std::move(values));
    }

    Hash128 hash() const {
        if (!data_->hashed) {
            StreamHash128 h;
            std::string buf;
            for (std::size_t i = 0; i < data_->values.size(); ++i) {
                buf.clear();
                const std::string& name = data_->table->name(static_cast<VarTable::Id>(i));
                buf += name;
                buf += '=';
                data_->values[i].encode(buf);
                h.update(buf);
            }
            data_->hash = h.digest();
            data_->hashed = true;
        }
        return data_->hash;
    }

    friend bool operator==(const State& a, const State& b) {
        if (a.data_ == b.data_) return true;
        if (a.data_->values.size() != b.data_->values.size()) return false;
        if (a.hash() != b.hash()) return false;
        for (std::size_t i = 0; i < a.data_->values.size(); ++i)
            if (!(a.data_->values[i] == b.data_->values[i])) return false;
        return true;
    }
    friend bool operator!=(const State& a, const State& b) { return !(a == b); }

  private:
    struct Data {
        std::shared_ptr<const VarTable> table;
        std::vector<Value> values;
        mutable Hash128 hash;
        mutable bool hashed = false;
    };

    std::shared_ptr<const Data> data_;
};

}  // namespace mgcheck
