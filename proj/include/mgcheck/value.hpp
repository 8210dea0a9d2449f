#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mgcheck/errors.hpp"

namespace mgcheck {

/// Immutable structural value: the universe every protocol variable lives in.
/// Integers, booleans, finite-enumeration symbols, pairs (zxids), sequences,
/// sets and records. Equality is structural, hashing is consistent with
/// equality, and sets/records keep their elements in canonical order so a
/// value has exactly one representation.
class Value {
  public:
    enum class Kind : std::uint8_t { Int, Bool, Sym, Pair, Seq, Set, Record };

    Value() : Value(integer(0)) {}

    static Value integer(std::int64_t v);
    static Value boolean(bool v);
    static Value sym(std::string_view name);
    static Value pair(Value a, Value b);
    static Value seq(std::vector<Value> items);
    static Value set(std::vector<Value> items);  // sorted + deduplicated
    static Value record(std::vector<std::pair<std::string, Value>> fields);

    Kind kind() const { return node_->kind; }
    bool is_int() const { return kind() == Kind::Int; }
    bool is_bool() const { return kind() == Kind::Bool; }
    bool is_sym() const { return kind() == Kind::Sym; }
    bool is_pair() const { return kind() == Kind::Pair; }
    bool is_seq() const { return kind() == Kind::Seq; }
    bool is_set() const { return kind() == Kind::Set; }
    bool is_record() const { return kind() == Kind::Record; }

    std::int64_t as_int() const {
        expect(Kind::Int, "int");
        return node_->num;
    }
    bool as_bool() const {
        expect(Kind::Bool, "bool");
        return node_->num != 0;
    }
    const std::string& as_sym() const {
        expect(Kind::Sym, "symbol");
        return *node_->sym;
    }
    const Value& first() const {
        expect(Kind::Pair, "pair");
        return node_->items[0];
    }
    const Value& second() const {
        expect(Kind::Pair, "pair");
        return node_->items[1];
    }
    /// Elements of a sequence or set.
    const std::vector<Value>& items() const {
        if (kind() != Kind::Seq && kind() != Kind::Set)
            throw Error("value is not a sequence or set");
        return node_->items;
    }
    const std::vector<std::pair<std::string, Value>>& fields() const {
        expect(Kind::Record, "record");
        return node_->rec;
    }
    std::size_t size() const {
        switch (kind()) {
            case Kind::Seq:
            case Kind::Set:
                return node_->items.size();
            case Kind::Record:
                return node_->rec.size();
            default:
                throw Error("value has no size");
        }
    }
    const Value& at(std::size_t i) const { return items().at(i); }

    /// Record field access; throws if absent.
    const Value& field(std::string_view name) const;
    bool has_field(std::string_view name) const;
    /// Returns a copy of this record with one field replaced.
    Value with_field(std::string_view name, Value v) const;

    bool contains(const Value& v) const;  // set membership

    std::size_t hash() const { return node_->hash; }

    friend bool operator==(const Value& a, const Value& b) {
        if (a.node_ == b.node_) return true;
        if (a.node_->hash != b.node_->hash) return false;
        return compare(a, b) == 0;
    }
    friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }
    friend bool operator<(const Value& a, const Value& b) { return compare(a, b) < 0; }

    /// Total order: kind rank first, then content. Used for canonical set
    /// layout and deterministic tie-breaking throughout the kernel.
    static int compare(const Value& a, const Value& b);

    /// Canonical byte encoding; injective, so equal encodings mean equal
    /// values. Feeds state hashing and trace serialization.
    void encode(std::string& out) const;
    std::string encoded() const {
        std::string out;
        encode(out);
        return out;
    }

    /// Human/JSON-facing text form (also canonical).
    std::string to_text() const;

  private:
    struct Node {
        Kind kind;
        std::int64_t num = 0;                            // Int, Bool
        const std::string* sym = nullptr;                // Sym (interned)
        std::vector<Value> items;                        // Pair, Seq, Set
        std::vector<std::pair<std::string, Value>> rec;  // Record
        std::size_t hash = 0;
    };

    explicit Value(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

    void expect(Kind k, const char* what) const {
        if (kind() != k) throw Error(std::string("value is not a ") + what);
    }

    static const std::string* intern(std::string_view name);
    static std::size_t mix(std::size_t h, std::size_t v) {
        h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }
    static std::shared_ptr<const Node> finish(std::shared_ptr<Node> n);

    std::shared_ptr<const Node> node_;
};

inline const std::string* Value::intern(std::string_view name) {
    static std::mutex mu;
    static std::unordered_map<std::string_view, std::unique_ptr<std::string>> table;
    std::lock_guard<std::mutex> lock(mu);
    auto it = table.find(name);
    if (it != table.end()) return it->second.get();
    auto owned = std::make_unique<std::string>(name);
    std::string_view key = *owned;
    return table.emplace(key, std::move(owned)).first->second.get();
}

inline std::shared_ptr<const Value::Node> Value::finish(std::shared_ptr<Node> n) {
    std::size_t h = static_cast<std::size_t>(n->kind) * 0x100000001b3ULL;
    switch (n->kind) {
        case Kind::Int:
        case Kind::Bool:
            h = mix(h, static_cast<std::size_t>(n->num));
            break;
        case Kind::Sym:
            h = mix(h, std::hash<std::string_view>{}(*n->sym));
            break;
        case Kind::Pair:
        case Kind::Seq:
        case Kind::Set:
            for (const Value& v : n->items) h = mix(h, v.hash());
            h = mix(h, n->items.size());
            break;
        case Kind::Record:
            for (const auto& [k, v] : n->rec) {
                h = mix(h, std::hash<std::string_view>{}(k));
                h = mix(h, v.hash());
            }
            break;
    }
    n->hash = h;
    return n;
}

inline Value Value::integer(std::int64_t v) {
    // Small integers recur constantly (node ids, epochs, counters).
    static const int kCacheLo = -1, kCacheHi = 32;
    static std::shared_ptr<const Node> cache[kCacheHi - kCacheLo + 1];
    static std::once_flag once;
    std::call_once(once, [] {
        for (int i = kCacheLo; i <= kCacheHi; ++i) {
            auto n = std::make_shared<Node>();
            n->kind = Kind::Int;
            n->num = i;
            cache[i - kCacheLo] = finish(std::move(n));
        }
    });
    if (v >= kCacheLo && v <= kCacheHi) return Value(cache[v - kCacheLo]);
    auto n = std::make_shared<Node>();
    n->kind = Kind::Int;
    n->num = v;
    return Value(finish(std::move(n)));
}

inline Value Value::boolean(bool v) {
    static const std::shared_ptr<const Node> t = [] {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Bool;
        n->num = 1;
        return finish(std::move(n));
    }();
    static const std::shared_ptr<const Node> f = [] {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Bool;
        n->num = 0;
        return finish(std::move(n));
    }();
    return Value(v ? t : f);
}

inline Value Value::sym(std::string_view name) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Sym;
    n->sym = intern(name);
    return Value(finish(std::move(n)));
}

inline Value Value::pair(Value a, Value b) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Pair;
    n->items.reserve(2);
    n->items.push_back(std::move(a));
    n->items.push_back(std::move(b));
    return Value(finish(std::move(n)));
}

inline Value Value::seq(std::vector<Value> items) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Seq;
    n->items = std::move(items);
    return Value(finish(std::move(n)));
}

inline Value Value::set(std::vector<Value> items) {
    std::sort(items.begin(), items.end(),
              [](const Value& a, const Value& b) { return compare(a, b) < 0; });
    items.erase(std::unique(items.begin(), items.end(),
                            [](const Value& a, const Value& b) { return a == b; }),
                items.end());
    auto n = std::make_shared<Node>();
    n->kind = Kind::Set;
    n->items = std::move(items);
    return Value(finish(std::move(n)));
}

inline Value Value::record(std::vector<std::pair<std::string, Value>> fields) {
    std::sort(fields.begin(), fields.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < fields.size(); ++i)
        if (fields[i].first == fields[i - 1].first)
            throw Error("duplicate record field: " + fields[i].first);
    auto n = std::make_shared<Node>();
    n->kind = Kind::Record;
    n->rec = std::move(fields);
    return Value(finish(std::move(n)));
}

inline const Value& Value::field(std::string_view name) const {
    expect(Kind::Record, "record");
    for (const auto& [k, v] : node_->rec)
        if (k == name) return v;
    throw Error("record has no field '" + std::string(name) + "'");
}

inline bool Value::has_field(std::string_view name) const {
    if (kind() != Kind::Record) return false;
    for (const auto& [k, v] : node_->rec)
        if (k == name) return true;
    return false;
}

inline Value Value::with_field(std::string_view name, Value v) const {
    expect(Kind::Record, "record");
    auto fields = node_->rec;
    for (auto& [k, old] : fields) {
        if (k == name) {
            old = std::move(v);
            return record(std::move(fields));
        }
    }
    fields.emplace_back(std::string(name), std::move(v));
    return record(std::move(fields));
}

inline bool Value::contains(const Value& v) const {
    expect(Kind::Set, "set");
    const auto& xs = node_->items;
    auto it = std::lower_bound(xs.begin(), xs.end(), v, [](const Value& a, const Value& b) {
        return compare(a, b) < 0;
    });
    return it != xs.end() && *it == v;
}

inline int Value::compare(const Value& a, const Value& b) {
    if (a.node_ == b.node_) return 0;
    if (a.kind() != b.kind())
        return static_cast<int>(a.kind()) < static_cast<int>(b.kind()) ? -1 : 1;
    switch (a.kind()) {
        case Kind::Int:
        case Kind::Bool:
            if (a.node_->num != b.node_->num) return a.node_->num < b.node_->num ? -1 : 1;
            return 0;
        case Kind::Sym:
            return a.node_->sym->compare(*b.node_->sym) < 0   ? -1
                   : a.node_->sym->compare(*b.node_->sym) > 0 ? 1
                                                              : 0;
        case Kind::Pair:
        case Kind::Seq:
        case Kind::Set: {
            const auto& xs = a.node_->items;
            const auto& ys = b.node_->items;
            for (std::size_t i = 0; i < std::min(xs.size(), ys.size()); ++i)
                if (int c = compare(xs[i], ys[i]); c != 0) return c;
            if (xs.size() != ys.size()) return xs.size() < ys.size() ? -1 : 1;
            return 0;
        }
        case Kind::Record: {
            const auto& xs = a.node_->rec;
            const auto& ys = b.node_->rec;
            for (std::size_t i = 0; i < std::min(xs.size(), ys.size()); ++i) {
                if (int c = xs[i].first.compare(ys[i].first); c != 0) return c < 0 ? -1 : 1;
                if (int c = compare(xs[i].second, ys[i].second); c != 0) return c;
            }
            if (xs.size() != ys.size()) return xs.size() < ys.size() ? -1 : 1;
            return 0;
        }
    }
    return 0;
}

inline void Value::encode(std::string& out) const {
    auto put_len = [&out](std::size_t n) {
        out += std::to_string(n);
        out += ':';
    };
    switch (kind()) {
        case Kind::Int:
            out += 'i';
            out += std::to_string(node_->num);
            out += ';';
            break;
        case Kind::Bool:
            out += node_->num ? 'T' : 'F';
            break;
        case Kind::Sym:
            out += 'y';
            put_len(node_->sym->size());
            out += *node_->sym;
            break;
        case Kind::Pair:
            out += 'p';
            node_->items[0].encode(out);
            node_->items[1].encode(out);
            break;
        case Kind::Seq:
        case Kind::Set:
            out += kind() == Kind::Seq ? 'q' : 's';
            put_len(node_->items.size());
            for (const Value& v : node_->items) v.encode(out);
            break;
        case Kind::Record:
            out += 'r';
            put_len(node_->rec.size());
            for (const auto& [k, v] : node_->rec) {
                put_len(k.size());
                out += k;
                v.encode(out);
            }
            break;
    }
}

inline std::string Value::to_text() const {
    std::string out;
    switch (kind()) {
        case Kind::Int:
            return std::to_string(node_->num);
        case Kind::Bool:
            return node_->num ? "true" : "false";
        case Kind::Sym:
            return *node_->sym;
        case Kind::Pair:
            return "<" + node_->items[0].to_text() + ", " + node_->items[1].to_text() + ">";
        case Kind::Seq:
        case Kind::Set: {
            out = kind() == Kind::Seq ? "[" : "{";
            for (std::size_t i = 0; i < node_->items.size(); ++i) {
                if (i) out += ", ";
                out += node_->items[i].to_text();
            }
            out += kind() == Kind::Seq ? "]" : "}";
            return out;
        }
        case Kind::Record: {
            out = "(";
            for (std::size_t i = 0; i < node_->rec.size(); ++i) {
                if (i) out += ", ";
                out += node_->rec[i].first + ": " + node_->rec[i].second.to_text();
            }
            out += ")";
            return out;
        }
    }
    return out;
}

}  // namespace mgcheck

template <>
struct std::hash<mgcheck::Value> {
    std::size_t operator()(const mgcheck::Value& v) const noexcept { return v.hash(); }
};
