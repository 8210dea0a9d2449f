#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mgcheck/kernel.hpp"

namespace mgcheck {

/// Value <-> JSON. Integers, booleans and symbols map onto JSON scalars,
/// sequences onto arrays; pairs, sets and records are tagged one-key
/// objects so decoding is unambiguous.
inline nlohmann::json value_to_json(const Value& v) {
    using nlohmann::json;
    switch (v.kind()) {
        case Value::Kind::Int: return v.as_int();
        case Value::Kind::Bool: return v.as_bool();
        case Value::Kind::Sym: return v.as_sym();
        case Value::Kind::Pair: return json{{"p", json::array({value_to_json(v.first()),
                                                               value_to_json(v.second())})}};
        case Value::Kind::Seq: {
            json arr = json::array();
            for (const auto& x : v.items()) arr.push_back(value_to_json(x));
            return arr;
        }
        case Value::Kind::Set: {
            json arr = json::array();
            for (const auto& x : v.items()) arr.push_back(value_to_json(x));
            return json{{"s", arr}};
        }
        case Value::Kind::Record: {
            json obj = json::object();
            for (const auto& [k, x] : v.fields()) obj[k] = value_to_json(x);
            return json{{"r", obj}};
        }
    }
    return nullptr;
}

inline Value value_from_json(const nlohmann::json& j) {
    using nlohmann::json;
    if (j.is_number_integer()) return Value::integer(j.get<std::int64_t>());
    if (j.is_boolean()) return Value::boolean(j.get<bool>());
    if (j.is_string()) return Value::sym(j.get<std::string>());
    if (j.is_array()) {
        std::vector<Value> items;
        for (const auto& x : j) items.push_back(value_from_json(x));
        return Value::seq(std::move(items));
    }
    if (j.is_object() && j.size() == 1) {
        if (j.contains("p")) {
            const auto& arr = j.at("p");
            return Value::pair(value_from_json(arr.at(0)), value_from_json(arr.at(1)));
        }
        if (j.contains("s")) {
            std::vector<Value> items;
            for (const auto& x : j.at("s")) items.push_back(value_from_json(x));
            return Value::set(std::move(items));
        }
        if (j.contains("r")) {
            std::vector<std::pair<std::string, Value>> fields;
            for (auto it = j.at("r").begin(); it != j.at("r").end(); ++it)
                fields.emplace_back(it.key(), value_from_json(it.value()));
            return Value::record(std::move(fields));
        }
    }
    throw Error("unrecognized value encoding: " + j.dump());
}

constexpr const char* kTraceHeader = "mgcheck-trace v1";

/// Line-delimited trace file: the header line, the full initial state as
/// record 0, then one record per step carrying the action, its bindings
/// and the variables it changed with their post-values.
inline void write_trace(const ComposedSpec& spec, const Trace& t, std::ostream& os) {
    using nlohmann::json;
    os << kTraceHeader << "\n";
    json init = json::object();
    for (std::size_t i = 0; i < spec.table().size(); ++i)
        init[spec.table().name(static_cast<VarTable::Id>(i))] =
            value_to_json(t.init.get(static_cast<VarTable::Id>(i)));
    os << json{{"index", 0}, {"state", init}}.dump() << "\n";

    State prev = t.init;
    for (std::size_t k = 0; k < t.steps.size(); ++k) {
        const auto& [inst, post] = t.steps[k];
        json bindings = json::object();
        for (const auto& [name, v] : inst.bindings.entries()) bindings[name] = value_to_json(v);
        json changed = json::object();
        for (std::size_t i = 0; i < spec.table().size(); ++i) {
            auto id = static_cast<VarTable::Id>(i);
            if (!(prev.get(id) == post.get(id)))
                changed[spec.table().name(id)] = value_to_json(post.get(id));
        }
        os << json{{"index", k + 1},
                   {"action", inst.name()},
                   {"bindings", bindings},
                   {"changed", changed}}
                  .dump()
           << "\n";
        prev = post;
    }
}

inline std::string trace_to_string(const ComposedSpec& spec, const Trace& t) {
    std::ostringstream os;
    write_trace(spec, t, os);
    return os.str();
}

inline Trace read_trace(const ComposedSpec& spec, std::istream& is) {
    using nlohmann::json;
    std::string line;
    if (!std::getline(is, line) || line != kTraceHeader)
        throw Error("trace file does not start with '" + std::string(kTraceHeader) + "'");

    Trace t;
    State cur;
    bool have_init = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        json rec = json::parse(line);
        if (!have_init) {
            if (rec.at("index").get<int>() != 0) throw Error("trace record 0 missing");
            std::vector<Value> values(spec.table().size());
            const auto& st = rec.at("state");
            for (std::size_t i = 0; i < spec.table().size(); ++i) {
                const std::string& name = spec.table().name(static_cast<VarTable::Id>(i));
                if (!st.contains(name))
                    throw MalformedStateError("trace init omits variable '" + name + "'");
                values[i] = value_from_json(st.at(name));
            }
            t.init = State(spec.table_ptr(), std::move(values));
            cur = t.init;
            have_init = true;
            continue;
        }
        const std::string action_name = rec.at("action").get<std::string>();
        const ResolvedAction* ra = spec.find_action(action_name);
        if (!ra) throw Error("trace names unknown action '" + action_name + "'");
        std::vector<std::pair<std::string, Value>> entries;
        const auto& bj = rec.at("bindings");
        for (const auto& [pname, domain] : ra->def().params) {
            if (!bj.contains(pname))
                throw Error("trace step lacks binding '" + pname + "' for " + action_name);
            entries.emplace_back(pname, value_from_json(bj.at(pname)));
        }
        ActionInstance inst{ra, Bindings(std::move(entries))};
        std::vector<std::pair<VarTable::Id, Value>> updates;
        for (auto it = rec.at("changed").begin(); it != rec.at("changed").end(); ++it)
            updates.emplace_back(spec.table().require(it.key()), value_from_json(it.value()));
        cur = cur.with(updates);
        t.steps.emplace_back(std::move(inst), cur);
    }
    if (!have_init) throw Error("trace file has no records");
    return t;
}

inline Trace trace_from_string(const ComposedSpec& spec, const std::string& text) {
    std::istringstream is(text);
    return read_trace(spec, is);
}

}  // namespace mgcheck
