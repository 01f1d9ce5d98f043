#pragma once

#include <fstream>
#include <string>
#include <variant>

#include "json.hpp"
#include "polystab/pphs.hpp"
#include "polystab/wmdp.hpp"

namespace polystab {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// WMDP schema (format_version "1"):
// { "format_version": "1", "kind": "wmdp", "states": N, "init": i,
//   "actions": [ [ {"dist": {"<state>": prob, ...}, "weight": w | "+inf"}, ... ]  per state ] }

namespace iod {

inline double parse_weight(const Json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string() && j.get<std::string>() == "+inf") return kInf;
    throw SchemaError(where + ": weight must be a number or \"+inf\"");
}

inline Json weight_json(double w) {
    if (std::isinf(w) && w > 0) return Json("+inf");
    return Json(w);
}

inline int parse_state_key(const std::string& key, int state_count, const std::string& where) {
    try {
        size_t pos = 0;
        const int s = std::stoi(key, &pos);
        if (pos != key.size()) throw std::invalid_argument(key);
        if (s < 0 || s >= state_count) throw SchemaError(where + ": state index " + key + " out of range");
        return s;
    } catch (const SchemaError&) {
        throw;
    } catch (...) {
        throw SchemaError(where + ": bad state key \"" + key + "\"");
    }
}

template <class T>
T require(const Json& j, const std::string& field, const std::string& where) {
    if (!j.contains(field)) throw SchemaError(where + ": missing field \"" + field + "\"");
    try {
        return j.at(field).get<T>();
    } catch (...) {
        throw SchemaError(where + ": field \"" + field + "\" has the wrong type");
    }
}

}  // namespace iod

inline Wmdp wmdp_from_json(const Json& j) {
    Wmdp m;
    m.state_count = iod::require<int>(j, "states", "wmdp");
    m.init_state = iod::require<int>(j, "init", "wmdp");
    if (!j.contains("actions") || !j.at("actions").is_array())
        throw SchemaError("wmdp: missing actions array");
    const Json& acts = j.at("actions");
    if (static_cast<int>(acts.size()) != m.state_count)
        throw SchemaError("wmdp: actions array must have one entry per state");
    m.actions.resize(m.state_count);
    for (int s = 0; s < m.state_count; ++s) {
        if (!acts[s].is_array()) throw SchemaError("wmdp: actions[" + std::to_string(s) + "] not an array");
        for (const Json& ja : acts[s]) {
            const std::string where = "wmdp state " + std::to_string(s);
            WmdpAction a;
            a.weight = iod::parse_weight(ja.contains("weight") ? ja.at("weight") : Json(), where);
            if (!ja.contains("dist") || !ja.at("dist").is_object())
                throw SchemaError(where + ": action without dist object");
            for (auto it = ja.at("dist").begin(); it != ja.at("dist").end(); ++it) {
                const int to = iod::parse_state_key(it.key(), m.state_count, where);
                if (!it.value().is_number()) throw SchemaError(where + ": probability not a number");
                a.dist.push_back({to, it.value().get<double>()});
            }
            std::sort(a.dist.begin(), a.dist.end());
            m.actions[s].push_back(std::move(a));
        }
    }
    auto violations = validate(m);
    if (!violations.empty()) {
        std::string msg = "invalid wmdp:";
        for (const auto& v : violations)
            msg += " [state " + std::to_string(v.state) + " action " + std::to_string(v.action) + ": " + v.detail + "]";
        throw ValidationError(msg);
    }
    return m;
}

inline Json wmdp_to_json(const Wmdp& m) {
    Json j;
    j["format_version"] = "1";
    j["kind"] = "wmdp";
    j["states"] = m.state_count;
    j["init"] = m.init_state;
    Json acts = Json::array();
    for (int s = 0; s < m.state_count; ++s) {
        Json list = Json::array();
        for (const auto& a : m.actions[s]) {
            Json ja;
            Json dist = Json::object();
            for (auto [to, p] : a.dist) dist[std::to_string(to)] = p;
            ja["dist"] = std::move(dist);
            ja["weight"] = iod::weight_json(a.weight);
            list.push_back(std::move(ja));
        }
        acts.push_back(std::move(list));
    }
    j["actions"] = std::move(acts);
    return j;
}

// ---------------------------------------------------------------------------
// PPHS schema (format_version "1"):
// { "format_version": "1", "kind": "pphs", "dim": n,
//   "locations": [ {"invariant": [[a_1..a_n, rel, rhs], ...],
//                   "flow":      [[a_1..a_n, rel, rhs], ...]}, ... ],
//   "edges": [ {"loc": q, "facet_index": k, "dist": {"<loc>": p, ...}}, ... ],
//   "init": {"loc": q0, "point": [x_1..x_n]} }
// rel is "<=", "=" or ">=" (the last is normalized by negation on load).

namespace iod {

inline Halfspace parse_row(const Json& row, int dim, const std::string& where) {
    if (!row.is_array() || static_cast<int>(row.size()) != dim + 2)
        throw SchemaError(where + ": constraint row must be [a_1..a_n, rel, rhs]");
    Halfspace h;
    h.normal.resize(dim);
    for (int i = 0; i < dim; ++i) {
        if (!row[i].is_number()) throw SchemaError(where + ": coefficient not a number");
        h.normal[i] = row[i].get<double>();
    }
    if (!row[dim].is_string()) throw SchemaError(where + ": relation must be a string");
    const std::string rel = row[dim].get<std::string>();
    if (!row[dim + 1].is_number()) throw SchemaError(where + ": rhs not a number");
    h.offset = row[dim + 1].get<double>();
    if (rel == "<=") {
        h.rel = Relation::LessEq;
    } else if (rel == "=") {
        h.rel = Relation::Equal;
    } else if (rel == ">=") {
        h.rel = Relation::LessEq;
        for (double& v : h.normal) v = -v;
        h.offset = -h.offset;
    } else {
        throw SchemaError(where + ": relation must be \"<=\", \"=\" or \">=\"");
    }
    return h;
}

inline Json row_json(const Halfspace& h) {
    Json row = Json::array();
    for (double v : h.normal) row.push_back(v);
    row.push_back(h.rel == Relation::Equal ? "=" : "<=");
    row.push_back(h.offset);
    return row;
}

}  // namespace iod

inline Pphs pphs_from_json(const Json& j) {
    Pphs h;
    h.dim = iod::require<int>(j, "dim", "pphs");
    if (h.dim < 1) throw SchemaError("pphs: dim must be >= 1");
    if (!j.contains("locations") || !j.at("locations").is_array())
        throw SchemaError("pphs: missing locations array");
    int qi = 0;
    for (const Json& jl : j.at("locations")) {
        const std::string where = "pphs location " + std::to_string(qi++);
        PphsLocation loc;
        loc.invariant.base.dim = h.dim;
        loc.flow.dim = h.dim;
        if (!jl.contains("invariant") || !jl.at("invariant").is_array())
            throw SchemaError(where + ": missing invariant");
        for (const Json& row : jl.at("invariant"))
            loc.invariant.base.halfspaces.push_back(iod::parse_row(row, h.dim, where + " invariant"));
        if (!jl.contains("flow") || !jl.at("flow").is_array())
            throw SchemaError(where + ": missing flow");
        for (const Json& row : jl.at("flow"))
            loc.flow.halfspaces.push_back(iod::parse_row(row, h.dim, where + " flow"));
        h.locations.push_back(std::move(loc));
    }
    if (j.contains("edges")) {
        if (!j.at("edges").is_array()) throw SchemaError("pphs: edges must be an array");
        int ei = 0;
        for (const Json& je : j.at("edges")) {
            const std::string where = "pphs edge " + std::to_string(ei++);
            PphsEdge e;
            e.loc = iod::require<int>(je, "loc", where);
            e.facet_index = iod::require<int>(je, "facet_index", where);
            if (!je.contains("dist") || !je.at("dist").is_object())
                throw SchemaError(where + ": missing dist object");
            for (auto it = je.at("dist").begin(); it != je.at("dist").end(); ++it) {
                const int to = iod::parse_state_key(it.key(), static_cast<int>(h.locations.size()), where);
                if (!it.value().is_number()) throw SchemaError(where + ": probability not a number");
                e.dist.push_back({to, it.value().get<double>()});
            }
            std::sort(e.dist.begin(), e.dist.end());
            h.edges.push_back(std::move(e));
        }
    }
    if (!j.contains("init") || !j.at("init").is_object()) throw SchemaError("pphs: missing init object");
    h.init_loc = iod::require<int>(j.at("init"), "loc", "pphs init");
    if (!j.at("init").contains("point") || !j.at("init").at("point").is_array())
        throw SchemaError("pphs init: missing point");
    for (const Json& v : j.at("init").at("point")) {
        if (!v.is_number()) throw SchemaError("pphs init: point entry not a number");
        h.init_point.push_back(v.get<double>());
    }
    auto violations = validate_pphs(h);
    if (!violations.empty()) {
        std::string msg = "invalid pphs:";
        for (const auto& v : violations) msg += " [" + v + "]";
        throw ValidationError(msg);
    }
    return h;
}

inline Json pphs_to_json(const Pphs& h) {
    Json j;
    j["format_version"] = "1";
    j["kind"] = "pphs";
    j["dim"] = h.dim;
    Json locs = Json::array();
    for (const auto& loc : h.locations) {
        Json jl;
        Json inv = Json::array();
        for (const auto& hs : loc.invariant.base.halfspaces) inv.push_back(iod::row_json(hs));
        Json flow = Json::array();
        for (const auto& hs : loc.flow.halfspaces) flow.push_back(iod::row_json(hs));
        jl["invariant"] = std::move(inv);
        jl["flow"] = std::move(flow);
        locs.push_back(std::move(jl));
    }
    j["locations"] = std::move(locs);
    Json edges = Json::array();
    for (const auto& e : h.edges) {
        Json je;
        je["loc"] = e.loc;
        je["facet_index"] = e.facet_index;
        Json dist = Json::object();
        for (auto [to, p] : e.dist) dist[std::to_string(to)] = p;
        je["dist"] = std::move(dist);
        edges.push_back(std::move(je));
    }
    j["edges"] = std::move(edges);
    j["init"] = Json{{"loc", h.init_loc}, {"point", h.init_point}};
    return j;
}

// ---------------------------------------------------------------------------
// File-level entry points

using ParsedModel = std::variant<Wmdp, Pphs>;

inline ParsedModel model_from_json(const Json& j) {
    const std::string version = iod::require<std::string>(j, "format_version", "model");
    if (version != "1") throw SchemaError("unsupported format_version \"" + version + "\"");
    const std::string kind = iod::require<std::string>(j, "kind", "model");
    if (kind == "wmdp") return wmdp_from_json(j);
    if (kind == "pphs") return pphs_from_json(j);
    throw SchemaError("unknown model kind \"" + kind + "\"");
}

inline ParsedModel parse_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError(std::string("JSON parse failure in ") + path + ": " + e.what());
    }
    return model_from_json(j);
}

}  // namespace polystab
