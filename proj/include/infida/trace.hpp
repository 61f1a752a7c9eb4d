#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "error.hpp"
#include "serving.hpp"
#include "workload.hpp"

namespace infida {

struct TypeCount {
    TaskId task = 0;
    int path = 0;
    Count count = 0;

    bool operator==(const TypeCount&) const = default;
};

struct CapacityOverride {
    TaskId task = 0;
    int path = 0;
    NodeId node = 0;
    ModelId model = 0;
    double l = 0.0;

    bool operator==(const CapacityOverride&) const = default;
};

struct TraceSlot {
    std::size_t slot = 0;
    std::vector<TypeCount> requests;
    std::vector<CapacityOverride> overrides;

    bool operator==(const TraceSlot&) const = default;
};

using Trace = std::vector<TraceSlot>;

/*
 * File layout, one slot per line:
 *   slot,n,task,path,count,...(n triples),k,task,path,node,model,l,...(k tuples)
 * followed by a closing "end,<slots>" record. Lines starting with '#' are comments.
 */
inline constexpr const char* trace_header = "# infida-trace v1: slot,n,(task,path,count)*n,k,(task,path,node,model,l)*k";

namespace detail {

inline std::string shortest(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <class T>
T parse_number(const std::string& s, std::size_t line) {
    T v{};
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw ParseError("bad number '" + s + "'", line);
    return v;
}

}  // namespace detail

inline void write_trace(std::ostream& out, const Trace& trace) {
    out << trace_header << '\n';
    for (const auto& s : trace) {
        out << s.slot << ',' << s.requests.size();
        for (const auto& r : s.requests) out << ',' << r.task << ',' << r.path << ',' << r.count;
        out << ',' << s.overrides.size();
        for (const auto& o : s.overrides)
            out << ',' << o.task << ',' << o.path << ',' << o.node << ',' << o.model << ',' << detail::shortest(o.l);
        out << '\n';
    }
    out << "end," << trace.size() << '\n';
}

inline Trace read_trace(std::istream& in) {
    Trace trace;
    std::string line;
    std::size_t lineno = 0;
    bool closed = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (closed) throw ParseError("data after end record", lineno);
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.empty()) throw ParseError("empty record", lineno);
        if (f[0] == "end") {
            if (f.size() != 2) throw ParseError("malformed end record", lineno);
            if (detail::parse_number<std::size_t>(f[1], lineno) != trace.size())
                throw ParseError("slot count mismatch in end record", lineno);
            closed = true;
            continue;
        }
        std::size_t pos = 0;
        auto take = [&]() -> const std::string& {
            if (pos >= f.size()) throw ParseError("record ends early", lineno);
            return f[pos++];
        };
        TraceSlot s;
        s.slot = detail::parse_number<std::size_t>(take(), lineno);
        auto n = detail::parse_number<std::size_t>(take(), lineno);
        for (std::size_t k = 0; k < n; ++k) {
            TypeCount r;
            r.task = detail::parse_number<TaskId>(take(), lineno);
            r.path = detail::parse_number<int>(take(), lineno);
            r.count = detail::parse_number<Count>(take(), lineno);
            if (r.count < 0) throw ParseError("negative count", lineno);
            s.requests.push_back(r);
        }
        auto m = detail::parse_number<std::size_t>(take(), lineno);
        for (std::size_t k = 0; k < m; ++k) {
            CapacityOverride o;
            o.task = detail::parse_number<TaskId>(take(), lineno);
            o.path = detail::parse_number<int>(take(), lineno);
            o.node = detail::parse_number<NodeId>(take(), lineno);
            o.model = detail::parse_number<ModelId>(take(), lineno);
            o.l = detail::parse_number<double>(take(), lineno);
            s.overrides.push_back(o);
        }
        if (pos != f.size()) throw ParseError("trailing fields", lineno);
        trace.push_back(std::move(s));
    }
    if (!closed) throw ParseError("missing end record (truncated file?)", lineno);
    return trace;
}

inline void save_trace(const std::string& path, const Trace& trace) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    write_trace(out, trace);
}

inline Trace load_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read " + path);
    return read_trace(in);
}

// Instance bindings ---------------------------------------------------------

inline TraceSlot to_trace_slot(const Instance& inst, const RequestBatch& b) {
    TraceSlot s;
    s.slot = b.slot;
    for (std::size_t k = 0; k < inst.num_types(); ++k)
        if (b.counts[k] > 0) s.requests.push_back({inst.types()[k].task, inst.types()[k].path, b.counts[k]});
    return s;
}

inline std::vector<Count> batch_counts(const Instance& inst, const TraceSlot& s) {
    std::vector<Count> r(inst.num_types(), 0);
    for (const auto& q : s.requests) {
        auto id = inst.type_id(q.task, q.path);
        if (!id) throw ValidationError("trace slot " + std::to_string(s.slot) + " names an unknown request type");
        r[*id] += q.count;
    }
    return r;
}

/// Replaces scheduler-derived capacities with the slot's explicit values (task < 0: all tasks).
inline void apply_overrides(const Instance& inst, const TraceSlot& s, std::vector<std::vector<double>>& l,
                            TaskId task = -1) {
    for (const auto& o : s.overrides) {
        if (task >= 0 && o.task != task) continue;
        auto id = inst.type_id(o.task, o.path);
        if (!id) throw ValidationError("override names an unknown request type");
        const auto& rk = inst.ranking(*id);
        if (!inst.topology().contains(o.node) || o.model < 0 || static_cast<std::size_t>(o.model) >= inst.num_models())
            throw ValidationError("override names an unknown node or model");
        int k = rk.rank_of[inst.index(o.node, o.model)];
        if (k < 0) throw ValidationError("override outside the request type's ranking");
        l[*id][static_cast<std::size_t>(k)] = o.l;
    }
}

/// Overrides for every ranking entry, making the slot's capacities fully explicit.
inline std::vector<CapacityOverride> full_overrides(const Instance& inst, const std::vector<std::vector<double>>& l) {
    std::vector<CapacityOverride> out;
    for (std::size_t rho = 0; rho < inst.num_types(); ++rho)
        for (std::size_t k = 0; k < inst.ranking(rho).size(); ++k) {
            const auto& e = inst.ranking(rho).entries[k];
            out.push_back({inst.types()[rho].task, inst.types()[rho].path, e.node, e.model, l[rho][k]});
        }
    return out;
}

}  // namespace infida
