#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "topology.hpp"

namespace infida {

using Count = std::int64_t;

struct HardwareProfile {
    double size_mb = 0.0;
    double fps = 0.0;
};

struct ModelVariant {
    ModelId id = 0;
    TaskId task = 0;
    std::string name;
    double accuracy = 0.0;  ///< in [0,1]
    int replica = 0;
    std::map<std::string, HardwareProfile> profiles;
};

/** \brief Per (node, model) data. */
struct CatalogEntry {
    double size_mb = 0.0;
    double delay_ms = 0.0;
    Count capacity = 0;  ///< requests per slot
    bool pinned = false;
};

/// Inference delay in ms for a throughput given in frames per second.
inline double delay_from_fps(double fps) {
    if (!(fps > 0.0) || !std::isfinite(fps)) throw ValidationError("fps must be positive");
    return 1000.0 / fps;
}

/// Requests per slot, floored.
inline Count capacity_from_fps(double fps, double slot_seconds) {
    if (!(fps > 0.0) || !std::isfinite(fps)) throw ValidationError("fps must be positive");
    if (!(slot_seconds > 0.0)) throw ValidationError("slot duration must be positive");
    return static_cast<Count>(std::floor(fps * slot_seconds));
}

class Catalog {
public:
    Catalog() = default;

    Catalog(std::vector<ModelVariant> models, std::size_t num_nodes, std::vector<CatalogEntry> entries)
        : models_(std::move(models)), num_nodes_(num_nodes), entries_(std::move(entries)) {
        validate();
    }

    std::size_t num_models() const noexcept { return models_.size(); }
    std::size_t num_nodes() const noexcept { return num_nodes_; }
    std::size_t num_tasks() const noexcept { return task_models_.size(); }

    const std::vector<ModelVariant>& models() const noexcept { return models_; }
    const ModelVariant& model(ModelId m) const { return models_.at(static_cast<std::size_t>(m)); }
    const std::vector<ModelId>& task_models(TaskId i) const {
        if (i < 0 || static_cast<std::size_t>(i) >= task_models_.size())
            throw ValidationError("unknown task " + std::to_string(i));
        return task_models_[static_cast<std::size_t>(i)];
    }
    bool has_task(TaskId i) const noexcept { return i >= 0 && static_cast<std::size_t>(i) < task_models_.size(); }

    std::size_t index(NodeId v, ModelId m) const noexcept {
        return static_cast<std::size_t>(v) * models_.size() + static_cast<std::size_t>(m);
    }
    const CatalogEntry& entry(NodeId v, ModelId m) const { return entries_.at(index(v, m)); }
    const CatalogEntry& entry(std::size_t idx) const { return entries_.at(idx); }
    std::size_t num_entries() const noexcept { return entries_.size(); }

    std::vector<ModelId> pinned_at(NodeId v) const {
        std::vector<ModelId> out;
        for (std::size_t m = 0; m < models_.size(); ++m)
            if (entry(v, static_cast<ModelId>(m)).pinned) out.push_back(static_cast<ModelId>(m));
        return out;
    }

    bool is_repository_for(NodeId v, TaskId i) const {
        for (ModelId m : task_models(i))
            if (entry(v, m).pinned) return true;
        return false;
    }

    double total_size(NodeId v) const {
        double s = 0.0;
        for (std::size_t m = 0; m < models_.size(); ++m) s += entry(v, static_cast<ModelId>(m)).size_mb;
        return s;
    }

    double pinned_size(NodeId v) const {
        double s = 0.0;
        for (std::size_t m = 0; m < models_.size(); ++m) {
            const auto& e = entry(v, static_cast<ModelId>(m));
            if (e.pinned) s += e.size_mb;
        }
        return s;
    }

    /// The pinned allocation as a dense 0/1 vector.
    std::vector<double> omega() const {
        std::vector<double> w(entries_.size(), 0.0);
        for (std::size_t k = 0; k < entries_.size(); ++k) w[k] = entries_[k].pinned ? 1.0 : 0.0;
        return w;
    }

private:
    void validate() {
        if (models_.empty()) throw ValidationError("empty catalog");
        if (entries_.size() != models_.size() * num_nodes_) throw ValidationError("catalog entry table has wrong size");
        TaskId max_task = -1;
        for (std::size_t m = 0; m < models_.size(); ++m) {
            const auto& mv = models_[m];
            if (mv.id != static_cast<ModelId>(m)) throw ValidationError("model ids must be dense and ordered");
            if (mv.task < 0) throw ValidationError("negative task id");
            if (!(mv.accuracy >= 0.0 && mv.accuracy <= 1.0)) throw ValidationError("accuracy outside [0,1]");
            max_task = std::max(max_task, mv.task);
        }
        task_models_.assign(static_cast<std::size_t>(max_task) + 1, {});
        for (const auto& mv : models_) task_models_[static_cast<std::size_t>(mv.task)].push_back(mv.id);
        for (std::size_t i = 0; i < task_models_.size(); ++i)
            if (task_models_[i].empty()) throw ValidationError("task " + std::to_string(i) + " has no models");
        for (const auto& e : entries_) {
            if (!(e.size_mb > 0.0)) throw ValidationError("model sizes must be positive");
            if (!(e.delay_ms >= 0.0)) throw ValidationError("inference delay must be non-negative");
            if (e.capacity < 0) throw ValidationError("negative capacity");
            if (e.pinned && e.capacity < 1) throw ValidationError("repository entry with zero capacity");
        }
    }

    std::vector<ModelVariant> models_;
    std::size_t num_nodes_ = 0;
    std::vector<CatalogEntry> entries_;
    std::vector<std::vector<ModelId>> task_models_;
};

// Table import ------------------------------------------------------------

struct TableRow {
    std::string name;
    double map = 0.0;  ///< mean average precision, 0..100
    double memory_mb = 0.0;
    std::vector<double> fps;  ///< one value per hardware column
};

struct CatalogTable {
    std::vector<std::string> hardware;
    std::vector<TableRow> rows;
};

/// yolov4 variants profiled on two GPUs.
inline CatalogTable builtin_table() {
    CatalogTable t;
    t.hardware = {"titan_rtx", "gtx_980"};
    t.rows = {
        {"608p", 65.7, 1577, {41.7, 14.2}},
        {"512p", 64.9, 1185, {55.5, 18.9}},
        {"416p", 62.8, 1009, {73.8, 25.1}},
        {"320p", 57.3, 805, {100, 34.1}},
        {"3.99pruned", 55.1, 395, {209, 71.0}},
        {"8.09pruned", 51.4, 195, {329, 112}},
        {"10.10pruned", 50.9, 156, {371, 126}},
        {"14.02pruned", 49.0, 112, {488, 166}},
        {"tiny-416p", 38.7, 187, {888, 302}},
        {"tiny-288p", 34.4, 160, {1272, 433}},
    };
    return t;
}

/// CSV with columns name, mAP, MB, then one fps column per hardware class.
/// A first line starting with "name" is treated as the header and supplies hardware names
/// (columns 4..), unless `hardware` is non-empty.
inline CatalogTable parse_catalog_csv(std::istream& in, std::vector<std::string> hardware = {}) {
    CatalogTable t;
    std::string line;
    std::size_t lineno = 0;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            auto b = cell.find_first_not_of(" \t\r");
            auto e = cell.find_last_not_of(" \t\r");
            out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
        }
        return out;
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto cells = split(line);
        if (cells.empty()) continue;
        if (cells[0] == "name") {
            if (hardware.empty()) hardware.assign(cells.begin() + std::min<std::ptrdiff_t>(3, cells.size()), cells.end());
            continue;
        }
        if (hardware.empty()) throw ParseError("no hardware columns declared", lineno);
        if (cells.size() != 3 + hardware.size())
            throw ParseError("expected " + std::to_string(3 + hardware.size()) + " columns", lineno);
        TableRow row;
        row.name = cells[0];
        try {
            row.map = std::stod(cells[1]);
            row.memory_mb = std::stod(cells[2]);
            for (std::size_t h = 0; h < hardware.size(); ++h) row.fps.push_back(std::stod(cells[3 + h]));
        } catch (const std::exception&) {
            throw ParseError("non-numeric value", lineno);
        }
        t.rows.push_back(row);
    }
    t.hardware = hardware;
    if (t.rows.empty()) throw ParseError("catalog table has no rows", lineno);
    return t;
}

struct CatalogOptions {
    int tasks = 20;
    int duplicates = 3;
    double slot_seconds = 60.0;
    double alpha = 1.0;                      ///< on the 0..100 inaccuracy scale
    std::optional<Count> repository_capacity;  ///< overrides L on pinned entries
    bool pin_all_replicas = true;
};

/**
 * \brief Expands a table into a catalog: every task gets every row, `duplicates` times.
 * Each repository node pins, per task, the row minimising d + alpha * 100 * (1 - a)
 * on its own hardware.
 */
inline Catalog load_catalog(const CatalogTable& table, const std::vector<std::string>& node_hardware,
                            const std::vector<NodeId>& repository_nodes, const CatalogOptions& opt) {
    if (opt.tasks < 1) throw ValidationError("need at least one task");
    if (opt.duplicates < 1) throw ValidationError("need at least one replica per model");
    if (table.rows.empty()) throw ValidationError("empty catalog table");
    std::map<std::string, std::size_t> hw_col;
    for (std::size_t h = 0; h < table.hardware.size(); ++h) hw_col[table.hardware[h]] = h;
    for (const auto& row : table.rows) {
        if (row.fps.size() != table.hardware.size()) throw ValidationError("row " + row.name + " has wrong fps count");
        for (double f : row.fps)
            if (!(f > 0.0)) throw ValidationError("non-positive fps in row " + row.name);
        if (!(row.memory_mb > 0.0)) throw ValidationError("non-positive memory in row " + row.name);
        if (!(row.map >= 0.0 && row.map <= 100.0)) throw ValidationError("mAP outside 0..100 in row " + row.name);
    }
    std::vector<std::size_t> col(node_hardware.size());
    for (std::size_t v = 0; v < node_hardware.size(); ++v) {
        auto it = hw_col.find(node_hardware[v]);
        if (it == hw_col.end()) throw ValidationError("missing hardware class '" + node_hardware[v] + "'");
        col[v] = it->second;
    }

    std::vector<ModelVariant> models;
    std::vector<std::size_t> row_of;
    for (int i = 0; i < opt.tasks; ++i)
        for (std::size_t r = 0; r < table.rows.size(); ++r)
            for (int d = 0; d < opt.duplicates; ++d) {
                const auto& row = table.rows[r];
                ModelVariant mv;
                mv.id = static_cast<ModelId>(models.size());
                mv.task = i;
                mv.name = row.name;
                mv.accuracy = row.map / 100.0;
                mv.replica = d;
                for (std::size_t h = 0; h < table.hardware.size(); ++h)
                    mv.profiles[table.hardware[h]] = {row.memory_mb, row.fps[h]};
                models.push_back(mv);
                row_of.push_back(r);
            }

    const std::size_t M = models.size();
    const std::size_t V = node_hardware.size();
    std::vector<CatalogEntry> entries(V * M);
    for (std::size_t v = 0; v < V; ++v)
        for (std::size_t m = 0; m < M; ++m) {
            const auto& row = table.rows[row_of[m]];
            double fps = row.fps[col[v]];
            entries[v * M + m] = {row.memory_mb, delay_from_fps(fps), capacity_from_fps(fps, opt.slot_seconds), false};
        }

    for (NodeId v : repository_nodes) {
        if (v < 0 || static_cast<std::size_t>(v) >= V) throw ValidationError("repository node out of range");
        std::size_t best = 0;
        double best_cost = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            double c = delay_from_fps(table.rows[r].fps[col[static_cast<std::size_t>(v)]]) +
                       opt.alpha * (100.0 - table.rows[r].map);
            if (c < best_cost) {
                best_cost = c;
                best = r;
            }
        }
        for (std::size_t m = 0; m < M; ++m) {
            if (row_of[m] != best) continue;
            if (!opt.pin_all_replicas && models[m].replica != 0) continue;
            auto& e = entries[static_cast<std::size_t>(v) * M + m];
            e.pinned = true;
            if (opt.repository_capacity) e.capacity = *opt.repository_capacity;
        }
    }
    return Catalog(std::move(models), V, std::move(entries));
}

/// Repository capacity constraint for declared per-task maximum batches.
inline bool check_repo_feasibility(const Catalog& catalog, const std::vector<Count>& max_batch_per_task) {
    for (std::size_t i = 0; i < catalog.num_tasks(); ++i) {
        Count demand = i < max_batch_per_task.size() ? max_batch_per_task[i] : 0;
        Count cap = 0;
        for (std::size_t v = 0; v < catalog.num_nodes(); ++v)
            for (ModelId m : catalog.task_models(static_cast<TaskId>(i))) {
                const auto& e = catalog.entry(static_cast<NodeId>(v), m);
                if (e.pinned) cap += e.capacity;
            }
        if (cap == 0 || demand > cap) return false;
    }
    return true;
}

}  // namespace infida
