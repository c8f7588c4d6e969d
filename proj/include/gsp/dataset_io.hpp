#pragma once
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gsp/errors.hpp"
#include "gsp/graph.hpp"

namespace gsp {

using Json = nlohmann::ordered_json;

namespace detail {

inline Json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline const Json& field(const Json& obj, const std::string& key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ValidationError(where + ": missing field '" + key + "'");
    return *it;
}

inline int int_field(const Json& obj, const std::string& key, const std::string& where) {
    const Json& v = field(obj, key, where);
    if (!v.is_number_integer())
        throw ValidationError(where + "." + key + ": expected an integer");
    return v.get<int>();
}

}  // namespace detail

constexpr int kDefaultDegreeCap = 32;

// Reads the dataset JSON schema: {task, classes, graphs:[{numNodes, edges,
// features|null, nodeLabels|graphLabel}]}. Undirected edges are stored once
// and symmetrized here; duplicates collapse. Graphs without features get
// degree one-hot columns.
inline Dataset load_dataset(const std::string& path, int degree_cap = kDefaultDegreeCap) {
    Json root = detail::parse_file(path);
    if (!root.is_object()) throw ValidationError(path + ": top level must be an object");

    Dataset ds;
    std::string task = detail::field(root, "task", path).get<std::string>();
    if (task == "node")
        ds.task = TaskKind::Node;
    else if (task == "graph")
        ds.task = TaskKind::Graph;
    else
        throw ValidationError(path + ".task: expected 'node' or 'graph', got '" + task + "'");

    ds.classes = detail::int_field(root, "classes", path);
    if (ds.classes < 1) throw ValidationError(path + ".classes: must be >= 1");

    const Json& graphs = detail::field(root, "graphs", path);
    if (!graphs.is_array() || graphs.empty())
        throw ValidationError(path + ".graphs: expected a non-empty array");
    if (ds.task == TaskKind::Node && graphs.size() != 1)
        throw ValidationError(path + ".graphs: node task requires exactly one graph, got " +
                              std::to_string(graphs.size()));

    int feature_dim = -1;
    for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
        std::string where = path + ".graphs[" + std::to_string(gi) + "]";
        const Json& jg = graphs[gi];
        Graph g;
        g.num_nodes = detail::int_field(jg, "numNodes", where);
        if (g.num_nodes < 1) throw ValidationError(where + ".numNodes: must be >= 1");

        const Json& jedges = detail::field(jg, "edges", where);
        if (!jedges.is_array()) throw ValidationError(where + ".edges: expected an array");
        std::vector<std::pair<int, int>> edges;
        edges.reserve(jedges.size());
        for (std::size_t ei = 0; ei < jedges.size(); ++ei) {
            std::string ew = where + ".edges[" + std::to_string(ei) + "]";
            const Json& je = jedges[ei];
            if (!je.is_array() || je.size() != 2 || !je[0].is_number_integer() ||
                !je[1].is_number_integer())
                throw ValidationError(ew + ": expected [u, v] integer pair");
            int u = je[0].get<int>(), v = je[1].get<int>();
            if (u < 0 || u >= g.num_nodes || v < 0 || v >= g.num_nodes)
                throw ValidationError(ew + ": endpoint out of range [0," +
                                      std::to_string(g.num_nodes) + ")");
            if (u == v) throw ValidationError(ew + ": self-loop not allowed");
            edges.emplace_back(u, v);
        }
        g.adjacency = adjacency_from_edges(g.num_nodes, edges);

        auto jfeat = jg.find("features");
        if (jfeat != jg.end() && !jfeat->is_null()) {
            if (!jfeat->is_array() || int(jfeat->size()) != g.num_nodes)
                throw ValidationError(where + ".features: expected one row per node");
            for (std::size_t fi = 0; fi < jfeat->size(); ++fi) {
                const Json& row = (*jfeat)[fi];
                if (!row.is_array())
                    throw ValidationError(where + ".features[" + std::to_string(fi) +
                                          "]: expected an array");
                if (fi == 0) {
                    int d = int(row.size());
                    if (d < 1)
                        throw ValidationError(where + ".features[0]: empty feature row");
                    if (feature_dim >= 0 && d != feature_dim)
                        throw ValidationError(where + ".features: dim " + std::to_string(d) +
                                              " differs from earlier graphs (" +
                                              std::to_string(feature_dim) + ")");
                    feature_dim = d;
                    g.features = DenseMatrix(g.num_nodes, d);
                }
                if (int(row.size()) != feature_dim)
                    throw ValidationError(where + ".features[" + std::to_string(fi) +
                                          "]: ragged row, expected dim " +
                                          std::to_string(feature_dim));
                for (int j = 0; j < feature_dim; ++j) {
                    if (!row[j].is_number())
                        throw ValidationError(where + ".features[" + std::to_string(fi) +
                                              "][" + std::to_string(j) + "]: expected a number");
                    g.features.at(int(fi), j) = row[j].get<double>();
                }
            }
            if (!g.features.all_finite())
                throw ValidationError(where + ".features: non-finite value");
        }

        if (ds.task == TaskKind::Node) {
            const Json& jl = detail::field(jg, "nodeLabels", where);
            if (!jl.is_array() || int(jl.size()) != g.num_nodes)
                throw ValidationError(where + ".nodeLabels: expected one label per node");
            g.node_labels.reserve(g.num_nodes);
            for (std::size_t li = 0; li < jl.size(); ++li) {
                if (!jl[li].is_number_integer())
                    throw ValidationError(where + ".nodeLabels[" + std::to_string(li) +
                                          "]: expected an integer");
                int lab = jl[li].get<int>();
                if (lab < 0 || lab >= ds.classes)
                    throw ValidationError(where + ".nodeLabels[" + std::to_string(li) +
                                          "]: label " + std::to_string(lab) +
                                          " outside [0," + std::to_string(ds.classes) + ")");
                g.node_labels.push_back(lab);
            }
        } else {
            g.graph_label = detail::int_field(jg, "graphLabel", where);
            if (g.graph_label < 0 || g.graph_label >= ds.classes)
                throw ValidationError(where + ".graphLabel: label " +
                                      std::to_string(g.graph_label) + " outside [0," +
                                      std::to_string(ds.classes) + ")");
        }
        ds.graphs.push_back(std::move(g));
    }

    bool any_features = feature_dim > 0;
    for (std::size_t gi = 0; gi < ds.graphs.size(); ++gi) {
        Graph& g = ds.graphs[gi];
        if (g.features.values.empty()) {
            if (any_features)
                throw ValidationError(path + ".graphs[" + std::to_string(gi) +
                                      "].features: missing while other graphs have features");
            g.features = degree_onehot_features(g.adjacency, degree_cap);
        }
    }
    return ds;
}

// Writes the same schema load_dataset reads, with stable field order. Each
// undirected edge is emitted once with u < v.
inline void save_dataset(const Dataset& ds, const std::string& path) {
    Json root;
    root["task"] = task_name(ds.task);
    root["classes"] = ds.classes;
    Json jgraphs = Json::array();
    for (const Graph& g : ds.graphs) {
        Json jg;
        jg["numNodes"] = g.num_nodes;
        Json jedges = Json::array();
        for (int i = 0; i < g.num_nodes; ++i)
            for (int t = g.adjacency.offsets[i]; t < g.adjacency.offsets[i + 1]; ++t)
                if (g.adjacency.indices[t] > i)
                    jedges.push_back(Json::array({i, g.adjacency.indices[t]}));
        jg["edges"] = std::move(jedges);
        Json jfeat = Json::array();
        for (int i = 0; i < g.num_nodes; ++i) {
            Json row = Json::array();
            for (int j = 0; j < g.features.cols; ++j) row.push_back(g.features.at(i, j));
            jfeat.push_back(std::move(row));
        }
        jg["features"] = std::move(jfeat);
        if (ds.task == TaskKind::Node)
            jg["nodeLabels"] = g.node_labels;
        else
            jg["graphLabel"] = g.graph_label;
        jgraphs.push_back(std::move(jg));
    }
    root["graphs"] = std::move(jgraphs);
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open for writing");
    out << root.dump(2) << '\n';
}

// Optional CSV feature import: header "dim=<d>", then one comma-separated
// row per node. Replaces the features of a single-graph dataset.
inline DenseMatrix load_features_csv(const std::string& path, int expected_rows) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    std::string line;
    if (!std::getline(in, line) || line.rfind("dim=", 0) != 0)
        throw ParseError(path + ":1: expected header 'dim=<d>'");
    int d = 0;
    try {
        d = std::stoi(line.substr(4));
    } catch (...) {
        throw ParseError(path + ":1: bad dim value '" + line.substr(4) + "'");
    }
    if (d < 1) throw ValidationError(path + ":1: dim must be >= 1");
    DenseMatrix f(expected_rows, d);
    int r = 0;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (r >= expected_rows)
            throw ValidationError(path + ":" + std::to_string(lineno) + ": extra row, expected " +
                                  std::to_string(expected_rows));
        std::stringstream ss(line);
        std::string cell;
        int c = 0;
        while (std::getline(ss, cell, ',')) {
            if (c >= d)
                throw ValidationError(path + ":" + std::to_string(lineno) +
                                      ": extra column, expected dim " + std::to_string(d));
            try {
                f.at(r, c) = std::stod(cell);
            } catch (...) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": bad number '" + cell +
                                 "'");
            }
            ++c;
        }
        if (c != d)
            throw ValidationError(path + ":" + std::to_string(lineno) + ": got " +
                                  std::to_string(c) + " columns, expected " + std::to_string(d));
        ++r;
    }
    if (r != expected_rows)
        throw ValidationError(path + ": got " + std::to_string(r) + " rows, expected " +
                              std::to_string(expected_rows));
    if (!f.all_finite()) throw ValidationError(path + ": non-finite feature value");
    return f;
}

}  // namespace gsp
