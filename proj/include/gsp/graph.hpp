#pragma once
#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gsp/errors.hpp"
#include "gsp/matrix.hpp"

namespace gsp {

enum class TaskKind { Node, Graph };

inline std::string task_name(TaskKind t) { return t == TaskKind::Node ? "node" : "graph"; }

// One graph: binary symmetric adjacency without self-loops, row-per-node
// features, and either per-node labels (node task) or one graph label.
struct Graph {
    int num_nodes = 0;
    SparseMatrix adjacency;
    DenseMatrix features;
    std::vector<int> node_labels;  // empty unless node task
    int graph_label = -1;          // -1 unless graph task
};

struct Dataset {
    TaskKind task = TaskKind::Node;
    int classes = 0;
    std::vector<Graph> graphs;

    // Label of item i: node i (node task) or graph i (graph task).
    int label_of(int item) const {
        return task == TaskKind::Node ? graphs[0].node_labels[item]
                                      : graphs[item].graph_label;
    }

    int num_items() const {
        return task == TaskKind::Node ? graphs[0].num_nodes : int(graphs.size());
    }

    int feature_dim() const { return graphs.empty() ? 0 : graphs[0].features.cols; }
};

// Builds a binary symmetric adjacency from undirected edges stored once.
// Duplicate edges collapse; self-loops are rejected by callers before this.
inline SparseMatrix adjacency_from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::pair<int, int>> sym;
    sym.reserve(edges.size() * 2);
    for (auto [u, v] : edges) {
        sym.emplace_back(u, v);
        sym.emplace_back(v, u);
    }
    std::sort(sym.begin(), sym.end());
    sym.erase(std::unique(sym.begin(), sym.end()), sym.end());
    return SparseMatrix::from_sorted_triples(n, n, sym, std::vector<double>(sym.size(), 1.0));
}

// D^{-1/2} (A + I) D^{-1/2} with degrees taken after the self-loop insert,
// so an isolated node normalizes to a plain 1 on the diagonal.
inline SparseMatrix normalize_adjacency(const SparseMatrix& a) {
    check_dims(a.rows == a.cols, "normalize_adjacency: square input");
    int n = a.rows;
    std::vector<double> degree(n, 1.0);  // the self-loop
    for (int i = 0; i < n; ++i)
        for (int t = a.offsets[i]; t < a.offsets[i + 1]; ++t) {
            double v = a.values[t];
            if (v < 0.0) throw ValidationError("normalize_adjacency: negative entry");
            if (a.indices[t] == i)
                throw ValidationError("normalize_adjacency: self-loop in input");
            degree[i] += v;
        }
    SparseMatrix out;
    out.rows = n;
    out.cols = n;
    out.offsets.assign(n + 1, 0);
    out.indices.reserve(a.indices.size() + n);
    out.values.reserve(a.values.size() + n);
    for (int i = 0; i < n; ++i) {
        bool placed_diag = false;
        for (int t = a.offsets[i]; t < a.offsets[i + 1]; ++t) {
            int j = a.indices[t];
            if (!placed_diag && j > i) {
                out.indices.push_back(i);
                out.values.push_back(1.0 / degree[i]);
                placed_diag = true;
            }
            out.indices.push_back(j);
            out.values.push_back(a.values[t] / std::sqrt(degree[i] * degree[j]));
        }
        if (!placed_diag) {
            out.indices.push_back(i);
            out.values.push_back(1.0 / degree[i]);
        }
        out.offsets[i + 1] = int(out.indices.size());
    }
    return out;
}

// Degree one-hot features for datasets that ship none: column min(deg, cap-1).
inline DenseMatrix degree_onehot_features(const SparseMatrix& adjacency, int cap) {
    int n = adjacency.rows;
    DenseMatrix f(n, cap);
    for (int i = 0; i < n; ++i) {
        int deg = adjacency.offsets[i + 1] - adjacency.offsets[i];
        f.at(i, std::min(deg, cap - 1)) = 1.0;
    }
    return f;
}

// A whole dataset flattened into one normalized adjacency and one feature
// matrix. For graph tasks the graphs sit block-diagonal and segment_ids maps
// node row to graph index; for node tasks segment_ids stays empty.
struct Batch {
    SparseMatrix a_norm;
    DenseMatrix features;
    std::vector<int> segment_ids;
    int num_graphs = 0;
};

inline Batch make_batch(const Dataset& ds) {
    Batch b;
    b.num_graphs = int(ds.graphs.size());
    if (ds.task == TaskKind::Node) {
        const Graph& g = ds.graphs[0];
        b.a_norm = normalize_adjacency(g.adjacency);
        b.features = g.features;
        return b;
    }
    int total = 0;
    for (const Graph& g : ds.graphs) total += g.num_nodes;
    int d = ds.feature_dim();
    b.features = DenseMatrix(total, d);
    b.segment_ids.reserve(total);
    b.a_norm.rows = total;
    b.a_norm.cols = total;
    b.a_norm.offsets.assign(total + 1, 0);
    int base = 0;
    for (int gi = 0; gi < int(ds.graphs.size()); ++gi) {
        const Graph& g = ds.graphs[gi];
        SparseMatrix an = normalize_adjacency(g.adjacency);
        for (int i = 0; i < g.num_nodes; ++i) {
            for (int t = an.offsets[i]; t < an.offsets[i + 1]; ++t) {
                b.a_norm.indices.push_back(base + an.indices[t]);
                b.a_norm.values.push_back(an.values[t]);
            }
            b.a_norm.offsets[base + i + 1] = int(b.a_norm.indices.size());
            const double* src = g.features.row_ptr(i);
            double* dst = b.features.row_ptr(base + i);
            for (int j = 0; j < d; ++j) dst[j] = src[j];
            b.segment_ids.push_back(gi);
        }
        base += g.num_nodes;
    }
    return b;
}

}  // namespace gsp
