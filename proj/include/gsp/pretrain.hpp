#pragma once
#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gsp/backbone.hpp"
#include "gsp/errors.hpp"
#include "gsp/graph.hpp"
#include "gsp/matrix.hpp"
#include "gsp/rng.hpp"
#include "gsp/tape.hpp"

namespace gsp {

struct PretrainConfig {
    int epochs = 100;
    double learning_rate = 1e-3;
    double weight_decay = 1e-5;
    int negative_ratio = 1;
    int hidden_dim = 64;
    int layers = 3;
    int adapter_dim = 0;  // >0 trains a raw->adapter_dim input map first
    std::uint64_t seed = 0;
};

struct PretrainResult {
    FrozenBackbone backbone;
    bool has_adapter = false;
    DenseMatrix adapter;
    std::vector<double> losses;  // one entry per epoch, measured pre-update
};

namespace detail {

inline bool has_edge(const SparseMatrix& a, int u, int v) {
    auto lo = a.indices.begin() + a.offsets[u];
    auto hi = a.indices.begin() + a.offsets[u + 1];
    return std::binary_search(lo, hi, v);
}

}  // namespace detail

// Full-batch gradient descent on sigmoid(h_u . h_v) edge scoring. Positives
// are every stored undirected edge; negatives are uniform non-edges redrawn
// each epoch. During this phase the GCN weights (and the adapter, when
// present) are the trainable leaves; they freeze on return.
inline PretrainResult pretrain(const Graph& graph, const PretrainConfig& cfg) {
    if (cfg.epochs < 1) throw ValidationError("pretrain: epochs must be >= 1");
    if (cfg.negative_ratio < 1) throw ValidationError("pretrain: negative ratio must be >= 1");
    if (cfg.learning_rate <= 0.0) throw ValidationError("pretrain: learning rate must be > 0");

    std::vector<int> pos;
    for (int u = 0; u < graph.num_nodes; ++u)
        for (int t = graph.adjacency.offsets[u]; t < graph.adjacency.offsets[u + 1]; ++t) {
            int v = graph.adjacency.indices[t];
            if (v > u) {
                pos.push_back(u);
                pos.push_back(v);
            }
        }
    if (pos.empty()) throw ValidationError("pretrain: graph has no edges");
    int num_pos = int(pos.size()) / 2;

    Rng rng(cfg.seed);
    int raw_dim = graph.features.cols;
    int in_dim = cfg.adapter_dim > 0 ? cfg.adapter_dim : raw_dim;
    bool use_adapter = cfg.adapter_dim > 0;

    DenseMatrix adapter;
    if (use_adapter) {
        adapter = DenseMatrix(raw_dim, in_dim);
        double bound = 1.0 / std::sqrt(double(raw_dim));
        for (double& v : adapter.values) v = rng.uniform(-bound, bound);
    }
    std::vector<DenseMatrix> w;
    {
        int d_in = in_dim;
        for (int l = 0; l < cfg.layers; ++l) {
            DenseMatrix wl(d_in, cfg.hidden_dim);
            double bound = 1.0 / std::sqrt(double(d_in));
            for (double& v : wl.values) v = rng.uniform(-bound, bound);
            w.push_back(std::move(wl));
            d_in = cfg.hidden_dim;
        }
    }

    SparseMatrix a_norm = normalize_adjacency(graph.adjacency);
    PretrainResult out;
    out.losses.reserve(cfg.epochs);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<int> pairs = pos;
        std::vector<double> targets(num_pos, 1.0);
        int want_neg = num_pos * cfg.negative_ratio;
        int drawn = 0;
        while (drawn < want_neg) {
            int u = int(rng.below(std::uint64_t(graph.num_nodes)));
            int v = int(rng.below(std::uint64_t(graph.num_nodes)));
            if (u == v || detail::has_edge(graph.adjacency, u, v)) continue;
            pairs.push_back(u);
            pairs.push_back(v);
            targets.push_back(0.0);
            ++drawn;
        }

        Tape tape;
        int x = tape.constant(graph.features);
        std::vector<int> leaves;
        if (use_adapter) {
            int a = tape.leaf(adapter);
            leaves.push_back(a);
            x = tape.matmul(x, a);
        }
        for (int l = 0; l < cfg.layers; ++l) {
            int wl = tape.leaf(w[l]);
            leaves.push_back(wl);
            x = tape.matmul(tape.spmm(a_norm, x), wl);
            if (l + 1 < cfg.layers) x = tape.relu(x);
        }
        int loss = tape.edge_pair_bce(x, std::move(pairs), std::move(targets));
        double loss_val = tape.value(loss).scalar();
        if (!std::isfinite(loss_val))
            throw DivergenceError(epoch, "pretrain: non-finite loss at epoch " +
                                             std::to_string(epoch));
        out.losses.push_back(loss_val);

        std::vector<DenseMatrix> grads = tape.backward(loss, leaves);
        std::size_t gi = 0;
        auto step = [&](DenseMatrix& param) {
            const DenseMatrix& g = grads[gi++];
            for (std::size_t t = 0; t < param.values.size(); ++t)
                param.values[t] -=
                    cfg.learning_rate * (g.values[t] + cfg.weight_decay * param.values[t]);
        };
        if (use_adapter) step(adapter);
        for (int l = 0; l < cfg.layers; ++l) step(w[l]);
    }

    out.backbone = FrozenBackbone::from_weights(std::move(w));
    out.has_adapter = use_adapter;
    out.adapter = std::move(adapter);
    return out;
}

}  // namespace gsp
