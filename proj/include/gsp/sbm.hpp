#pragma once
#include <string>
#include <utility>
#include <vector>

#include "gsp/errors.hpp"
#include "gsp/graph.hpp"
#include "gsp/rng.hpp"

namespace gsp {

// Stochastic block model with class-correlated Gaussian features. Block
// membership doubles as the node label. Only the first informative_dims
// feature columns carry class signal; the rest are pure noise, which gives
// an l1-penalized prompt something real to discard.
struct SbmConfig {
    std::vector<int> sizes;
    double p_in = 0.3;
    double p_out = 0.05;
    int feature_dim = 16;
    int informative_dims = -1;  // -1 means every dim carries signal
    double mean_scale = 1.0;
    double noise_std = 1.0;
    std::uint64_t seed = 0;
};

inline Dataset synthesize_sbm(const SbmConfig& cfg) {
    if (cfg.sizes.empty()) throw ValidationError("synthesize_sbm: no block sizes");
    for (int s : cfg.sizes)
        if (s < 1) throw ValidationError("synthesize_sbm: block size must be >= 1");
    if (cfg.p_in < 0.0 || cfg.p_in > 1.0 || cfg.p_out < 0.0 || cfg.p_out > 1.0)
        throw ValidationError("synthesize_sbm: probabilities must lie in [0,1]");
    if (cfg.feature_dim < 1) throw ValidationError("synthesize_sbm: feature_dim must be >= 1");
    int informative = cfg.informative_dims < 0 ? cfg.feature_dim
                                               : std::min(cfg.informative_dims, cfg.feature_dim);

    int blocks = int(cfg.sizes.size());
    int n = 0;
    std::vector<int> block_of;
    for (int b = 0; b < blocks; ++b) {
        n += cfg.sizes[b];
        block_of.insert(block_of.end(), cfg.sizes[b], b);
    }

    Rng rng(cfg.seed);
    DenseMatrix means(blocks, cfg.feature_dim);
    for (int b = 0; b < blocks; ++b)
        for (int j = 0; j < informative; ++j)
            means.at(b, j) = cfg.mean_scale * rng.gaussian();

    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double p = block_of[i] == block_of[j] ? cfg.p_in : cfg.p_out;
            if (rng.uniform() < p) edges.emplace_back(i, j);
        }

    Graph g;
    g.num_nodes = n;
    g.adjacency = adjacency_from_edges(n, edges);
    g.features = DenseMatrix(n, cfg.feature_dim);
    for (int i = 0; i < n; ++i) {
        const double* mu = means.row_ptr(block_of[i]);
        double* xi = g.features.row_ptr(i);
        for (int j = 0; j < cfg.feature_dim; ++j)
            xi[j] = mu[j] + cfg.noise_std * rng.gaussian();
    }
    g.node_labels = std::move(block_of);

    Dataset ds;
    ds.task = TaskKind::Node;
    ds.classes = blocks;
    ds.graphs.push_back(std::move(g));
    return ds;
}

inline Dataset synthesize_sbm(int blocks, const std::vector<int>& sizes, double p_in,
                              double p_out, int feature_dim, std::uint64_t seed) {
    if (blocks != int(sizes.size()))
        throw ValidationError("synthesize_sbm: blocks must equal sizes.size()");
    SbmConfig cfg;
    cfg.sizes = sizes;
    cfg.p_in = p_in;
    cfg.p_out = p_out;
    cfg.feature_dim = feature_dim;
    cfg.seed = seed;
    return synthesize_sbm(cfg);
}

}  // namespace gsp
