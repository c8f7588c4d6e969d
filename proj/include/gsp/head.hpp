#pragma once
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gsp/backbone.hpp"
#include "gsp/errors.hpp"
#include "gsp/graph.hpp"
#include "gsp/matrix.hpp"
#include "gsp/prompt.hpp"
#include "gsp/rng.hpp"

namespace gsp {

// Downstream trainables: an optional raw-feature adapter (frozen by default,
// it belongs to pretraining) and the linear classifier, which is always
// trained.
struct HeadParams {
    bool has_adapter = false;
    bool adapter_trainable = false;
    DenseMatrix adapter;     // d_raw x d_in
    DenseMatrix classifier;  // d_emb x classes

    static HeadParams init(int embed_dim, int classes, Rng& rng) {
        HeadParams h;
        h.classifier = DenseMatrix(embed_dim, classes);
        double bound = 1.0 / std::sqrt(double(embed_dim));
        for (double& v : h.classifier.values) v = rng.uniform(-bound, bound);
        return h;
    }
};

inline std::vector<int> labels_of(const Dataset& ds) {
    if (ds.task == TaskKind::Node) return ds.graphs[0].node_labels;
    std::vector<int> labels;
    labels.reserve(ds.graphs.size());
    for (const Graph& g : ds.graphs) labels.push_back(g.graph_label);
    return labels;
}

// Tape-free forward through adapter, prompt, backbone, optional readout,
// classifier. Pass at most one of pv/basis; neither means unprompted
// features (head-only finetuning).
inline DenseMatrix predict(const FrozenBackbone& backbone, const HeadParams& head,
                           const Batch& batch, const PromptVector* pv = nullptr,
                           const PromptBasis* basis = nullptr) {
    if (pv && basis) throw std::invalid_argument("predict: one prompt kind at a time");
    DenseMatrix x = batch.features;
    if (head.has_adapter) x = mm_nn(x, head.adapter);
    if (pv) x = gpf_prompt(x, *pv);
    if (basis) x = gpfplus_prompt(x, *basis);
    DenseMatrix h = backbone.forward(batch.a_norm, x);
    if (!batch.segment_ids.empty()) h = readout(h, batch.segment_ids, batch.num_graphs);
    return mm_nn(h, head.classifier);
}

// Fraction of ids whose argmax logit matches the label; equal logits go to
// the lowest class index.
inline double evaluate(const DenseMatrix& logits, const std::vector<int>& labels,
                       const std::vector<int>& ids) {
    if (ids.empty()) throw ValidationError("evaluate: empty id set");
    int hit = 0;
    for (int id : ids) {
        if (id < 0 || id >= logits.rows)
            throw ValidationError("evaluate: id out of range");
        const double* r = logits.row_ptr(id);
        int best = 0;
        for (int j = 1; j < logits.cols; ++j)
            if (r[j] > r[best]) best = j;
        if (best == labels[id]) ++hit;
    }
    return double(hit) / double(ids.size());
}

struct Aggregate {
    double mean = 0.0;
    double std_dev = 0.0;  // sample std, n-1
    int n = 0;
};

inline Aggregate aggregate_runs(const std::vector<double>& accuracies) {
    if (accuracies.empty()) throw ValidationError("aggregate_runs: no runs");
    Aggregate a;
    a.n = int(accuracies.size());
    double sum = 0.0;
    for (double v : accuracies) sum += v;
    a.mean = sum / a.n;
    if (a.n > 1) {
        double sq = 0.0;
        for (double v : accuracies) sq += (v - a.mean) * (v - a.mean);
        a.std_dev = std::sqrt(sq / (a.n - 1));
    }
    return a;
}

}  // namespace gsp
