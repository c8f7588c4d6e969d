#pragma once
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gsp/backbone.hpp"
#include "gsp/errors.hpp"
#include "gsp/graph.hpp"
#include "gsp/head.hpp"
#include "gsp/matrix.hpp"
#include "gsp/prompt.hpp"
#include "gsp/prox.hpp"
#include "gsp/split.hpp"
#include "gsp/tape.hpp"

namespace gsp {

enum class Method { HeadOnly, Gpf, GpfPlus, Gsfp, Gsmfp };

inline std::string method_name(Method m) {
    switch (m) {
        case Method::HeadOnly: return "ft-head-only";
        case Method::Gpf: return "gpf";
        case Method::GpfPlus: return "gpfplus";
        case Method::Gsfp: return "gsfp";
        case Method::Gsmfp: return "gsmfp";
    }
    return "?";
}

inline Method method_from_name(const std::string& s) {
    if (s == "ft-head-only") return Method::HeadOnly;
    if (s == "gpf") return Method::Gpf;
    if (s == "gpfplus") return Method::GpfPlus;
    if (s == "gsfp") return Method::Gsfp;
    if (s == "gsmfp") return Method::Gsmfp;
    throw ValidationError("unknown method '" + s +
                          "' (expected gpf|gpfplus|gsfp|gsmfp|ft-head-only)");
}

inline bool method_uses_lambda(Method m) { return m == Method::Gsfp || m == Method::Gsmfp; }
inline bool method_uses_basis(Method m) { return m == Method::GpfPlus || m == Method::Gsmfp; }
inline bool method_uses_vector(Method m) { return m == Method::Gpf || m == Method::Gsfp; }

// Direct shrinks by lambda itself after the eta-scaled gradient step;
// classical forward-backward splitting scales the threshold by eta too.
enum class ProxScaling { Direct, StepScaled };

struct TuneConfig {
    double lambda = 0.0;
    double eta = 1e-3;  // prompt step size
    int epochs = 200;
    double head_lr = 1e-3;
    double head_weight_decay = 5e-4;
    bool prompt_weight_decay = false;  // fold the head decay into prompt steps too
    int k = 10;                        // basis count for gpfplus/gsmfp
    std::uint64_t seed = 0;
    ProxScaling prox_scaling = ProxScaling::Direct;

    void validate() const {
        if (lambda < 0.0) throw ValidationError("tune: lambda must be >= 0");
        if (eta <= 0.0) throw ValidationError("tune: eta must be > 0");
        if (epochs < 1) throw ValidationError("tune: epochs must be >= 1");
        if (head_lr <= 0.0) throw ValidationError("tune: head learning rate must be > 0");
        if (head_weight_decay < 0.0) throw ValidationError("tune: weight decay must be >= 0");
        if (k < 1) throw ValidationError("tune: k must be >= 1");
    }
};

struct EpochRecord {
    double data_loss = 0.0;
    double reg_value = 0.0;
    double composite = 0.0;
    double val_accuracy = 0.0;
    int prompt_nnz = 0;
    int zero_rows = 0;
};

// Post-update measurements, one per epoch run; the pre-training objective
// sits in the initial_* fields.
struct LossTrace {
    double initial_data_loss = 0.0;
    double initial_reg = 0.0;
    double initial_composite = 0.0;
    std::vector<EpochRecord> epochs;
};

struct EpochSnapshot {
    int epoch = 0;
    DenseMatrix prompt;      // p (1 x d) or P (d x k); empty for head-only
    DenseMatrix attention;   // B; empty unless basis method
    DenseMatrix classifier;
    DenseMatrix adapter;     // empty unless the adapter is trainable
    double val_accuracy = 0.0;
};
using EpochObserver = std::function<void(const EpochSnapshot&)>;

struct TrainResult {
    Method method = Method::Gpf;
    PromptVector prompt;  // vector methods
    PromptBasis basis;    // basis methods
    HeadParams head;
    LossTrace trace;
    int best_epoch = 0;  // earliest epoch reaching the best validation accuracy
    double best_val_accuracy = 0.0;
    double test_accuracy = 0.0;
};

namespace detail {

inline void gd_step(DenseMatrix& param, const DenseMatrix& grad, double lr, double wd) {
    for (std::size_t t = 0; t < param.values.size(); ++t)
        param.values[t] -= lr * (grad.values[t] + wd * param.values[t]);
}

inline double xent_from_logits(const DenseMatrix& logits, const std::vector<int>& rows,
                               const std::vector<int>& labels_all) {
    double total = 0.0;
    for (int r : rows) {
        const double* x = logits.row_ptr(r);
        double m = x[0];
        for (int j = 1; j < logits.cols; ++j) m = std::max(m, x[j]);
        double s = 0.0;
        for (int j = 0; j < logits.cols; ++j) s += std::exp(x[j] - m);
        total += m + std::log(s) - x[labels_all[r]];
    }
    return total / double(rows.size());
}

}  // namespace detail

// One full tuning run of any method: per epoch, backprop the training
// cross-entropy through the frozen backbone, step the prompt, apply the
// proximal shrinkage when the method carries a penalty, then step the head
// parameters. Keeps the earliest snapshot that attains the best validation
// accuracy and scores it on the test split.
inline TrainResult tune_one(const Dataset& ds, const Batch& batch, const FewShotSplit& split,
                            const FrozenBackbone& backbone, Method method,
                            const TuneConfig& cfg, const DenseMatrix* adapter = nullptr,
                            bool adapter_trainable = false,
                            const EpochObserver& observer = {}) {
    cfg.validate();
    if (!method_uses_lambda(method) && cfg.lambda != 0.0)
        throw ValidationError("tune: lambda applies to gsfp/gsmfp only");

    std::vector<int> labels = labels_of(ds);
    std::vector<int> train_labels;
    train_labels.reserve(split.train_ids.size());
    for (int id : split.train_ids) train_labels.push_back(labels[id]);

    Rng rng(cfg.seed);
    int d_in = backbone.input_dim();
    HeadParams head = HeadParams::init(backbone.embed_dim(), ds.classes, rng);
    if (adapter) {
        head.has_adapter = true;
        head.adapter = *adapter;
        head.adapter_trainable = adapter_trainable;
    }
    PromptVector pv = PromptVector::zeros(d_in);
    PromptBasis basis;
    if (method_uses_basis(method)) basis = PromptBasis::init(d_in, cfg.k, rng);

    double tau = cfg.prox_scaling == ProxScaling::Direct ? cfg.lambda
                                                               : cfg.eta * cfg.lambda;
    auto reg_now = [&]() -> double {
        if (method == Method::Gsfp) return cfg.lambda * l1_norm(pv.p);
        if (method == Method::Gsmfp) return cfg.lambda * l21_norm(basis.P);
        return 0.0;
    };

    TrainResult best;
    best.method = method;
    best.best_val_accuracy = -1.0;
    LossTrace trace;
    trace.epochs.reserve(cfg.epochs);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Tape tape;
        int x = tape.constant(batch.features);
        int adapter_id = -1;
        if (head.has_adapter) {
            adapter_id = head.adapter_trainable ? tape.leaf(head.adapter)
                                                : tape.constant(head.adapter);
            x = tape.matmul(x, adapter_id);
        }
        int p_id = -1, P_id = -1, B_id = -1;
        if (method_uses_vector(method)) {
            p_id = tape.leaf(pv.p);
            x = tape.add_row_broadcast(x, p_id);
        } else if (method_uses_basis(method)) {
            P_id = tape.leaf(basis.P);
            B_id = tape.leaf(basis.B);
            int s = tape.row_softmax(tape.matmul(x, B_id));
            x = tape.add(x, tape.matmul(s, tape.transpose(P_id)));
        }
        int h = backbone.forward_tape(tape, batch.a_norm, x);
        if (!batch.segment_ids.empty())
            h = tape.mean_pool_segments(h, batch.segment_ids, batch.num_graphs);
        int cls_id = tape.leaf(head.classifier);
        int logits = tape.matmul(h, cls_id);
        int loss = tape.softmax_cross_entropy(logits, split.train_ids, train_labels);

        double data_loss = tape.value(loss).scalar();
        if (!std::isfinite(data_loss))
            throw DivergenceError(epoch, "tune: non-finite training loss at epoch " +
                                             std::to_string(epoch));
        if (epoch == 0) {
            trace.initial_data_loss = data_loss;
            trace.initial_reg = reg_now();
            trace.initial_composite = data_loss + trace.initial_reg;
        }

        std::vector<int> leaves;
        if (p_id >= 0) leaves.push_back(p_id);
        if (P_id >= 0) leaves.push_back(P_id);
        if (B_id >= 0) leaves.push_back(B_id);
        leaves.push_back(cls_id);
        if (adapter_id >= 0 && head.adapter_trainable) leaves.push_back(adapter_id);
        std::vector<DenseMatrix> grads = tape.backward(loss, leaves);

        double prompt_wd = cfg.prompt_weight_decay ? cfg.head_weight_decay : 0.0;
        std::size_t gi = 0;
        if (p_id >= 0) {
            detail::gd_step(pv.p, grads[gi++], cfg.eta, prompt_wd);
            if (method == Method::Gsfp) pv.p = prox_l1(pv.p, tau);
        }
        if (P_id >= 0) {
            detail::gd_step(basis.P, grads[gi++], cfg.eta, prompt_wd);
            if (method == Method::Gsmfp) basis.P = prox_l21(basis.P, tau);
        }
        if (B_id >= 0)
            detail::gd_step(basis.B, grads[gi++], cfg.head_lr, cfg.head_weight_decay);
        detail::gd_step(head.classifier, grads[gi++], cfg.head_lr, cfg.head_weight_decay);
        if (adapter_id >= 0 && head.adapter_trainable)
            detail::gd_step(head.adapter, grads[gi++], cfg.head_lr, cfg.head_weight_decay);

        const PromptVector* pvp = method_uses_vector(method) ? &pv : nullptr;
        const PromptBasis* bp = method_uses_basis(method) ? &basis : nullptr;
        DenseMatrix post_logits = predict(backbone, head, batch, pvp, bp);
        EpochRecord rec;
        rec.data_loss = detail::xent_from_logits(post_logits, split.train_ids, labels);
        rec.reg_value = reg_now();
        rec.composite = rec.data_loss + rec.reg_value;
        rec.val_accuracy = evaluate(post_logits, labels, split.val_ids);
        if (method_uses_vector(method)) {
            rec.prompt_nnz = nnz_count(pv.p);
        } else if (method_uses_basis(method)) {
            rec.prompt_nnz = nnz_count(basis.P);
            rec.zero_rows = zero_row_count(basis.P);
        }
        if (!std::isfinite(rec.composite))
            throw DivergenceError(epoch, "tune: non-finite objective after epoch " +
                                             std::to_string(epoch));
        trace.epochs.push_back(rec);

        if (observer) {
            EpochSnapshot snap;
            snap.epoch = epoch;
            if (method_uses_vector(method)) snap.prompt = pv.p;
            if (method_uses_basis(method)) {
                snap.prompt = basis.P;
                snap.attention = basis.B;
            }
            snap.classifier = head.classifier;
            if (head.adapter_trainable) snap.adapter = head.adapter;
            snap.val_accuracy = rec.val_accuracy;
            observer(snap);
        }

        if (rec.val_accuracy > best.best_val_accuracy) {
            best.best_val_accuracy = rec.val_accuracy;
            best.best_epoch = epoch;
            if (method_uses_vector(method)) best.prompt = pv;
            if (method_uses_basis(method)) best.basis = basis;
            best.head = head;
        }
    }

    best.trace = std::move(trace);
    const PromptVector* pvp = method_uses_vector(method) ? &best.prompt : nullptr;
    const PromptBasis* bp = method_uses_basis(method) ? &best.basis : nullptr;
    DenseMatrix logits = predict(backbone, best.head, batch, pvp, bp);
    best.test_accuracy = evaluate(logits, labels, split.test_ids);
    return best;
}

inline TrainResult train_gsfp(const Dataset& ds, const Batch& batch, const FewShotSplit& split,
                              const FrozenBackbone& backbone, const TuneConfig& cfg,
                              const DenseMatrix* adapter = nullptr) {
    return tune_one(ds, batch, split, backbone, Method::Gsfp, cfg, adapter);
}

inline TrainResult train_gsmfp(const Dataset& ds, const Batch& batch, const FewShotSplit& split,
                               const FrozenBackbone& backbone, const TuneConfig& cfg, int k,
                               const DenseMatrix* adapter = nullptr) {
    TuneConfig c = cfg;
    c.k = k;
    return tune_one(ds, batch, split, backbone, Method::Gsmfp, c, adapter);
}

}  // namespace gsp
