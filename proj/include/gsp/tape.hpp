#pragma once
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gsp/matrix.hpp"

namespace gsp {

// Reverse-mode differentiation over the closed op set needed by a prompted
// GCN pipeline. Nodes are appended in execution order (so the list is
// topologically sorted by construction) and each node caches the forward
// value its backward rule needs. Gradients are produced only for nodes
// created with leaf(); everything entered with constant() is frozen and
// asking for its gradient is an error.
//
// Single-threaded. Every reduction runs in a fixed sequential order, so two
// passes over identical inputs are bitwise identical.
class Tape {
public:
    enum class Op : std::uint8_t {
        Leaf,
        Constant,
        MatMul,
        SpMM,
        Relu,
        RowSoftmax,
        Add,
        AddRowBroadcast,
        Scale,
        Transpose,
        MeanPool,
        Sum,
        SoftmaxXent,
        EdgePairBce,
    };

    struct Node {
        Op op;
        int a = -1;
        int b = -1;
        bool needs_grad = false;
        double factor = 0.0;               // Scale
        const SparseMatrix* sp = nullptr;  // SpMM operand, not owned
        std::vector<int> ids;              // MeanPool: segment per row; SoftmaxXent: selected rows; EdgePairBce: u,v pairs flattened
        std::vector<int> labels;           // SoftmaxXent: class per selected row
        std::vector<double> targets;       // EdgePairBce: 0/1 targets
        int num_segments = 0;
        DenseMatrix value;                 // forward output
        DenseMatrix cache;                 // SoftmaxXent: softmax probs per selected row; EdgePairBce: per-pair scores
    };

    int leaf(DenseMatrix v) {
        require_finite(v, "leaf");
        Node n;
        n.op = Op::Leaf;
        n.needs_grad = true;
        n.value = std::move(v);
        return push(std::move(n));
    }

    int constant(DenseMatrix v) {
        require_finite(v, "constant");
        Node n;
        n.op = Op::Constant;
        n.value = std::move(v);
        return push(std::move(n));
    }

    int matmul(int a, int b) {
        Node n;
        n.op = Op::MatMul;
        n.a = a;
        n.b = b;
        n.needs_grad = grad(a) || grad(b);
        n.value = mm_nn(val(a), val(b));
        return push(std::move(n));
    }

    // s is captured by pointer and must outlive the tape; it is never a
    // gradient leaf.
    int spmm(const SparseMatrix& s, int d) {
        Node n;
        n.op = Op::SpMM;
        n.a = d;
        n.sp = &s;
        n.needs_grad = grad(d);
        n.value = gsp::spmm(s, val(d));
        return push(std::move(n));
    }

    int relu(int x) {
        Node n;
        n.op = Op::Relu;
        n.a = x;
        n.needs_grad = grad(x);
        n.value = val(x);
        for (double& v : n.value.values) v = v > 0.0 ? v : 0.0;
        return push(std::move(n));
    }

    // Rowwise softmax with row-max subtraction. Output rows sum to 1.
    int row_softmax(int x) {
        const DenseMatrix& in = val(x);
        Node n;
        n.op = Op::RowSoftmax;
        n.a = x;
        n.needs_grad = grad(x);
        n.value = DenseMatrix(in.rows, in.cols);
        for (int i = 0; i < in.rows; ++i) {
            const double* xi = in.row_ptr(i);
            double* yi = n.value.row_ptr(i);
            double m = xi[0];
            for (int j = 1; j < in.cols; ++j) m = std::max(m, xi[j]);
            double s = 0.0;
            for (int j = 0; j < in.cols; ++j) {
                yi[j] = std::exp(xi[j] - m);
                s += yi[j];
            }
            for (int j = 0; j < in.cols; ++j) yi[j] /= s;
        }
        return push(std::move(n));
    }

    int add(int a, int b) {
        Node n;
        n.op = Op::Add;
        n.a = a;
        n.b = b;
        n.needs_grad = grad(a) || grad(b);
        n.value = gsp::add(val(a), val(b));
        return push(std::move(n));
    }

    // x + 1 v^T for a 1 x cols row vector v
    int add_row_broadcast(int x, int v) {
        const DenseMatrix& xm = val(x);
        const DenseMatrix& vm = val(v);
        check_dims(vm.rows == 1 && vm.cols == xm.cols, "add_row_broadcast vector shape");
        Node n;
        n.op = Op::AddRowBroadcast;
        n.a = x;
        n.b = v;
        n.needs_grad = grad(x) || grad(v);
        n.value = xm;
        for (int i = 0; i < xm.rows; ++i) {
            double* r = n.value.row_ptr(i);
            for (int j = 0; j < xm.cols; ++j) r[j] += vm.values[j];
        }
        return push(std::move(n));
    }

    int scale(int x, double c) {
        if (!std::isfinite(c)) throw std::invalid_argument("scale: non-finite factor");
        Node n;
        n.op = Op::Scale;
        n.a = x;
        n.factor = c;
        n.needs_grad = grad(x);
        n.value = gsp::scale(val(x), c);
        return push(std::move(n));
    }

    int transpose(int x) {
        Node n;
        n.op = Op::Transpose;
        n.a = x;
        n.needs_grad = grad(x);
        n.value = gsp::transpose(val(x));
        return push(std::move(n));
    }

    // Row g of the output is the mean of input rows with segment id g.
    int mean_pool_segments(int x, std::vector<int> segment_ids, int num_segments) {
        const DenseMatrix& in = val(x);
        if (int(segment_ids.size()) != in.rows)
            throw std::invalid_argument("mean_pool_segments: one segment id per row required");
        std::vector<int> count(num_segments, 0);
        for (int id : segment_ids) {
            if (id < 0 || id >= num_segments)
                throw std::invalid_argument("mean_pool_segments: segment id out of range");
            ++count[id];
        }
        for (int g = 0; g < num_segments; ++g)
            if (count[g] == 0)
                throw std::invalid_argument("mean_pool_segments: empty segment " + std::to_string(g));
        Node n;
        n.op = Op::MeanPool;
        n.a = x;
        n.needs_grad = grad(x);
        n.ids = std::move(segment_ids);
        n.num_segments = num_segments;
        n.value = DenseMatrix(num_segments, in.cols);
        for (int i = 0; i < in.rows; ++i) {
            const double* xi = in.row_ptr(i);
            double* og = n.value.row_ptr(n.ids[i]);
            for (int j = 0; j < in.cols; ++j) og[j] += xi[j];
        }
        for (int g = 0; g < num_segments; ++g) {
            double* og = n.value.row_ptr(g);
            for (int j = 0; j < in.cols; ++j) og[j] /= count[g];
        }
        return push(std::move(n));
    }

    // scalar sum of all entries
    int sum(int x) {
        Node n;
        n.op = Op::Sum;
        n.a = x;
        n.needs_grad = grad(x);
        double s = 0.0;
        for (double v : val(x).values) s += v;
        n.value = DenseMatrix(1, 1, {s});
        return push(std::move(n));
    }

    // Mean over the selected rows of -log softmax(logits)[label]. labels[t]
    // is the class of rows[t].
    int softmax_cross_entropy(int logits, std::vector<int> rows, std::vector<int> labels) {
        const DenseMatrix& lg = val(logits);
        if (rows.size() != labels.size() || rows.empty())
            throw std::invalid_argument("softmax_cross_entropy: rows/labels mismatch or empty");
        Node n;
        n.op = Op::SoftmaxXent;
        n.a = logits;
        n.needs_grad = grad(logits);
        n.cache = DenseMatrix(int(rows.size()), lg.cols);
        double total = 0.0;
        for (int t = 0; t < int(rows.size()); ++t) {
            int r = rows[t];
            if (r < 0 || r >= lg.rows)
                throw std::invalid_argument("softmax_cross_entropy: row id out of range");
            if (labels[t] < 0 || labels[t] >= lg.cols)
                throw std::invalid_argument("softmax_cross_entropy: label out of range [0," +
                                            std::to_string(lg.cols) + ")");
            const double* xr = lg.row_ptr(r);
            double m = xr[0];
            for (int j = 1; j < lg.cols; ++j) m = std::max(m, xr[j]);
            double s = 0.0;
            double* pt = n.cache.row_ptr(t);
            for (int j = 0; j < lg.cols; ++j) {
                pt[j] = std::exp(xr[j] - m);
                s += pt[j];
            }
            for (int j = 0; j < lg.cols; ++j) pt[j] /= s;
            total += m + std::log(s) - xr[labels[t]];
        }
        n.ids = std::move(rows);
        n.labels = std::move(labels);
        n.value = DenseMatrix(1, 1, {total / double(n.ids.size())});
        return push(std::move(n));
    }

    // Mean binary cross-entropy of sigmoid(h_u . h_v) over node pairs.
    // pairs_uv holds u0,v0,u1,v1,...; targets are 0/1.
    int edge_pair_bce(int h, std::vector<int> pairs_uv, std::vector<double> targets) {
        const DenseMatrix& hm = val(h);
        if (pairs_uv.size() != 2 * targets.size() || targets.empty())
            throw std::invalid_argument("edge_pair_bce: pairs/targets mismatch or empty");
        Node n;
        n.op = Op::EdgePairBce;
        n.a = h;
        n.needs_grad = grad(h);
        int m = int(targets.size());
        n.cache = DenseMatrix(m, 1);
        double total = 0.0;
        for (int t = 0; t < m; ++t) {
            int u = pairs_uv[2 * t], v = pairs_uv[2 * t + 1];
            if (u < 0 || u >= hm.rows || v < 0 || v >= hm.rows)
                throw std::invalid_argument("edge_pair_bce: node id out of range");
            const double* hu = hm.row_ptr(u);
            const double* hv = hm.row_ptr(v);
            double dot = 0.0;
            for (int j = 0; j < hm.cols; ++j) dot += hu[j] * hv[j];
            double score = 1.0 / (1.0 + std::exp(-dot));
            n.cache.values[t] = score;
            // numerically stable -[y log s + (1-y) log(1-s)] from the logit
            double soft = dot > 0.0 ? dot + std::log1p(std::exp(-dot))
                                    : std::log1p(std::exp(dot));
            total += soft - targets[t] * dot;
        }
        n.ids = std::move(pairs_uv);
        n.targets = std::move(targets);
        n.value = DenseMatrix(1, 1, {total / double(m)});
        return push(std::move(n));
    }

    const DenseMatrix& value(int id) const { return nodes_.at(id).value; }
    const Node& node(int id) const { return nodes_.at(id); }
    int size() const { return int(nodes_.size()); }
    bool is_leaf(int id) const { return nodes_.at(id).op == Op::Leaf; }

    // Exact reverse-mode gradients of the scalar at loss_id with respect to
    // each requested leaf, in request order. A leaf the loss does not depend
    // on gets an all-zero gradient of the leaf's shape.
    std::vector<DenseMatrix> backward(int loss_id, const std::vector<int>& leaves) const {
        const Node& loss = nodes_.at(loss_id);
        if (!loss.value.is_scalar())
            throw std::invalid_argument("backward: loss must be a 1x1 scalar");
        for (int l : leaves) {
            const Node& n = nodes_.at(l);
            if (n.op == Op::Constant)
                throw std::invalid_argument(
                    "backward: gradient requested for a frozen constant (node " +
                    std::to_string(l) + ")");
            if (n.op != Op::Leaf)
                throw std::invalid_argument("backward: node " + std::to_string(l) +
                                            " is not a leaf");
        }

        std::vector<DenseMatrix> grads(nodes_.size());
        grads[loss_id] = DenseMatrix(1, 1, {1.0});
        for (int i = loss_id; i >= 0; --i) {
            const Node& n = nodes_[i];
            if (!n.needs_grad || grads[i].values.empty()) continue;
            const DenseMatrix& g = grads[i];
            switch (n.op) {
                case Op::Leaf:
                case Op::Constant:
                    break;
                case Op::MatMul:
                    if (grad(n.a)) acc(grads, n.a, mm_nt(g, nodes_[n.b].value));
                    if (grad(n.b)) acc(grads, n.b, mm_tn(nodes_[n.a].value, g));
                    break;
                case Op::SpMM:
                    if (grad(n.a)) {
                        ensure(grads, n.a);
                        spmm_t_acc(*n.sp, g, grads[n.a]);
                    }
                    break;
                case Op::Relu:
                    if (grad(n.a)) {
                        ensure(grads, n.a);
                        const DenseMatrix& x = nodes_[n.a].value;
                        for (std::size_t t = 0; t < x.values.size(); ++t)
                            if (x.values[t] > 0.0) grads[n.a].values[t] += g.values[t];
                    }
                    break;
                case Op::RowSoftmax:
                    if (grad(n.a)) {
                        ensure(grads, n.a);
                        const DenseMatrix& y = n.value;
                        for (int r = 0; r < y.rows; ++r) {
                            const double* yr = y.row_ptr(r);
                            const double* gr = g.row_ptr(r);
                            double dot = 0.0;
                            for (int j = 0; j < y.cols; ++j) dot += gr[j] * yr[j];
                            double* or_ = grads[n.a].row_ptr(r);
                            for (int j = 0; j < y.cols; ++j) or_[j] += yr[j] * (gr[j] - dot);
                        }
                    }
                    break;
                case Op::Add:
                    if (grad(n.a)) acc(grads, n.a, g);
                    if (grad(n.b)) acc(grads, n.b, g);
                    break;
                case Op::AddRowBroadcast:
                    if (grad(n.a)) acc(grads, n.a, g);
                    if (grad(n.b)) acc(grads, n.b, col_sums(g));
                    break;
                case Op::Scale:
                    if (grad(n.a)) acc(grads, n.a, gsp::scale(g, n.factor));
                    break;
                case Op::Transpose:
                    if (grad(n.a)) acc(grads, n.a, gsp::transpose(g));
                    break;
                case Op::MeanPool:
                    if (grad(n.a)) {
                        ensure(grads, n.a);
                        std::vector<int> count(n.num_segments, 0);
                        for (int id : n.ids) ++count[id];
                        DenseMatrix& gx = grads[n.a];
                        for (int r = 0; r < gx.rows; ++r) {
                            int s = n.ids[r];
                            const double* gs = g.row_ptr(s);
                            double* gr = gx.row_ptr(r);
                            for (int j = 0; j < gx.cols; ++j) gr[j] += gs[j] / count[s];
                        }
                    }
                    break;
                case Op::Sum:
                    if (grad(n.a)) {
                        ensure(grads, n.a);
                        double gs = g.scalar();
                        for (double& v : grads[n.a].values) v += gs;
                    }
                    break;
                case Op::SoftmaxXent:
                    if (grad(n.a)) {
                        ensure(grads, n.a);
                        double gs = g.scalar() / double(n.ids.size());
                        DenseMatrix& gx = grads[n.a];
                        for (int t = 0; t < int(n.ids.size()); ++t) {
                            const double* pt = n.cache.row_ptr(t);
                            double* gr = gx.row_ptr(n.ids[t]);
                            for (int j = 0; j < gx.cols; ++j) gr[j] += gs * pt[j];
                            gr[n.labels[t]] -= gs;
                        }
                    }
                    break;
                case Op::EdgePairBce:
                    if (grad(n.a)) {
                        ensure(grads, n.a);
                        const DenseMatrix& h = nodes_[n.a].value;
                        DenseMatrix& gh = grads[n.a];
                        double gs = g.scalar() / double(n.targets.size());
                        for (int t = 0; t < int(n.targets.size()); ++t) {
                            int u = n.ids[2 * t], v = n.ids[2 * t + 1];
                            double coeff = gs * (n.cache.values[t] - n.targets[t]);
                            const double* hu = h.row_ptr(u);
                            const double* hv = h.row_ptr(v);
                            double* gu = gh.row_ptr(u);
                            double* gv = gh.row_ptr(v);
                            for (int j = 0; j < h.cols; ++j) {
                                gu[j] += coeff * hv[j];
                                gv[j] += coeff * hu[j];
                            }
                        }
                    }
                    break;
            }
        }

        std::vector<DenseMatrix> out;
        out.reserve(leaves.size());
        for (int l : leaves) {
            if (grads[l].values.empty())
                out.emplace_back(nodes_[l].value.rows, nodes_[l].value.cols);
            else
                out.push_back(std::move(grads[l]));
        }
        return out;
    }

private:
    std::vector<Node> nodes_;

    int push(Node n) {
        nodes_.push_back(std::move(n));
        return int(nodes_.size()) - 1;
    }

    bool grad(int id) const { return nodes_[id].needs_grad; }
    const DenseMatrix& val(int id) const { return nodes_.at(id).value; }

    static void require_finite(const DenseMatrix& m, const char* what) {
        if (!m.all_finite())
            throw std::invalid_argument(std::string(what) + ": non-finite input");
    }

    void ensure(std::vector<DenseMatrix>& grads, int id) const {
        if (grads[id].values.empty())
            grads[id] = DenseMatrix(nodes_[id].value.rows, nodes_[id].value.cols);
    }

    void acc(std::vector<DenseMatrix>& grads, int id, const DenseMatrix& g) const {
        if (grads[id].values.empty())
            grads[id] = g;
        else
            add_in_place(grads[id], g);
    }
};

}  // namespace gsp
