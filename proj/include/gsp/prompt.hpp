#pragma once
#include <cmath>
#include <stdexcept>

#include "gsp/matrix.hpp"
#include "gsp/prox.hpp"
#include "gsp/rng.hpp"

namespace gsp {

// Shared additive prompt, stored 1 x d so it drops straight into the
// row-broadcast ops.
struct PromptVector {
    DenseMatrix p;  // 1 x d

    static PromptVector zeros(int d) { return {DenseMatrix(1, d)}; }
    int dim() const { return p.cols; }
};

// Basis prompts: every node receives an attention-weighted mix of the k
// rows of P^T. B projects features onto the k attention logits.
struct PromptBasis {
    DenseMatrix P;  // d x k
    DenseMatrix B;  // d x k
    int k = 0;

    static PromptBasis init(int d, int k, Rng& rng) {
        PromptBasis b;
        b.k = k;
        b.P = DenseMatrix(d, k);
        b.B = DenseMatrix(d, k);
        for (double& v : b.P.values) v = 1e-2 * rng.uniform(-1.0, 1.0);
        double bound = 1.0 / std::sqrt(double(d));
        for (double& v : b.B.values) v = rng.uniform(-bound, bound);
        return b;
    }
};

// X + 1 p^T
inline DenseMatrix gpf_prompt(const DenseMatrix& x, const PromptVector& pv) {
    check_dims(pv.p.cols == x.cols, "gpf_prompt: prompt dim vs feature dim");
    DenseMatrix out = x;
    for (int i = 0; i < x.rows; ++i) {
        double* r = out.row_ptr(i);
        for (int j = 0; j < x.cols; ++j) r[j] += pv.p.values[j];
    }
    return out;
}

// Row-stabilized softmax over X B: S_ij = exp(b_j . x_i) / sum_l exp(b_l . x_i)
inline DenseMatrix attention_scores(const DenseMatrix& x, const DenseMatrix& b) {
    check_dims(b.rows == x.cols, "attention_scores: projection dim vs feature dim");
    DenseMatrix s = mm_nn(x, b);
    for (int i = 0; i < s.rows; ++i) {
        double* r = s.row_ptr(i);
        double m = r[0];
        for (int j = 1; j < s.cols; ++j) m = std::max(m, r[j]);
        double sum = 0.0;
        for (int j = 0; j < s.cols; ++j) {
            r[j] = std::exp(r[j] - m);
            sum += r[j];
        }
        for (int j = 0; j < s.cols; ++j) r[j] /= sum;
    }
    return s;
}

// X + S P^T, computed as the same kernel sequence the training tape runs so
// the two paths agree bitwise.
inline DenseMatrix gpfplus_prompt(const DenseMatrix& x, const PromptBasis& basis) {
    DenseMatrix s = attention_scores(x, basis.B);
    return add(x, mm_nn(s, transpose(basis.P)));
}

struct SparsityReport {
    int total = 0;
    int nnz = 0;
    int zero_dims = 0;   // vector: zero entries; basis: zero rows of P
    int zero_rows = 0;   // basis only: zero rows of P
    int zero_cols = 0;   // basis only: zero columns of S P^T
    double threshold = 0.0;
};

inline SparsityReport sparsity_report(const PromptVector& pv, double threshold = 0.0) {
    if (threshold < 0.0) throw std::invalid_argument("sparsity_report: negative threshold");
    SparsityReport r;
    r.threshold = threshold;
    r.total = int(pv.p.values.size());
    r.nnz = nnz_count(pv.p, threshold);
    r.zero_dims = r.total - r.nnz;
    return r;
}

// The zero-column count is taken on the realized prompt increment S P^T, so
// it reflects what downstream features actually see.
inline SparsityReport sparsity_report(const PromptBasis& basis, const DenseMatrix& x,
                                      double threshold = 0.0) {
    if (threshold < 0.0) throw std::invalid_argument("sparsity_report: negative threshold");
    SparsityReport r;
    r.threshold = threshold;
    r.total = int(basis.P.values.size());
    r.nnz = nnz_count(basis.P, threshold);
    r.zero_rows = zero_row_count(basis.P, threshold);
    r.zero_dims = r.zero_rows;
    DenseMatrix inc = mm_nn(attention_scores(x, basis.B), transpose(basis.P));
    r.zero_cols = zero_col_count(inc, threshold);
    return r;
}

}  // namespace gsp
