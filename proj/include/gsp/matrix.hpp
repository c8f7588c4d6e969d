#pragma once
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gsp/errors.hpp"

namespace gsp {

// Row-major dense matrix of 64-bit floats. A length-d vector is carried as a
// 1 x d matrix. All reductions run in a fixed sequential order so repeated
// evaluations are bitwise identical.
struct DenseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;

    DenseMatrix() = default;
    DenseMatrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), values(std::size_t(r) * std::size_t(c), fill) {}
    DenseMatrix(int r, int c, std::vector<double> v)
        : rows(r), cols(c), values(std::move(v)) {
        if (values.size() != std::size_t(r) * std::size_t(c))
            throw std::invalid_argument("DenseMatrix: values size does not match rows*cols");
    }

    static DenseMatrix identity(int n) {
        DenseMatrix m(n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }

    double& at(int i, int j) { return values[std::size_t(i) * cols + j]; }
    double at(int i, int j) const { return values[std::size_t(i) * cols + j]; }
    const double* row_ptr(int i) const { return values.data() + std::size_t(i) * cols; }
    double* row_ptr(int i) { return values.data() + std::size_t(i) * cols; }

    bool same_shape(const DenseMatrix& o) const { return rows == o.rows && cols == o.cols; }
    bool is_scalar() const { return rows == 1 && cols == 1; }
    double scalar() const { return values[0]; }

    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline void check_dims(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("dimension mismatch: " + what);
}

// c = a * b
inline DenseMatrix mm_nn(const DenseMatrix& a, const DenseMatrix& b) {
    check_dims(a.cols == b.rows, "matmul " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                                     " * " + std::to_string(b.rows) + "x" + std::to_string(b.cols));
    DenseMatrix c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        double* ci = c.row_ptr(i);
        const double* ai = a.row_ptr(i);
        // k ascending keeps the per-element summation order fixed
        for (int k = 0; k < a.cols; ++k) {
            double aik = ai[k];
            if (aik == 0.0) continue;
            const double* bk = b.row_ptr(k);
            for (int j = 0; j < b.cols; ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

// c = a * b^T
inline DenseMatrix mm_nt(const DenseMatrix& a, const DenseMatrix& b) {
    check_dims(a.cols == b.cols, "matmul_nt inner dims");
    DenseMatrix c(a.rows, b.rows);
    for (int i = 0; i < a.rows; ++i) {
        const double* ai = a.row_ptr(i);
        double* ci = c.row_ptr(i);
        for (int j = 0; j < b.rows; ++j) {
            const double* bj = b.row_ptr(j);
            double acc = 0.0;
            for (int k = 0; k < a.cols; ++k) acc += ai[k] * bj[k];
            ci[j] = acc;
        }
    }
    return c;
}

// c = a^T * b
inline DenseMatrix mm_tn(const DenseMatrix& a, const DenseMatrix& b) {
    check_dims(a.rows == b.rows, "matmul_tn inner dims");
    DenseMatrix c(a.cols, b.cols);
    for (int k = 0; k < a.rows; ++k) {
        const double* ak = a.row_ptr(k);
        const double* bk = b.row_ptr(k);
        for (int i = 0; i < a.cols; ++i) {
            double aki = ak[i];
            if (aki == 0.0) continue;
            double* ci = c.row_ptr(i);
            for (int j = 0; j < b.cols; ++j) ci[j] += aki * bk[j];
        }
    }
    return c;
}

inline DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
    return t;
}

inline DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b) {
    check_dims(a.same_shape(b), "elementwise add");
    DenseMatrix c = a;
    for (std::size_t i = 0; i < c.values.size(); ++i) c.values[i] += b.values[i];
    return c;
}

inline void add_in_place(DenseMatrix& a, const DenseMatrix& b) {
    check_dims(a.same_shape(b), "elementwise add");
    for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] += b.values[i];
}

inline DenseMatrix scale(const DenseMatrix& a, double c) {
    DenseMatrix r = a;
    for (double& v : r.values) v *= c;
    return r;
}

// 1 x cols matrix of column sums
inline DenseMatrix col_sums(const DenseMatrix& a) {
    DenseMatrix s(1, a.cols);
    for (int i = 0; i < a.rows; ++i) {
        const double* ai = a.row_ptr(i);
        for (int j = 0; j < a.cols; ++j) s.values[j] += ai[j];
    }
    return s;
}

inline double frobenius_sq(const DenseMatrix& a) {
    double s = 0.0;
    for (double v : a.values) s += v * v;
    return s;
}

inline double max_abs(const DenseMatrix& a) {
    double m = 0.0;
    for (double v : a.values) m = std::max(m, std::abs(v));
    return m;
}

// Compressed sparse row matrix. Column indices are strictly increasing within
// each row; values are finite. Used for the (normalized) adjacency only.
struct SparseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<int> offsets;  // length rows+1, nondecreasing
    std::vector<int> indices;
    std::vector<double> values;

    SparseMatrix() : offsets{0} {}
    SparseMatrix(int r, int c) : rows(r), cols(c), offsets(std::size_t(r) + 1, 0) {}

    static SparseMatrix identity(int n) {
        SparseMatrix s(n, n);
        s.indices.resize(n);
        s.values.assign(n, 1.0);
        for (int i = 0; i < n; ++i) {
            s.offsets[i + 1] = i + 1;
            s.indices[i] = i;
        }
        return s;
    }

    // Build from (row, col, value) triples that are sorted by (row, col) and
    // contain no duplicates.
    static SparseMatrix from_sorted_triples(int rows, int cols,
                                            const std::vector<std::pair<int, int>>& rc,
                                            const std::vector<double>& vals) {
        SparseMatrix s(rows, cols);
        s.indices.reserve(rc.size());
        s.values.reserve(rc.size());
        int prev_r = -1, prev_c = -1;
        for (std::size_t t = 0; t < rc.size(); ++t) {
            auto [r, c] = rc[t];
            if (r < 0 || r >= rows || c < 0 || c >= cols)
                throw ValidationError("sparse triple out of range");
            if (r < prev_r || (r == prev_r && c <= prev_c))
                throw ValidationError("sparse triples not sorted/unique");
            while (prev_r < r) s.offsets[++prev_r] = int(t);
            prev_c = c;
            s.indices.push_back(c);
            s.values.push_back(vals[t]);
        }
        while (prev_r < rows) s.offsets[++prev_r] = int(rc.size());
        return s;
    }

    int nnz() const { return int(indices.size()); }

    DenseMatrix densify() const {
        DenseMatrix d(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int t = offsets[i]; t < offsets[i + 1]; ++t) d.at(i, indices[t]) = values[t];
        return d;
    }

    void validate() const {
        if (int(offsets.size()) != rows + 1) throw ValidationError("CSR: offsets length");
        if (offsets.front() != 0 || offsets.back() != nnz())
            throw ValidationError("CSR: offset bounds");
        for (int i = 0; i < rows; ++i) {
            if (offsets[i] > offsets[i + 1]) throw ValidationError("CSR: offsets decreasing");
            for (int t = offsets[i]; t < offsets[i + 1]; ++t) {
                if (indices[t] < 0 || indices[t] >= cols)
                    throw ValidationError("CSR: column index out of range");
                if (t > offsets[i] && indices[t] <= indices[t - 1])
                    throw ValidationError("CSR: column indices not strictly increasing");
                if (!std::isfinite(values[t])) throw ValidationError("CSR: non-finite value");
            }
        }
    }
};

// c = s * d  (sparse times dense)
inline DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& d) {
    check_dims(s.cols == d.rows, "spmm " + std::to_string(s.rows) + "x" + std::to_string(s.cols) +
                                     " * " + std::to_string(d.rows) + "x" + std::to_string(d.cols));
    DenseMatrix c(s.rows, d.cols);
    for (int i = 0; i < s.rows; ++i) {
        double* ci = c.row_ptr(i);
        for (int t = s.offsets[i]; t < s.offsets[i + 1]; ++t) {
            double v = s.values[t];
            const double* dr = d.row_ptr(s.indices[t]);
            for (int j = 0; j < d.cols; ++j) ci[j] += v * dr[j];
        }
    }
    return c;
}

// out += s^T * g, accumulated row by row of s (fixed order)
inline void spmm_t_acc(const SparseMatrix& s, const DenseMatrix& g, DenseMatrix& out) {
    check_dims(s.rows == g.rows && out.rows == s.cols && out.cols == g.cols, "spmm_t_acc");
    for (int i = 0; i < s.rows; ++i) {
        const double* gi = g.row_ptr(i);
        for (int t = s.offsets[i]; t < s.offsets[i + 1]; ++t) {
            double v = s.values[t];
            double* oj = out.row_ptr(s.indices[t]);
            for (int j = 0; j < g.cols; ++j) oj[j] += v * gi[j];
        }
    }
}

}  // namespace gsp
