#pragma once
#include <cmath>
#include <stdexcept>

#include "gsp/matrix.hpp"

namespace gsp {

inline double l1_norm(const DenseMatrix& m) {
    double s = 0.0;
    for (double v : m.values) s += std::abs(v);
    return s;
}

// Sum of row 2-norms.
inline double l21_norm(const DenseMatrix& m) {
    double s = 0.0;
    for (int i = 0; i < m.rows; ++i) {
        const double* r = m.row_ptr(i);
        double sq = 0.0;
        for (int j = 0; j < m.cols; ++j) sq += r[j] * r[j];
        s += std::sqrt(sq);
    }
    return s;
}

inline double l1_regularizer(const DenseMatrix& p, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("l1_regularizer: negative lambda");
    return lambda * l1_norm(p);
}

inline double l21_regularizer(const DenseMatrix& P, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("l21_regularizer: negative lambda");
    return lambda * l21_norm(P);
}

// Soft thresholding: z_i = sign(y_i) max(|y_i| - tau, 0). Shrunk-away
// entries become exact +0.0.
inline DenseMatrix prox_l1(const DenseMatrix& y, double tau) {
    if (tau < 0.0) throw std::invalid_argument("prox_l1: negative tau");
    DenseMatrix z = y;
    if (tau == 0.0) return z;
    for (double& v : z.values) {
        double m = std::abs(v) - tau;
        v = m > 0.0 ? std::copysign(m, v) : 0.0;
    }
    return z;
}

// Rowwise group shrinkage: row i scales by (|Y_i| - tau)/|Y_i| when its norm
// exceeds tau, otherwise zeroes exactly (boundary norm == tau included).
inline DenseMatrix prox_l21(const DenseMatrix& y, double tau) {
    if (tau < 0.0) throw std::invalid_argument("prox_l21: negative tau");
    DenseMatrix z = y;
    if (tau == 0.0) return z;
    for (int i = 0; i < z.rows; ++i) {
        double* r = z.row_ptr(i);
        double sq = 0.0;
        for (int j = 0; j < z.cols; ++j) sq += r[j] * r[j];
        double norm = std::sqrt(sq);
        if (norm > tau) {
            double f = (norm - tau) / norm;
            for (int j = 0; j < z.cols; ++j) r[j] *= f;
        } else {
            for (int j = 0; j < z.cols; ++j) r[j] = 0.0;
        }
    }
    return z;
}

inline int nnz_count(const DenseMatrix& m, double threshold = 0.0) {
    int c = 0;
    for (double v : m.values)
        if (std::abs(v) > threshold) ++c;
    return c;
}

inline int zero_row_count(const DenseMatrix& m, double threshold = 0.0) {
    int c = 0;
    for (int i = 0; i < m.rows; ++i) {
        const double* r = m.row_ptr(i);
        bool zero = true;
        for (int j = 0; j < m.cols; ++j)
            if (std::abs(r[j]) > threshold) {
                zero = false;
                break;
            }
        if (zero) ++c;
    }
    return c;
}

inline int zero_col_count(const DenseMatrix& m, double threshold = 0.0) {
    int c = 0;
    for (int j = 0; j < m.cols; ++j) {
        bool zero = true;
        for (int i = 0; i < m.rows; ++i)
            if (std::abs(m.at(i, j)) > threshold) {
                zero = false;
                break;
            }
        if (zero) ++c;
    }
    return c;
}

}  // namespace gsp
