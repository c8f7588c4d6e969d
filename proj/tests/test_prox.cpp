#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gsp/prox.hpp"

#include "test_util.hpp"

using namespace gsp;
using namespace testutil;

namespace {

double l1_objective(const DenseMatrix& z, const DenseMatrix& y, double tau) {
    double q = 0.0;
    for (std::size_t t = 0; t < z.values.size(); ++t) {
        double d = z.values[t] - y.values[t];
        q += 0.5 * d * d;
    }
    return q + tau * l1_norm(z);
}

double l21_objective(const DenseMatrix& z, const DenseMatrix& y, double tau) {
    double q = 0.0;
    for (std::size_t t = 0; t < z.values.size(); ++t) {
        double d = z.values[t] - y.values[t];
        q += 0.5 * d * d;
    }
    return q + tau * l21_norm(z);
}

}  // namespace

TEST_CASE("soft thresholding worked example") {
    DenseMatrix y(1, 3, {2.0, -0.3, 0.7});
    DenseMatrix z = prox_l1(y, 0.5);
    REQUIRE(z.at(0, 0) == 1.5);
    REQUIRE(z.at(0, 1) == 0.0);
    REQUIRE(std::abs(z.at(0, 2) - 0.2) <= 1e-15);
}

TEST_CASE("zero threshold is the bitwise identity") {
    Rng rng(1);
    DenseMatrix y = random_matrix(rng, 4, 6, -3.0, 3.0);
    REQUIRE(bitwise_equal(prox_l1(y, 0.0), y));
    REQUIRE(bitwise_equal(prox_l21(y, 0.0), y));
}

TEST_CASE("negative threshold is rejected") {
    DenseMatrix y(1, 2, {1.0, 2.0});
    REQUIRE_THROWS_AS(prox_l1(y, -0.1), std::invalid_argument);
    REQUIRE_THROWS_AS(prox_l21(y, -0.1), std::invalid_argument);
    REQUIRE_THROWS_AS(l1_regularizer(y, -1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(l21_regularizer(y, -1.0), std::invalid_argument);
}

TEST_CASE("shrunk entries are exact zeros with signs preserved elsewhere") {
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        DenseMatrix y = random_matrix(rng, 1, 10, -2.0, 2.0);
        double tau = rng.uniform(0.0, 2.0);
        DenseMatrix z = prox_l1(y, tau);
        for (int j = 0; j < 10; ++j) {
            double yi = y.at(0, j), zi = z.at(0, j);
            if (std::abs(yi) <= tau) {
                REQUIRE(zi == 0.0);
            } else {
                REQUIRE(std::copysign(1.0, zi) == std::copysign(1.0, yi));
                REQUIRE(std::abs(std::abs(zi) - (std::abs(yi) - tau)) <= 1e-15);
            }
        }
    }
}

TEST_CASE("soft thresholding minimizes its proximal objective") {
    Rng rng(3);
    for (int instance = 0; instance < 100; ++instance) {
        DenseMatrix y = random_matrix(rng, 1, 8, -3.0, 3.0);
        double tau = rng.uniform(0.0, 2.5);
        DenseMatrix z = prox_l1(y, tau);
        double best = l1_objective(z, y, tau);
        for (int c = 0; c < 10000; ++c) {
            DenseMatrix cand = random_matrix(rng, 1, 8, -4.0, 4.0);
            REQUIRE(best <= l1_objective(cand, y, tau) + 1e-12);
        }
    }
}

TEST_CASE("row shrinkage worked example") {
    DenseMatrix y(1, 2, {3.0, 4.0});
    DenseMatrix z = prox_l21(y, 1.0);
    REQUIRE(std::abs(z.at(0, 0) - 2.4) <= 1e-12);
    REQUIRE(std::abs(z.at(0, 1) - 3.2) <= 1e-12);
}

TEST_CASE("a row whose norm equals the threshold zeroes out") {
    DenseMatrix y(2, 2, {3.0, 4.0, 0.6, 0.8});
    DenseMatrix z = prox_l21(y, 5.0);
    for (double v : z.values) REQUIRE(v == 0.0);
    // just above the boundary the row survives
    DenseMatrix z2 = prox_l21(y, 4.999999);
    REQUIRE(std::abs(z2.at(0, 0)) > 0.0);
}

TEST_CASE("row shrinkage minimizes its proximal objective") {
    Rng rng(4);
    for (int instance = 0; instance < 100; ++instance) {
        DenseMatrix y = random_matrix(rng, 4, 3, -2.0, 2.0);
        double tau = rng.uniform(0.0, 2.0);
        DenseMatrix z = prox_l21(y, tau);
        double best = l21_objective(z, y, tau);
        for (int c = 0; c < 10000; ++c) {
            DenseMatrix cand = random_matrix(rng, 4, 3, -3.0, 3.0);
            REQUIRE(best <= l21_objective(cand, y, tau) + 1e-12);
        }
    }
}

TEST_CASE("rows keep their direction and lose exactly tau of norm") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        DenseMatrix y = random_matrix(rng, 5, 4, -2.0, 2.0);
        double tau = rng.uniform(0.0, 1.5);
        DenseMatrix z = prox_l21(y, tau);
        for (int i = 0; i < 5; ++i) {
            double ny = 0.0, nz = 0.0, dot = 0.0;
            for (int j = 0; j < 4; ++j) {
                ny += y.at(i, j) * y.at(i, j);
                nz += z.at(i, j) * z.at(i, j);
                dot += y.at(i, j) * z.at(i, j);
            }
            ny = std::sqrt(ny);
            nz = std::sqrt(nz);
            if (ny <= tau) {
                REQUIRE(nz == 0.0);
            } else {
                REQUIRE(std::abs(nz - (ny - tau)) <= 1e-12);
                REQUIRE(dot >= 0.0);
                // colinearity: dot == |y| |z|
                REQUIRE(std::abs(dot - ny * nz) <= 1e-10);
            }
        }
    }
}

TEST_CASE("thresholding twice equals one doubled threshold") {
    Rng rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        DenseMatrix y = random_matrix(rng, 1, 12, -3.0, 3.0);
        double tau = rng.uniform(0.0, 1.0);
        DenseMatrix twice = prox_l1(prox_l1(y, tau), tau);
        DenseMatrix once = prox_l1(y, 2.0 * tau);
        REQUIRE(max_abs_diff(twice, once) <= 1e-12);
        for (std::size_t t = 0; t < twice.values.size(); ++t)
            REQUIRE((twice.values[t] == 0.0) == (once.values[t] == 0.0));
    }
}

TEST_CASE("soft thresholding never expands distances") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        DenseMatrix a = random_matrix(rng, 1, 10, -3.0, 3.0);
        DenseMatrix b = random_matrix(rng, 1, 10, -3.0, 3.0);
        double tau = rng.uniform(0.0, 2.0);
        DenseMatrix pa = prox_l1(a, tau);
        DenseMatrix pb = prox_l1(b, tau);
        double din = 0.0, dout = 0.0;
        for (int j = 0; j < 10; ++j) {
            double di = a.at(0, j) - b.at(0, j);
            double dd = pa.at(0, j) - pb.at(0, j);
            din += di * di;
            dout += dd * dd;
        }
        REQUIRE(std::sqrt(dout) <= std::sqrt(din) + 1e-12);

        DenseMatrix ma = random_matrix(rng, 3, 4, -3.0, 3.0);
        DenseMatrix mb = random_matrix(rng, 3, 4, -3.0, 3.0);
        DenseMatrix qa = prox_l21(ma, tau);
        DenseMatrix qb = prox_l21(mb, tau);
        double min2 = 0.0, mout2 = 0.0;
        for (std::size_t t = 0; t < ma.values.size(); ++t) {
            double di = ma.values[t] - mb.values[t];
            double dd = qa.values[t] - qb.values[t];
            min2 += di * di;
            mout2 += dd * dd;
        }
        REQUIRE(std::sqrt(mout2) <= std::sqrt(min2) + 1e-12);
    }
}

TEST_CASE("larger thresholds never create new nonzeros") {
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        DenseMatrix y = random_matrix(rng, 6, 4, -2.0, 2.0);
        double t1 = rng.uniform(0.0, 1.0);
        double t2 = t1 + rng.uniform(0.0, 1.0);
        REQUIRE(nnz_count(prox_l1(y, t1)) >= nnz_count(prox_l1(y, t2)));
        int live1 = y.rows - zero_row_count(prox_l21(y, t1));
        int live2 = y.rows - zero_row_count(prox_l21(y, t2));
        REQUIRE(live1 >= live2);
    }
}

TEST_CASE("regularizers evaluate their norms times lambda") {
    DenseMatrix zero(2, 3);
    REQUIRE(l1_regularizer(zero, 3.0) == 0.0);
    REQUIRE(l21_regularizer(zero, 3.0) == 0.0);

    DenseMatrix p(1, 2, {1.0, -2.0});
    REQUIRE(l1_regularizer(p, 2.0) == 6.0);

    DenseMatrix P(2, 2, {3.0, 4.0, 0.0, 0.0});
    REQUIRE(l21_regularizer(P, 1.0) == 5.0);
    REQUIRE(l21_norm(P) == 5.0);
    REQUIRE(l1_norm(P) == 7.0);
}

TEST_CASE("zero counters agree with a direct scan") {
    DenseMatrix m(3, 2, {0.0, 0.0, 1.0, 0.0, 0.0, -0.5});
    REQUIRE(nnz_count(m) == 2);
    REQUIRE(zero_row_count(m) == 1);
    REQUIRE(zero_col_count(m) == 0);
    DenseMatrix z(2, 3);
    REQUIRE(zero_col_count(z) == 3);
    REQUIRE(nnz_count(m, 0.6) == 1);
}
