#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "kxdoc/nn/rng.hpp"

namespace kxdoc::nn {

// Dense row-major matrix of doubles. Everything in the trainable stack runs in
// double so finite-difference gradient checks are meaningful.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }

    double* row(int r) { return a.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return a.data() + static_cast<std::size_t>(r) * cols; }

    std::size_t size() const { return a.size(); }
    void zero() { std::fill(a.begin(), a.end(), 0.0); }

    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

// C = A * B
inline Mat matmul(const Mat& A, const Mat& B) {
    assert(A.cols == B.rows);
    Mat C(A.rows, B.cols);
    for (int i = 0; i < A.rows; ++i) {
        const double* ai = A.row(i);
        double* ci = C.row(i);
        for (int k = 0; k < A.cols; ++k) {
            double v = ai[k];
            if (v == 0.0) continue;
            const double* bk = B.row(k);
            for (int j = 0; j < B.cols; ++j) ci[j] += v * bk[j];
        }
    }
    return C;
}

// C = A * B^T
inline Mat matmul_nt(const Mat& A, const Mat& B) {
    assert(A.cols == B.cols);
    Mat C(A.rows, B.rows);
    for (int i = 0; i < A.rows; ++i) {
        const double* ai = A.row(i);
        for (int j = 0; j < B.rows; ++j) {
            const double* bj = B.row(j);
            double s = 0.0;
            for (int k = 0; k < A.cols; ++k) s += ai[k] * bj[k];
            C.at(i, j) = s;
        }
    }
    return C;
}

// C = A^T * B
inline Mat matmul_tn(const Mat& A, const Mat& B) {
    assert(A.rows == B.rows);
    Mat C(A.cols, B.cols);
    for (int k = 0; k < A.rows; ++k) {
        const double* ak = A.row(k);
        const double* bk = B.row(k);
        for (int i = 0; i < A.cols; ++i) {
            double v = ak[i];
            if (v == 0.0) continue;
            double* ci = C.row(i);
            for (int j = 0; j < B.cols; ++j) ci[j] += v * bk[j];
        }
    }
    return C;
}

inline void add_inplace(Mat& A, const Mat& B) {
    assert(A.same_shape(B));
    for (std::size_t i = 0; i < A.a.size(); ++i) A.a[i] += B.a[i];
}

inline void scale_inplace(Mat& A, double s) {
    for (double& v : A.a) v *= s;
}

inline bool all_finite(const Mat& A) {
    for (double v : A.a)
        if (!std::isfinite(v)) return false;
    return true;
}

// Xavier-uniform init; bound sqrt(6/(fan_in+fan_out)).
inline void xavier_init(Mat& W, Rng& rng) {
    double bound = std::sqrt(6.0 / (W.rows + W.cols));
    for (double& v : W.a) v = rng.uniform(-bound, bound);
}

// A named parameter tensor with its gradient accumulator.
struct Param {
    std::string name;
    Mat w;
    Mat g;

    Param() = default;
    Param(std::string n, int r, int c) : name(std::move(n)), w(r, c), g(r, c) {}

    void zero_grad() { g.zero(); }
};

}  // namespace kxdoc::nn
