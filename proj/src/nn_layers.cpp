#include "kxdoc/nn/layers.hpp"

#include <cassert>
#include <cmath>

namespace kxdoc::nn {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
}  // namespace

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad(double x) {
    return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

Mat Linear::forward(const Mat& x) const {
    Mat y = matmul(x, W.w);
    if (has_bias) {
        for (int i = 0; i < y.rows; ++i) {
            double* yi = y.row(i);
            const double* bb = b.w.row(0);
            for (int j = 0; j < y.cols; ++j) yi[j] += bb[j];
        }
    }
    return y;
}

Mat Linear::backward(const Mat& x, const Mat& dy) {
    add_inplace(W.g, matmul_tn(x, dy));
    if (has_bias) {
        for (int i = 0; i < dy.rows; ++i) {
            const double* di = dy.row(i);
            double* bg = b.g.row(0);
            for (int j = 0; j < dy.cols; ++j) bg[j] += di[j];
        }
    }
    return matmul_nt(dy, W.w);
}

Mat LayerNorm::forward(const Mat& x, Cache& c) const {
    int d = x.cols;
    Mat y(x.rows, d);
    c.xhat = Mat(x.rows, d);
    c.inv_std.assign(x.rows, 0.0);
    for (int i = 0; i < x.rows; ++i) {
        const double* xi = x.row(i);
        double mu = 0.0;
        for (int j = 0; j < d; ++j) mu += xi[j];
        mu /= d;
        double var = 0.0;
        for (int j = 0; j < d; ++j) var += (xi[j] - mu) * (xi[j] - mu);
        var /= d;
        double inv = 1.0 / std::sqrt(var + eps);
        c.inv_std[i] = inv;
        double* xh = c.xhat.row(i);
        double* yi = y.row(i);
        const double* ga = gamma.w.row(0);
        const double* be = beta.w.row(0);
        for (int j = 0; j < d; ++j) {
            xh[j] = (xi[j] - mu) * inv;
            yi[j] = ga[j] * xh[j] + be[j];
        }
    }
    return y;
}

Mat LayerNorm::backward(const Mat& dy, const Cache& c) {
    int d = dy.cols;
    Mat dx(dy.rows, d);
    double* gg = gamma.g.row(0);
    double* bg = beta.g.row(0);
    const double* ga = gamma.w.row(0);
    for (int i = 0; i < dy.rows; ++i) {
        const double* di = dy.row(i);
        const double* xh = c.xhat.row(i);
        double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
        for (int j = 0; j < d; ++j) {
            gg[j] += di[j] * xh[j];
            bg[j] += di[j];
            double dxh = di[j] * ga[j];
            mean_dxhat += dxh;
            mean_dxhat_xhat += dxh * xh[j];
        }
        mean_dxhat /= d;
        mean_dxhat_xhat /= d;
        double* dxi = dx.row(i);
        for (int j = 0; j < d; ++j) {
            double dxh = di[j] * ga[j];
            dxi[j] = c.inv_std[i] * (dxh - mean_dxhat - xh[j] * mean_dxhat_xhat);
        }
    }
    return dx;
}

Mat MultiHeadSelfAttention::forward(const Mat& x, const std::vector<std::uint8_t>* key_mask,
                                    Cache& c) const {
    int L = x.rows;
    int d = x.cols;
    int dh = d / heads;
    double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    c.x = x;
    c.Q = wq.forward(x);
    c.K = wk.forward(x);
    c.V = wv.forward(x);
    c.A.assign(heads, Mat(L, L));
    c.concat = Mat(L, d);
    c.key_mask = key_mask ? *key_mask : std::vector<std::uint8_t>{};
    assert(!key_mask || static_cast<int>(key_mask->size()) == L);

    for (int h = 0; h < heads; ++h) {
        int off = h * dh;
        Mat& A = c.A[h];
        for (int i = 0; i < L; ++i) {
            const double* qi = c.Q.row(i) + off;
            double* ai = A.row(i);
            double max_s = -1e300;
            for (int j = 0; j < L; ++j) {
                if (key_mask && !(*key_mask)[j]) {
                    ai[j] = -1e300;
                    continue;
                }
                const double* kj = c.K.row(j) + off;
                double s = 0.0;
                for (int t = 0; t < dh; ++t) s += qi[t] * kj[t];
                s *= scale;
                ai[j] = s;
                if (s > max_s) max_s = s;
            }
            double z = 0.0;
            for (int j = 0; j < L; ++j) {
                if (key_mask && !(*key_mask)[j]) {
                    ai[j] = 0.0;
                    continue;
                }
                ai[j] = std::exp(ai[j] - max_s);
                z += ai[j];
            }
            for (int j = 0; j < L; ++j) ai[j] /= z;
            double* oi = c.concat.row(i) + off;
            for (int j = 0; j < L; ++j) {
                if (ai[j] == 0.0) continue;
                const double* vj = c.V.row(j) + off;
                for (int t = 0; t < dh; ++t) oi[t] += ai[j] * vj[t];
            }
        }
    }
    return wo.forward(c.concat);
}

Mat MultiHeadSelfAttention::backward(const Mat& dy, Cache& c) {
    int L = c.x.rows;
    int d = c.x.cols;
    int dh = d / heads;
    double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    Mat dconcat = wo.backward(c.concat, dy);
    Mat dQ(L, d), dK(L, d), dV(L, d);

    for (int h = 0; h < heads; ++h) {
        int off = h * dh;
        const Mat& A = c.A[h];
        for (int i = 0; i < L; ++i) {
            const double* doi = dconcat.row(i) + off;
            const double* ai = A.row(i);

            // dA then dS = A .* (dA - sum_j dA_j A_j) for the softmax row
            std::vector<double> dA(L, 0.0);
            double dot = 0.0;
            for (int j = 0; j < L; ++j) {
                if (ai[j] == 0.0) continue;
                const double* vj = c.V.row(j) + off;
                double s = 0.0;
                for (int t = 0; t < dh; ++t) s += doi[t] * vj[t];
                dA[j] = s;
                dot += s * ai[j];
                // dV accumulation
                double* dvj = dV.row(j) + off;
                for (int t = 0; t < dh; ++t) dvj[t] += ai[j] * doi[t];
            }
            double* dqi = dQ.row(i) + off;
            const double* qi = c.Q.row(i) + off;
            for (int j = 0; j < L; ++j) {
                double ds = ai[j] * (dA[j] - dot);
                if (ds == 0.0) continue;
                ds *= scale;
                const double* kj = c.K.row(j) + off;
                double* dkj = dK.row(j) + off;
                for (int t = 0; t < dh; ++t) {
                    dqi[t] += ds * kj[t];
                    dkj[t] += ds * qi[t];
                }
            }
        }
    }

    Mat dx = wq.backward(c.x, dQ);
    add_inplace(dx, wk.backward(c.x, dK));
    add_inplace(dx, wv.backward(c.x, dV));
    return dx;
}

Mat TransformerBlock::forward(const Mat& x, const std::vector<std::uint8_t>* key_mask,
                              Cache& c) const {
    Mat ln1_out = ln1.forward(x, c.ln1c);
    c.ln1_out = ln1_out;
    Mat attn_out = attn.forward(ln1_out, key_mask, c.attnc);
    c.h = x;
    add_inplace(c.h, attn_out);
    c.ln2_out = ln2.forward(c.h, c.ln2c);
    c.ff_pre = fc1.forward(c.ln2_out);
    c.ff_act = c.ff_pre;
    for (double& v : c.ff_act.a) v = gelu(v);
    Mat y = c.h;
    add_inplace(y, fc2.forward(c.ff_act));
    return y;
}

Mat TransformerBlock::backward(const Mat& dy, Cache& c) {
    Mat d_ff_act = fc2.backward(c.ff_act, dy);
    for (std::size_t i = 0; i < d_ff_act.a.size(); ++i) d_ff_act.a[i] *= gelu_grad(c.ff_pre.a[i]);
    Mat dh = ln2.backward(fc1.backward(c.ln2_out, d_ff_act), c.ln2c);
    add_inplace(dh, dy);
    Mat dx = ln1.backward(attn.backward(dh, c.attnc), c.ln1c);
    add_inplace(dx, dh);
    return dx;
}

}  // namespace kxdoc::nn
