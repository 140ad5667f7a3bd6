#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kxdoc/nn/tensor.hpp"

namespace kxdoc::nn {

double gelu(double x);
double gelu_grad(double x);

// y = x W + b, rows of x are independent samples. W is [in x out].
struct Linear {
    Param W, b;
    bool has_bias;

    Linear(const std::string& name, int in, int out, bool bias = true)
        : W(name + ".W", in, out), b(name + ".b", 1, out), has_bias(bias) {}

    void init(Rng& rng) { xavier_init(W.w, rng); }

    Mat forward(const Mat& x) const;
    // Accumulates parameter grads, returns dx. x must be the forward input.
    Mat backward(const Mat& x, const Mat& dy);
    void collect(std::vector<Param*>& out) {
        out.push_back(&W);
        if (has_bias) out.push_back(&b);
    }
};

struct LayerNorm {
    Param gamma, beta;
    double eps = 1e-5;

    struct Cache {
        Mat xhat;
        std::vector<double> inv_std;
    };

    LayerNorm(const std::string& name, int d)
        : gamma(name + ".gamma", 1, d), beta(name + ".beta", 1, d) {
        for (double& v : gamma.w.a) v = 1.0;
    }

    Mat forward(const Mat& x, Cache& c) const;
    Mat backward(const Mat& dy, const Cache& c);
    void collect(std::vector<Param*>& out) {
        out.push_back(&gamma);
        out.push_back(&beta);
    }
};

// Full (non-causal) multi-head self-attention. An optional key mask disables
// attention to masked-out rows for every query; rows of each attention matrix
// always sum to 1 over the allowed keys.
struct MultiHeadSelfAttention {
    int heads;
    Linear wq, wk, wv, wo;

    struct Cache {
        Mat x;
        Mat Q, K, V;
        std::vector<Mat> A;  // per head, L x L
        Mat concat;
        std::vector<std::uint8_t> key_mask;  // empty = all keys allowed
    };

    // the key projection carries no bias: a shared key offset shifts every
    // score in a softmax row equally and cancels
    MultiHeadSelfAttention(const std::string& name, int d, int h)
        : heads(h),
          wq(name + ".wq", d, d),
          wk(name + ".wk", d, d, /*bias=*/false),
          wv(name + ".wv", d, d),
          wo(name + ".wo", d, d) {}

    void init(Rng& rng) {
        wq.init(rng);
        wk.init(rng);
        wv.init(rng);
        wo.init(rng);
    }

    Mat forward(const Mat& x, const std::vector<std::uint8_t>* key_mask, Cache& c) const;
    Mat backward(const Mat& dy, Cache& c);
    void collect(std::vector<Param*>& out) {
        wq.collect(out);
        wk.collect(out);
        wv.collect(out);
        wo.collect(out);
    }
};

// Pre-norm transformer block: x + attn(ln1(x)), then + ffn(ln2(.)).
// Feed-forward expands by 4x with GELU.
struct TransformerBlock {
    LayerNorm ln1, ln2;
    MultiHeadSelfAttention attn;
    Linear fc1, fc2;

    struct Cache {
        LayerNorm::Cache ln1c;
        Mat ln1_out;
        MultiHeadSelfAttention::Cache attnc;
        Mat h;  // x + attention
        LayerNorm::Cache ln2c;
        Mat ln2_out;
        Mat ff_pre;
        Mat ff_act;
    };

    TransformerBlock(const std::string& name, int d, int h)
        : ln1(name + ".ln1", d),
          ln2(name + ".ln2", d),
          attn(name + ".attn", d, h),
          fc1(name + ".fc1", d, 4 * d),
          fc2(name + ".fc2", 4 * d, d) {}

    void init(Rng& rng) {
        attn.init(rng);
        fc1.init(rng);
        fc2.init(rng);
    }

    Mat forward(const Mat& x, const std::vector<std::uint8_t>* key_mask, Cache& c) const;
    Mat backward(const Mat& dy, Cache& c);
    void collect(std::vector<Param*>& out) {
        ln1.collect(out);
        attn.collect(out);
        ln2.collect(out);
        fc1.collect(out);
        fc2.collect(out);
    }
};

}  // namespace kxdoc::nn
