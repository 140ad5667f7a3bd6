#include <doctest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "kxdoc/nn/layers.hpp"

using namespace kxdoc::nn;
using kxdoc::testing::fd_check_input;
using kxdoc::testing::fd_check_params;

namespace {

Mat random_mat(int r, int c, Rng& rng, double scale = 1.0) {
    Mat m(r, c);
    for (double& v : m.a) v = rng.uniform(-scale, scale);
    return m;
}

// scalar probe: sum of squares
double sumsq(const Mat& m) {
    double s = 0.0;
    for (double v : m.a) s += v * v;
    return s;
}

Mat sumsq_grad(const Mat& m) {
    Mat g = m;
    for (double& v : g.a) v *= 2.0;
    return g;
}

}  // namespace

TEST_CASE("linear layer gradients match finite differences") {
    Rng rng(1);
    Linear lin("lin", 5, 3);
    lin.init(rng);
    Mat x = random_mat(4, 5, rng);

    auto loss = [&]() { return sumsq(lin.forward(x)); };
    Mat y = lin.forward(x);
    Mat dx = lin.backward(x, sumsq_grad(y));

    std::vector<Param*> params;
    lin.collect(params);
    auto res = fd_check_params(params, loss, 1e-5);
    CHECK(res.max_rel_err < 1e-6);
    auto res_x = fd_check_input(x, dx, loss, 1e-5);
    CHECK(res_x.max_rel_err < 1e-6);
}

TEST_CASE("layer norm gradients match finite differences") {
    Rng rng(2);
    LayerNorm ln("ln", 6);
    for (double& v : ln.gamma.w.a) v = rng.uniform(0.5, 1.5);
    for (double& v : ln.beta.w.a) v = rng.uniform(-0.5, 0.5);
    Mat x = random_mat(3, 6, rng);

    auto loss = [&]() {
        LayerNorm::Cache c;
        return sumsq(ln.forward(x, c));
    };
    LayerNorm::Cache cache;
    Mat y = ln.forward(x, cache);
    Mat dx = ln.backward(sumsq_grad(y), cache);

    std::vector<Param*> params;
    ln.collect(params);
    auto res = fd_check_params(params, loss, 1e-5);
    CHECK(res.max_rel_err < 1e-5);
    auto res_x = fd_check_input(x, dx, loss, 1e-5);
    CHECK(res_x.max_rel_err < 1e-5);
}

TEST_CASE("attention rows are probability distributions") {
    Rng rng(3);
    MultiHeadSelfAttention attn("attn", 8, 2);
    attn.init(rng);
    Mat x = random_mat(7, 8, rng);
    MultiHeadSelfAttention::Cache c;
    attn.forward(x, nullptr, c);
    for (const Mat& A : c.A) {
        for (int i = 0; i < A.rows; ++i) {
            double s = 0.0;
            for (int j = 0; j < A.cols; ++j) {
                s += A.at(i, j);
                CHECK(A.at(i, j) >= 0.0);
            }
            CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("masked attention zeroes masked keys and still normalizes") {
    Rng rng(4);
    MultiHeadSelfAttention attn("attn", 8, 2);
    attn.init(rng);
    Mat x = random_mat(5, 8, rng);
    std::vector<std::uint8_t> mask{1, 0, 1, 0, 1};
    MultiHeadSelfAttention::Cache c;
    attn.forward(x, &mask, c);
    for (const Mat& A : c.A) {
        for (int i = 0; i < A.rows; ++i) {
            double s = 0.0;
            for (int j = 0; j < A.cols; ++j) {
                if (!mask[j]) CHECK(A.at(i, j) == 0.0);
                s += A.at(i, j);
            }
            CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("self-attention gradients match finite differences") {
    Rng rng(5);
    MultiHeadSelfAttention attn("attn", 8, 2);
    attn.init(rng);
    Mat x = random_mat(5, 8, rng);

    auto loss = [&]() {
        MultiHeadSelfAttention::Cache c;
        return sumsq(attn.forward(x, nullptr, c));
    };
    MultiHeadSelfAttention::Cache cache;
    Mat y = attn.forward(x, nullptr, cache);
    Mat dx = attn.backward(sumsq_grad(y), cache);

    std::vector<Param*> params;
    attn.collect(params);
    auto res = fd_check_params(params, loss, 1e-5);
    CHECK(res.max_rel_err < 1e-5);
    auto res_x = fd_check_input(x, dx, loss, 1e-5);
    CHECK(res_x.max_rel_err < 1e-5);
}

TEST_CASE("masked self-attention gradients match finite differences") {
    Rng rng(6);
    MultiHeadSelfAttention attn("attn", 8, 2);
    attn.init(rng);
    Mat x = random_mat(6, 8, rng);
    std::vector<std::uint8_t> mask{1, 1, 0, 1, 0, 1};

    auto loss = [&]() {
        MultiHeadSelfAttention::Cache c;
        return sumsq(attn.forward(x, &mask, c));
    };
    MultiHeadSelfAttention::Cache cache;
    Mat y = attn.forward(x, &mask, cache);
    Mat dx = attn.backward(sumsq_grad(y), cache);

    std::vector<Param*> params;
    attn.collect(params);
    auto res = fd_check_params(params, loss, 1e-5);
    CHECK(res.max_rel_err < 1e-5);
    auto res_x = fd_check_input(x, dx, loss, 1e-5);
    CHECK(res_x.max_rel_err < 1e-5);
}

TEST_CASE("transformer block gradients match finite differences") {
    Rng rng(7);
    TransformerBlock block("blk", 8, 2);
    block.init(rng);
    Mat x = random_mat(5, 8, rng);

    auto loss = [&]() {
        TransformerBlock::Cache c;
        return sumsq(block.forward(x, nullptr, c));
    };
    TransformerBlock::Cache cache;
    Mat y = block.forward(x, nullptr, cache);
    Mat dx = block.backward(sumsq_grad(y), cache);

    std::vector<Param*> params;
    block.collect(params);
    auto res = fd_check_params(params, loss, 1e-5);
    CHECK(res.max_rel_err < 2e-5);
    auto res_x = fd_check_input(x, dx, loss, 1e-5);
    CHECK(res_x.max_rel_err < 2e-5);
}

TEST_CASE("gelu derivative matches finite differences") {
    for (double x : {-3.0, -1.0, -0.1, 0.0, 0.3, 1.7, 4.0}) {
        double h = 1e-6;
        double fd = (gelu(x + h) - gelu(x - h)) / (2 * h);
        CHECK(gelu_grad(x) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("rng is platform-pinned") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng c(42);
    CHECK(c.next_u64() == 13930160852258120406ull);  // mt19937_64 reference value
}
