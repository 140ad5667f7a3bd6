#include "kxdoc/classifier.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace kxdoc {

namespace {

// log(sum_i e^{x_i}), overflow-safe; x is never empty here.
double log_sum_exp(const std::vector<double>& x) {
    double m = *std::max_element(x.begin(), x.end());
    double s = 0.0;
    for (double v : x) s += std::exp(v - m);
    return m + std::log(s);
}

}  // namespace

double bag_loss(const std::vector<double>& pooled, const std::set<int>& gold, double theta,
                LossVariant variant) {
    std::vector<double> neg_terms{theta};
    std::vector<double> pos_terms{-theta};
    for (int r = 0; r < static_cast<int>(pooled.size()); ++r) {
        if (gold.count(r)) {
            pos_terms.push_back(variant == LossVariant::Adaptive ? -pooled[r] : pooled[r]);
        } else {
            neg_terms.push_back(pooled[r]);
        }
    }
    return log_sum_exp(neg_terms) + log_sum_exp(pos_terms);
}

std::vector<double> bag_loss_grad(const std::vector<double>& pooled, const std::set<int>& gold,
                                  double theta, LossVariant variant) {
    std::vector<double> neg_terms{theta};
    std::vector<double> pos_terms{-theta};
    for (int r = 0; r < static_cast<int>(pooled.size()); ++r) {
        if (gold.count(r))
            pos_terms.push_back(variant == LossVariant::Adaptive ? -pooled[r] : pooled[r]);
        else
            neg_terms.push_back(pooled[r]);
    }
    double neg_lse = log_sum_exp(neg_terms);
    double pos_lse = log_sum_exp(pos_terms);

    std::vector<double> grad(pooled.size(), 0.0);
    for (int r = 0; r < static_cast<int>(pooled.size()); ++r) {
        if (gold.count(r)) {
            if (variant == LossVariant::Adaptive)
                grad[r] = -std::exp(-pooled[r] - pos_lse);
            else
                grad[r] = std::exp(pooled[r] - pos_lse);
        } else {
            grad[r] = std::exp(pooled[r] - neg_lse);
        }
    }
    return grad;
}

Classifier::Classifier(int embed_dim, int num_relations, nn::Rng& rng)
    : num_relations_(num_relations),
      fc1_("clf.fc1", embed_dim, embed_dim),
      fc2_("clf.fc2", embed_dim, num_relations) {
    fc1_.init(rng);
    fc2_.init(rng);
}

BagScores Classifier::score_bag(const std::vector<PathRelationRep>& reps, double theta,
                                Forward& cache) {
    assert(!reps.empty());
    int n = static_cast<int>(reps.size());
    int d = static_cast<int>(reps[0].vec.size());
    cache.reps = nn::Mat(n, d);
    for (int i = 0; i < n; ++i) std::copy(reps[i].vec.begin(), reps[i].vec.end(), cache.reps.row(i));

    cache.hidden_pre = fc1_.forward(cache.reps);
    cache.hidden = cache.hidden_pre;
    for (double& v : cache.hidden.a) v = std::max(0.0, v);
    cache.logits = fc2_.forward(cache.hidden);

    BagScores out;
    out.per_path.assign(n, std::vector<double>(num_relations_));
    for (int i = 0; i < n; ++i)
        for (int r = 0; r < num_relations_; ++r) out.per_path[i][r] = cache.logits.at(i, r);

    out.pooled.assign(num_relations_, 0.0);
    out.argmax_path.assign(num_relations_, 0);
    for (int r = 0; r < num_relations_; ++r) {
        double best = out.per_path[0][r];
        int arg = 0;
        for (int i = 1; i < n; ++i) {
            if (out.per_path[i][r] > best) {
                best = out.per_path[i][r];
                arg = i;
            }
        }
        out.pooled[r] = best;
        out.argmax_path[r] = arg;
        if (best > theta) out.predicted.insert(r);
    }
    return out;
}

std::vector<std::vector<double>> Classifier::backward(const Forward& cache, const BagScores& scores,
                                                      const std::vector<double>& dpooled) {
    int n = cache.reps.rows;
    nn::Mat dlogits(n, num_relations_);
    for (int r = 0; r < num_relations_; ++r)
        dlogits.at(scores.argmax_path[r], r) = dpooled[r];

    nn::Mat dhidden = fc2_.backward(cache.hidden, dlogits);
    for (std::size_t i = 0; i < dhidden.a.size(); ++i)
        if (cache.hidden_pre.a[i] <= 0.0) dhidden.a[i] = 0.0;
    nn::Mat dreps = fc1_.backward(cache.reps, dhidden);

    std::vector<std::vector<double>> out(n);
    for (int i = 0; i < n; ++i) out[i].assign(dreps.row(i), dreps.row(i) + dreps.cols);
    return out;
}

void Classifier::collect(std::vector<nn::Param*>& out) {
    fc1_.collect(out);
    fc2_.collect(out);
}

}  // namespace kxdoc
