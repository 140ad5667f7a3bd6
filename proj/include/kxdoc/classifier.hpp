#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "kxdoc/nn/layers.hpp"
#include "kxdoc/reasoner.hpp"

namespace kxdoc {

// The printed loss puts positive-class scores into the second log-sum-exp as
// e^{y}; the surrounding text wants positives pushed above the threshold,
// which requires e^{-y}. Adaptive follows the text, Literal the printed form.
enum class LossVariant { Adaptive, Literal };

struct BagScores {
    std::vector<std::vector<double>> per_path;  // N x |R|
    std::vector<double> pooled;                 // |R|, column-wise max
    std::vector<int> argmax_path;               // pooling provenance per relation
    std::set<int> predicted;                    // {r : pooled[r] > theta}; empty = NA
    std::uint64_t ictx_hash = 0;                // input provenance for the explainer
};

// log(e^{theta} + sum_{r in neg} e^{y_r}) + log(e^{-theta} + sum_{r in pos} e^{-y_r})
// (Literal: the second sum uses e^{y_r}.) Overflow-safe.
double bag_loss(const std::vector<double>& pooled, const std::set<int>& gold, double theta,
                LossVariant variant);

std::vector<double> bag_loss_grad(const std::vector<double>& pooled, const std::set<int>& gold,
                                  double theta, LossVariant variant);

// Two affine layers with ReLU between: d -> d -> |R|.
class Classifier {
  public:
    Classifier(int embed_dim, int num_relations, nn::Rng& rng);

    struct Forward {
        nn::Mat reps;     // N x d inputs
        nn::Mat hidden_pre;
        nn::Mat hidden;
        nn::Mat logits;   // N x |R|
    };

    BagScores score_bag(const std::vector<PathRelationRep>& reps, double theta, Forward& cache);

    // dpooled routes through the max pool to the argmax path; returns per-path
    // gradients of the relation representations.
    std::vector<std::vector<double>> backward(const Forward& cache, const BagScores& scores,
                                              const std::vector<double>& dpooled);

    void collect(std::vector<nn::Param*>& out);
    int num_relations() const { return num_relations_; }

  private:
    int num_relations_;
    nn::Linear fc1_, fc2_;
};

}  // namespace kxdoc
