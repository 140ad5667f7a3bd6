#pragma once

#include <memory>
#include <string>
#include <vector>

#include "kxdoc/classifier.hpp"
#include "kxdoc/context.hpp"
#include "kxdoc/corpus.hpp"
#include "kxdoc/encoder.hpp"
#include "kxdoc/filters.hpp"
#include "kxdoc/reasoner.hpp"

namespace kxdoc {

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PipelineConfig {
    ContextMode mode = ContextMode::ECC;
    int hops = 5;  // N_h
    FilterConfig filter;
    EncoderConfig enc;
    ReasonerConfig rea;
    LossVariant loss_variant = LossVariant::Adaptive;
    double theta = 0.0;
};

// Everything about a bag that does not depend on model parameters; computed
// once, reused every epoch.
struct PreparedBag {
    std::string bag_id;
    std::set<int> gold;
    std::vector<std::string> path_ids;
    Context context;
    InformativeContext ictx;
    MarkedSequence seq;
    std::vector<EntityId> entities;                      // matrix entity order
    std::vector<std::vector<std::uint8_t>> path_masks;   // per path over |E|^2 rows
};

PreparedBag prepare_bag(const Bag& bag, const KnowledgeGraph& kg, const RelationVocabulary& vocab,
                        const PipelineConfig& cfg, ContextCache& cache,
                        ContextDiagnostics* diag = nullptr);

// Encoder -> entity pooling -> relation matrix -> cross-path attention ->
// classifier, with a single backward pass through the whole stack.
class Model {
  public:
    Model(const PipelineConfig& cfg, const RelationVocabulary& vocab, std::uint64_t seed);

    struct BagForward {
        Encoder::Forward enc;
        std::vector<std::vector<int>> pool_sources;  // entity -> span indices
        Reasoner::Forward rea;
        Classifier::Forward clf;
        BagScores scores;
    };

    BagForward forward(const PreparedBag& prep);
    void backward(BagForward& fwd, const PreparedBag& prep, const std::vector<double>& dpooled);

    double loss(const BagScores& scores, const std::set<int>& gold) const;
    std::vector<double> loss_grad(const BagScores& scores, const std::set<int>& gold) const;

    std::vector<nn::Param*> parameters();
    void zero_grad();

    const PipelineConfig& config() const { return cfg_; }
    const RelationVocabulary& vocab() const { return vocab_; }

    void save(const std::string& path) const;
    static Model load(const std::string& path);

    Encoder& encoder() { return *encoder_; }
    Reasoner& reasoner() { return *reasoner_; }
    Classifier& classifier() { return *classifier_; }

  private:
    PipelineConfig cfg_;
    RelationVocabulary vocab_;
    std::unique_ptr<Encoder> encoder_;
    std::unique_ptr<Reasoner> reasoner_;
    std::unique_ptr<Classifier> classifier_;
};

}  // namespace kxdoc
