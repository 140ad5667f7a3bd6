#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kxdoc/corpus.hpp"
#include "kxdoc/filters.hpp"
#include "kxdoc/nn/layers.hpp"

namespace kxdoc {

inline constexpr const char* kEntityOpen = "<e>";
inline constexpr const char* kEntityClose = "</e>";
inline constexpr const char* kContextOpen = "<c>";
inline constexpr const char* kContextClose = "</c>";

struct EncoderConfig {
    int embed_dim = 64;
    int num_layers = 3;
    int num_heads = 4;
    int vocab_hash_buckets = 50021;
    int max_positions = 512;
};

struct MarkError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A mention span in marker-adjusted coordinates; [start, end) covers the
// tokens between the entity markers.
struct MarkedSpan {
    EntityId entity;
    int start = 0;
    int end = 0;
    int path_index = 0;
};

struct MarkedSequence {
    std::vector<std::string> tokens;
    std::vector<MarkedSpan> spans;
    std::optional<std::pair<int, int>> context_span;
};

// Wraps every entity mention in <e>...</e> and the context block in
// <c>...</c>. Nested mentions mark outer-first; partially overlapping mentions
// are a validation error. If marker insertion pushes the sequence over
// max_positions, whole sentences are dropped lowest-keep-priority-first.
MarkedSequence mark_sequence(const InformativeContext& ictx, const Bag& bag, int max_positions);

struct SpanEmbedding {
    EntityId entity;
    int path_index = 0;
    std::vector<double> vec;
};

// Hash-bucket token embeddings + learned positions, followed by pre-norm
// self-attention blocks. Span representation is the mean over the span's
// token vectors; mentions of one entity within one path are mean-pooled.
class Encoder {
  public:
    Encoder(const EncoderConfig& cfg, nn::Rng& rng);

    struct Forward {
        std::vector<std::size_t> token_ids;
        nn::Mat x0;  // embedded input
        std::vector<nn::TransformerBlock::Cache> caches;
        nn::Mat out;  // final token vectors
        std::vector<SpanEmbedding> spans;
        // span bookkeeping for backward: which mention rows fed each pooled span
        std::vector<std::vector<std::pair<int, int>>> span_sources;
    };

    Forward encode(const MarkedSequence& seq);

    // dspans[k] is the loss gradient of spans[k].vec; accumulates parameter
    // grads all the way down to the embedding tables.
    void backward(Forward& fwd, const std::vector<std::vector<double>>& dspans);

    void collect(std::vector<nn::Param*>& out);

    const EncoderConfig& config() const { return cfg_; }
    std::size_t token_id(const std::string& token) const;

  private:
    EncoderConfig cfg_;
    nn::Param tok_emb_;
    nn::Param pos_emb_;
    std::vector<nn::TransformerBlock> blocks_;
};

}  // namespace kxdoc
