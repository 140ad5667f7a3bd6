#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kxdoc/corpus.hpp"
#include "kxdoc/encoder.hpp"
#include "kxdoc/nn/layers.hpp"

namespace kxdoc {

struct ReasonerConfig {
    int num_layers = 2;  // T
    int num_heads = 4;
    bool masked_readout = true;  // per-path readout restricted to the path's entities
    int entity_cap = 32;         // larger bags truncate bridges by filter score
};

// Relation matrix over the bag's entities: row u*|E|+v of the flattened matrix
// holds the d-dim relation representation of (entities[u], entities[v]).
// Entity order is deterministic: source, target, then bridges sorted by id.
struct RelationMatrix {
    std::vector<EntityId> entities;
    nn::Mat flat;  // |E|^2 x d

    int index_of(int u, int v) const { return u * static_cast<int>(entities.size()) + v; }
};

struct PathRelationRep {
    std::string path_id;
    std::vector<double> vec;
};

// r_{u,v} = relu(Er(relu(Eu e_u + Ev e_v))) cells, then T rounds of full
// self-attention over the flattened matrix. Per-path readout takes the
// (source, target) cell; in masked mode the last layer's attention for that
// cell is restricted to cells whose both entities belong to the path.
class Reasoner {
  public:
    Reasoner(int embed_dim, const ReasonerConfig& cfg, nn::Rng& rng);

    struct Forward {
        std::vector<EntityId> entities;
        nn::Mat entity_emb;  // |E| x d bag-level entity embeddings
        // relation_rep caches
        nn::Mat u_proj, v_proj;    // |E| x d
        nn::Mat inner_pre, inner;  // |E|^2 x d
        nn::Mat cell_pre;          // |E|^2 x d
        RelationMatrix matrix;     // post-ReLU cells (input to the stack)
        std::vector<nn::TransformerBlock::Cache> caches;
        std::vector<nn::Mat> layer_in;  // input to each block
        nn::Mat final_flat;             // unmasked last-layer output
        // per-path readout
        std::vector<std::vector<std::uint8_t>> path_masks;
        std::vector<nn::TransformerBlock::Cache> readout_caches;
        std::vector<PathRelationRep> reps;
    };

    // entity_emb rows follow `entities`; path_masks[i] flags the flat rows a
    // path may attend to (ignored when masked_readout is off).
    Forward run(const std::vector<EntityId>& entities, const nn::Mat& entity_emb,
                const std::vector<std::string>& path_ids,
                const std::vector<std::vector<std::uint8_t>>& path_masks);

    // dreps[i] is the gradient of reps[i].vec; returns gradient of entity_emb.
    nn::Mat backward(Forward& fwd, const std::vector<std::vector<double>>& dreps);

    // The cell formula alone (used by tests and the matrix dump).
    std::vector<double> relation_rep(const std::vector<double>& e_u,
                                     const std::vector<double>& e_v) const;

    void collect(std::vector<nn::Param*>& out);
    const ReasonerConfig& config() const { return cfg_; }

  private:
    ReasonerConfig cfg_;
    int d_;
    nn::Linear map_u_, map_v_, map_r_;
    std::vector<nn::TransformerBlock> blocks_;
};

// Deterministic matrix entity list: source, target, then bridges (sorted by
// id) that have at least one span embedding, truncated to cap by descending
// bridge score.
std::vector<EntityId> matrix_entities(const Bag& bag, const std::set<EntityId>& with_embedding,
                                      const std::map<EntityId, double>& bridge_scores, int cap);

// Pools per-path span embeddings into bag-level entity embeddings (mean across
// the paths where the entity appears). Entities without any span embedding get
// a zero vector (endpoints only; bridges are filtered out upstream).
nn::Mat pool_entity_embeddings(const std::vector<EntityId>& entities,
                               const std::vector<SpanEmbedding>& spans, int embed_dim,
                               std::vector<std::vector<int>>* sources_out = nullptr);

}  // namespace kxdoc
