#include "kxdoc/reasoner.hpp"

#include <algorithm>
#include <cassert>

namespace kxdoc {

std::vector<EntityId> matrix_entities(const Bag& bag, const std::set<EntityId>& with_embedding,
                                      const std::map<EntityId, double>& bridge_scores, int cap) {
    std::vector<EntityId> bridges;
    for (const EntityId& e : with_embedding)
        if (e != bag.source && e != bag.target) bridges.push_back(e);

    if (static_cast<int>(bridges.size()) + 2 > cap) {
        std::sort(bridges.begin(), bridges.end(), [&](const EntityId& a, const EntityId& b) {
            double sa = bridge_scores.count(a) ? bridge_scores.at(a) : 0.0;
            double sb = bridge_scores.count(b) ? bridge_scores.at(b) : 0.0;
            if (sa != sb) return sa > sb;
            return a < b;
        });
        bridges.resize(cap - 2);
        std::sort(bridges.begin(), bridges.end());
    }

    std::vector<EntityId> entities{bag.source, bag.target};
    entities.insert(entities.end(), bridges.begin(), bridges.end());
    return entities;
}

nn::Mat pool_entity_embeddings(const std::vector<EntityId>& entities,
                               const std::vector<SpanEmbedding>& spans, int embed_dim,
                               std::vector<std::vector<int>>* sources_out) {
    nn::Mat emb(static_cast<int>(entities.size()), embed_dim);
    if (sources_out) sources_out->assign(entities.size(), {});
    for (std::size_t i = 0; i < entities.size(); ++i) {
        std::vector<int> src;
        for (std::size_t k = 0; k < spans.size(); ++k)
            if (spans[k].entity == entities[i]) src.push_back(static_cast<int>(k));
        if (src.empty()) continue;  // endpoint without a surviving mention: zero vector
        double inv = 1.0 / src.size();
        double* row = emb.row(static_cast<int>(i));
        for (int k : src)
            for (int j = 0; j < embed_dim; ++j) row[j] += inv * spans[k].vec[j];
        if (sources_out) (*sources_out)[i] = std::move(src);
    }
    return emb;
}

Reasoner::Reasoner(int embed_dim, const ReasonerConfig& cfg, nn::Rng& rng)
    : cfg_(cfg),
      d_(embed_dim),
      map_u_("rea.map_u", embed_dim, embed_dim),
      map_v_("rea.map_v", embed_dim, embed_dim),
      map_r_("rea.map_r", embed_dim, embed_dim) {
    map_u_.init(rng);
    map_v_.init(rng);
    map_r_.init(rng);
    for (int l = 0; l < cfg.num_layers; ++l) {
        blocks_.emplace_back("rea.block" + std::to_string(l), embed_dim, cfg.num_heads);
        blocks_.back().init(rng);
    }
}

std::vector<double> Reasoner::relation_rep(const std::vector<double>& e_u,
                                           const std::vector<double>& e_v) const {
    nn::Mat mu(1, d_), mv(1, d_);
    std::copy(e_u.begin(), e_u.end(), mu.row(0));
    std::copy(e_v.begin(), e_v.end(), mv.row(0));
    nn::Mat inner = map_u_.forward(mu);
    nn::Mat vproj = map_v_.forward(mv);
    for (int j = 0; j < d_; ++j) inner.at(0, j) = std::max(0.0, inner.at(0, j) + vproj.at(0, j));
    nn::Mat r = map_r_.forward(inner);
    std::vector<double> out(d_);
    for (int j = 0; j < d_; ++j) out[j] = std::max(0.0, r.at(0, j));
    return out;
}

Reasoner::Forward Reasoner::run(const std::vector<EntityId>& entities, const nn::Mat& entity_emb,
                                const std::vector<std::string>& path_ids,
                                const std::vector<std::vector<std::uint8_t>>& path_masks) {
    Forward f;
    f.entities = entities;
    f.entity_emb = entity_emb;
    f.path_masks = path_masks;
    int n = static_cast<int>(entities.size());
    assert(n >= 2 && entity_emb.rows == n && entity_emb.cols == d_);

    f.u_proj = map_u_.forward(entity_emb);
    f.v_proj = map_v_.forward(entity_emb);
    f.inner_pre = nn::Mat(n * n, d_);
    for (int u = 0; u < n; ++u) {
        const double* up = f.u_proj.row(u);
        for (int v = 0; v < n; ++v) {
            const double* vp = f.v_proj.row(v);
            double* row = f.inner_pre.row(u * n + v);
            for (int j = 0; j < d_; ++j) row[j] = up[j] + vp[j];
        }
    }
    f.inner = f.inner_pre;
    for (double& x : f.inner.a) x = std::max(0.0, x);
    f.cell_pre = map_r_.forward(f.inner);
    f.matrix.entities = entities;
    f.matrix.flat = f.cell_pre;
    for (double& x : f.matrix.flat.a) x = std::max(0.0, x);

    int layers = static_cast<int>(blocks_.size());
    f.caches.resize(layers);
    f.layer_in.resize(layers);
    nn::Mat x = f.matrix.flat;
    for (int t = 0; t < layers; ++t) {
        f.layer_in[t] = x;
        x = blocks_[t].forward(x, nullptr, f.caches[t]);
    }
    f.final_flat = std::move(x);

    const int readout_row = f.matrix.index_of(0, 1);  // (source, target) cell
    f.reps.resize(path_ids.size());
    if (layers == 0) {
        for (std::size_t i = 0; i < path_ids.size(); ++i) {
            f.reps[i].path_id = path_ids[i];
            const double* row = f.matrix.flat.row(readout_row);
            f.reps[i].vec.assign(row, row + d_);
        }
    } else if (!cfg_.masked_readout) {
        for (std::size_t i = 0; i < path_ids.size(); ++i) {
            f.reps[i].path_id = path_ids[i];
            const double* row = f.final_flat.row(readout_row);
            f.reps[i].vec.assign(row, row + d_);
        }
    } else {
        f.readout_caches.resize(path_ids.size());
        for (std::size_t i = 0; i < path_ids.size(); ++i) {
            f.reps[i].path_id = path_ids[i];
            nn::Mat y = blocks_[layers - 1].forward(f.layer_in[layers - 1], &path_masks[i],
                                                    f.readout_caches[i]);
            const double* row = y.row(readout_row);
            f.reps[i].vec.assign(row, row + d_);
        }
    }
    return f;
}

nn::Mat Reasoner::backward(Forward& fwd, const std::vector<std::vector<double>>& dreps) {
    int n = static_cast<int>(fwd.entities.size());
    int layers = static_cast<int>(blocks_.size());
    const int readout_row = fwd.matrix.index_of(0, 1);

    nn::Mat dflat(n * n, d_);
    if (layers == 0) {
        double* row = dflat.row(readout_row);
        for (const auto& dr : dreps)
            for (int j = 0; j < d_; ++j) row[j] += dr[j];
    } else {
        nn::Mat dprev(n * n, d_);
        if (!cfg_.masked_readout) {
            nn::Mat dy(n * n, d_);
            double* row = dy.row(readout_row);
            for (const auto& dr : dreps)
                for (int j = 0; j < d_; ++j) row[j] += dr[j];
            dprev = blocks_[layers - 1].backward(dy, fwd.caches[layers - 1]);
        } else {
            for (std::size_t i = 0; i < dreps.size(); ++i) {
                nn::Mat dy(n * n, d_);
                std::copy(dreps[i].begin(), dreps[i].end(), dy.row(readout_row));
                nn::add_inplace(dprev, blocks_[layers - 1].backward(dy, fwd.readout_caches[i]));
            }
        }
        for (int t = layers - 2; t >= 0; --t) dprev = blocks_[t].backward(dprev, fwd.caches[t]);
        dflat = std::move(dprev);
    }

    // back through relu(Er(relu(...)))
    for (std::size_t i = 0; i < dflat.a.size(); ++i)
        if (fwd.cell_pre.a[i] <= 0.0) dflat.a[i] = 0.0;
    nn::Mat dinner = map_r_.backward(fwd.inner, dflat);
    for (std::size_t i = 0; i < dinner.a.size(); ++i)
        if (fwd.inner_pre.a[i] <= 0.0) dinner.a[i] = 0.0;

    nn::Mat du_proj(n, d_), dv_proj(n, d_);
    for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) {
            const double* row = dinner.row(u * n + v);
            double* du = du_proj.row(u);
            double* dv = dv_proj.row(v);
            for (int j = 0; j < d_; ++j) {
                du[j] += row[j];
                dv[j] += row[j];
            }
        }
    }
    nn::Mat dent = map_u_.backward(fwd.entity_emb, du_proj);
    nn::add_inplace(dent, map_v_.backward(fwd.entity_emb, dv_proj));
    return dent;
}

void Reasoner::collect(std::vector<nn::Param*>& out) {
    map_u_.collect(out);
    map_v_.collect(out);
    map_r_.collect(out);
    for (auto& b : blocks_) b.collect(out);
}

}  // namespace kxdoc
