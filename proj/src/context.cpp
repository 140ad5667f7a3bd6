#include "kxdoc/context.hpp"

#include <algorithm>
#include <unordered_map>

namespace kxdoc {

std::string to_string(ContextMode m) {
    switch (m) {
        case ContextMode::None: return "none";
        case ContextMode::EC: return "ec";
        case ContextMode::CC: return "cc";
        case ContextMode::ECC: return "ecc";
    }
    return "none";
}

std::optional<ContextMode> context_mode_from_string(const std::string& s) {
    if (s == "none") return ContextMode::None;
    if (s == "ec") return ContextMode::EC;
    if (s == "cc") return ContextMode::CC;
    if (s == "ecc") return ContextMode::ECC;
    return std::nullopt;
}

std::optional<std::vector<Edge>> explore_path(const KnowledgeGraph& g, const EntityId& source,
                                              const EntityId& target, int max_hops) {
    if (source == target) return std::vector<Edge>{};

    // Layered BFS. dist holds the hop count of the shortest path; best holds
    // the lexicographically smallest hop sequence among shortest paths, which
    // is well defined because all candidates for a node have equal length.
    std::unordered_map<EntityId, int> dist;
    std::unordered_map<EntityId, std::vector<Edge>> best;
    dist[source] = 0;
    best[source] = {};
    std::vector<EntityId> frontier{source};

    for (int depth = 0; depth < max_hops && !frontier.empty(); ++depth) {
        // Candidate paths per next-layer node; adjacency is sorted, so per
        // predecessor the first edge to a node already carries the smallest
        // property id.
        std::map<EntityId, std::vector<Edge>> layer_best;
        for (const EntityId& u : frontier) {
            const std::vector<Edge>& prefix = best[u];
            const EntityId* last_to = nullptr;
            for (const Edge& e : neighbors(g, u)) {
                const EntityId& v = e.second;
                if (dist.count(v)) continue;  // reached in an earlier layer
                if (last_to && *last_to == v) continue;  // keep min property only
                last_to = &e.second;
                std::vector<Edge> cand = prefix;
                cand.push_back(e);
                auto it = layer_best.find(v);
                if (it == layer_best.end() || cand < it->second) layer_best[v] = std::move(cand);
            }
        }
        frontier.clear();
        for (auto& [v, path] : layer_best) {
            dist[v] = depth + 1;
            if (v == target) return path;
            best[v] = std::move(path);
            frontier.push_back(v);
        }
    }
    return std::nullopt;
}

std::vector<std::string> explore_entity_type(const KnowledgeGraph& g, const EntityId& source,
                                             const EntityId& target) {
    std::vector<std::string> types;
    if (auto t = get_entity_type(g, source)) types.push_back(*t);
    if (auto t = get_entity_type(g, target)) types.push_back(*t);
    return types;
}

namespace {

std::vector<std::string> render_cc(const KnowledgeGraph& g, const std::vector<Edge>& path) {
    // k hops render as p1, v1, p2, v2, ..., p_k: property labels interleaved
    // with intermediate entity labels; endpoints are not rendered.
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < path.size(); ++i) {
        auto pit = g.property_labels.find(path[i].first);
        tokens.push_back(pit == g.property_labels.end() ? path[i].first : pit->second);
        if (i + 1 < path.size()) {
            auto eit = g.entity_labels.find(path[i].second);
            tokens.push_back(eit == g.entity_labels.end() ? path[i].second : eit->second);
        }
    }
    return tokens;
}

}  // namespace

Context context_generation(const KnowledgeGraph& g, const EntityId& source, const EntityId& target,
                           const ContextConfig& cfg, ContextDiagnostics* diag) {
    Context ctx;
    ctx.source = source;
    ctx.target = target;
    ctx.mode = cfg.mode;
    if (cfg.mode == ContextMode::None) return ctx;
    if (!g.has_entity(source) || !g.has_entity(target)) {
        if (diag) diag->unknown_entity.fetch_add(1, std::memory_order_relaxed);
        return ctx;
    }
    if (cfg.mode == ContextMode::EC || cfg.mode == ContextMode::ECC)
        ctx.ec_tokens = explore_entity_type(g, source, target);
    if (cfg.mode == ContextMode::CC || cfg.mode == ContextMode::ECC) {
        if (auto path = explore_path(g, source, target, cfg.max_hops))
            ctx.cc_tokens = render_cc(g, *path);
    }
    return ctx;
}

Context ContextCache::get(const KnowledgeGraph& g, const EntityId& source, const EntityId& target,
                          const ContextConfig& cfg, ContextDiagnostics* diag) {
    Context ctx;
    ctx.source = source;
    ctx.target = target;
    ctx.mode = cfg.mode;
    if (cfg.mode == ContextMode::None) return ctx;
    if (!g.has_entity(source) || !g.has_entity(target)) {
        if (diag) diag->unknown_entity.fetch_add(1, std::memory_order_relaxed);
        return ctx;
    }
    if (cfg.mode == ContextMode::EC || cfg.mode == ContextMode::ECC)
        ctx.ec_tokens = explore_entity_type(g, source, target);
    if (cfg.mode == ContextMode::CC || cfg.mode == ContextMode::ECC) {
        auto key = std::make_tuple(source, target, cfg.max_hops);
        std::optional<std::vector<Edge>> path;
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = paths_.find(key);
            if (it == paths_.end())
                it = paths_.emplace(key, explore_path(g, source, target, cfg.max_hops)).first;
            path = it->second;
        }
        if (path) ctx.cc_tokens = render_cc(g, *path);
    }
    return ctx;
}

}  // namespace kxdoc
