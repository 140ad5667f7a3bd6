#pragma once

#include <atomic>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "kxdoc/kg.hpp"

namespace kxdoc {

enum class ContextMode { None, EC, CC, ECC };

std::string to_string(ContextMode m);
std::optional<ContextMode> context_mode_from_string(const std::string& s);

struct ContextConfig {
    int max_hops = 5;  // N_h
    ContextMode mode = ContextMode::ECC;
};

struct Context {
    EntityId source;
    EntityId target;
    std::vector<std::string> ec_tokens;  // 0-2 type strings, source first
    std::vector<std::string> cc_tokens;  // p1, v1, p2, ..., p_k (length 2k-1)
    ContextMode mode = ContextMode::ECC;

    // ECC rendering: ec tokens followed by cc tokens, exactly.
    std::vector<std::string> tokens() const {
        std::vector<std::string> t = ec_tokens;
        t.insert(t.end(), cc_tokens.begin(), cc_tokens.end());
        return t;
    }
};

struct ContextDiagnostics {
    std::atomic<long> unknown_entity{0};
};

// Bounded shortest-path search from source to target (at most max_hops edges).
// Among equal-length paths returns the lexicographically smallest sequence of
// (property id, entity id) hops. source == target yields the empty path;
// no path within the bound yields nullopt.
std::optional<std::vector<Edge>> explore_path(const KnowledgeGraph& g, const EntityId& source,
                                              const EntityId& target, int max_hops);

// Types of source then target; absent types skipped.
std::vector<std::string> explore_entity_type(const KnowledgeGraph& g, const EntityId& source,
                                             const EntityId& target);

Context context_generation(const KnowledgeGraph& g, const EntityId& source, const EntityId& target,
                           const ContextConfig& cfg, ContextDiagnostics* diag = nullptr);

// Per-run memo for explore_path keyed by (source, target, max_hops). Safe for
// concurrent use.
class ContextCache {
  public:
    Context get(const KnowledgeGraph& g, const EntityId& source, const EntityId& target,
                const ContextConfig& cfg, ContextDiagnostics* diag = nullptr);

  private:
    std::mutex mu_;
    std::map<std::tuple<EntityId, EntityId, int>, std::optional<std::vector<Edge>>> paths_;
};

}  // namespace kxdoc
