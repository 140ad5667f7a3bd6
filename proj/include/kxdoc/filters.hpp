#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kxdoc/context.hpp"
#include "kxdoc/corpus.hpp"

namespace kxdoc {

struct FilterConfig {
    double lambda_w = 0.1;   // weight of S1 (direct co-occurrence)
    double eta_w = 0.01;     // weight of S2 (indirect co-occurrence)
    double kappa_w = 0.001;  // weight of S3 (cross-path presence)
    int top_k = 16;
    int relevance_keep = 0;  // max sentences kept by the relevance filter; <=0 = budget-driven
    int token_budget = 512;
    bool entity_filter = true;     // false: uniform importance (pure tie-break order)
    bool relevance_filter = true;  // false: keep-all mode (budget still applies)
    bool theta1_requires_both = false;  // true: a sentence must hold e_s AND e_o for theta-1
};

struct FilterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MentionScore {
    EntityId entity;
    int s1 = 0;
    int s2 = 0;
    int s3 = 0;
    double total = 0.0;
};

inline double mention_total(int s1, int s2, int s3, const FilterConfig& cfg) {
    return cfg.lambda_w * s1 + cfg.eta_w * s2 + cfg.kappa_w * s3;
}

// Identifies one sentence inside a bag.
struct SentenceRef {
    int path_index = 0;
    int doc_role = 0;  // 0 = source doc, 1 = target doc
    int sentence_index = 0;

    auto operator<=>(const SentenceRef&) const = default;
};

struct RankedSentence {
    SentenceRef ref;
    std::string path_id;
    double importance = 0.0;
};

struct CandidateSet {
    std::vector<RankedSentence> sentences;  // importance-descending, at most top_k
    std::vector<std::string> context_tokens;
};

struct SelectedSentence {
    SentenceRef ref;
    std::string path_id;
    double importance = 0.0;
    double relevance = 0.0;
    int keep_rank = 0;  // 0 = kept first; used when re-truncation is needed later
};

struct InformativeContext {
    std::vector<SelectedSentence> selected;  // in original document order
    std::vector<std::string> context_tokens;
    std::vector<std::string> flattened_tokens;  // context tokens then sentences
    std::uint64_t content_hash = 0;
};

using PathMentionScores = std::map<EntityId, MentionScore>;

// Per-path scores for every mentioned (bridge) entity of that path.
std::vector<PathMentionScores> score_mentions(const Bag& bag, const FilterConfig& cfg);

// Importance = sum of bridge scores over bridges mentioned in the sentence;
// top-K with (path_id, doc role, sentence index) tie-break.
CandidateSet rank_sentences(const Bag& bag, const std::vector<PathMentionScores>& scores,
                            const FilterConfig& cfg);

// Relevance = max term-frequency cosine against sentences containing the
// target entity. Context tokens are always retained; sentences are kept
// greedily by (relevance, importance) until the token budget is filled.
InformativeContext relevance_filter(const CandidateSet& cands, const Context& context,
                                    const Bag& bag, const FilterConfig& cfg);

const Document& path_doc(const TextPath& path, int doc_role);

}  // namespace kxdoc
