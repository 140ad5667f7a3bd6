#include "kxdoc/filters.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "kxdoc/nn/rng.hpp"

namespace kxdoc {

const Document& path_doc(const TextPath& path, int doc_role) {
    return doc_role == 0 ? path.source_doc : path.target_doc;
}

namespace {

// Entity sets per sentence for one document.
std::vector<std::set<EntityId>> sentence_entity_sets(const Document& d) {
    std::vector<std::set<EntityId>> sets(d.sentences.size());
    for (const Mention& m : d.mentions) sets[m.sentence_index].insert(m.entity);
    return sets;
}

std::string lower(const std::string& s) {
    std::string out = s;
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

using TfVec = std::unordered_map<std::string, double>;

TfVec tf_vector(const std::vector<std::string>& tokens) {
    TfVec v;
    for (const std::string& t : tokens) v[lower(t)] += 1.0;
    return v;
}

double cosine(const TfVec& a, const TfVec& b) {
    double na = 0.0, nb = 0.0, dot = 0.0;
    for (const auto& [t, x] : a) na += x * x;
    for (const auto& [t, x] : b) nb += x * x;
    if (na == 0.0 || nb == 0.0) return 0.0;
    const TfVec& small = a.size() <= b.size() ? a : b;
    const TfVec& big = a.size() <= b.size() ? b : a;
    for (const auto& [t, x] : small) {
        auto it = big.find(t);
        if (it != big.end()) dot += x * it->second;
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

std::vector<PathMentionScores> score_mentions(const Bag& bag, const FilterConfig& cfg) {
    std::vector<PathMentionScores> result(bag.paths.size());

    for (std::size_t i = 0; i < bag.paths.size(); ++i) {
        const TextPath& path = bag.paths[i];
        std::vector<std::set<EntityId>> sets;
        for (int role : {0, 1}) {
            auto s = sentence_entity_sets(path_doc(path, role));
            sets.insert(sets.end(), s.begin(), s.end());
        }

        auto theta1 = [&](const EntityId& e) {
            for (const auto& set : sets) {
                if (!set.count(e)) continue;
                bool has_s = set.count(bag.source) > 0;
                bool has_o = set.count(bag.target) > 0;
                if (cfg.theta1_requires_both ? (has_s && has_o) : (has_s || has_o)) return true;
            }
            return false;
        };
        auto cooccur = [&](const EntityId& a, const EntityId& b) {
            for (const auto& set : sets)
                if (set.count(a) && set.count(b)) return true;
            return false;
        };

        for (const EntityId& em : path.mentioned_entities) {
            MentionScore ms;
            ms.entity = em;
            ms.s1 = theta1(em) ? 1 : 0;
            for (const EntityId& eo : path.mentioned_entities) {
                if (eo == em) continue;
                if (cooccur(eo, em) && theta1(eo)) ++ms.s2;
            }
            // cross-path presence: paths other than this one that mention em
            for (std::size_t j = 0; j < bag.paths.size(); ++j) {
                if (j == i) continue;
                if (bag.paths[j].mentioned_entities.count(em)) ++ms.s3;
            }
            ms.total = mention_total(ms.s1, ms.s2, ms.s3, cfg);
            result[i].emplace(em, std::move(ms));
        }
    }
    return result;
}

CandidateSet rank_sentences(const Bag& bag, const std::vector<PathMentionScores>& scores,
                            const FilterConfig& cfg) {
    std::vector<RankedSentence> all;
    for (std::size_t i = 0; i < bag.paths.size(); ++i) {
        const TextPath& path = bag.paths[i];
        for (int role : {0, 1}) {
            const Document& doc = path_doc(path, role);
            auto sets = sentence_entity_sets(doc);
            for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
                double imp = 0.0;
                if (cfg.entity_filter) {
                    for (const EntityId& e : sets[s]) {
                        auto it = scores[i].find(e);  // bridges only; endpoints absent
                        if (it != scores[i].end()) imp += it->second.total;
                    }
                }
                all.push_back(RankedSentence{
                    SentenceRef{static_cast<int>(i), role, static_cast<int>(s)}, path.path_id,
                    imp});
            }
        }
    }
    std::stable_sort(all.begin(), all.end(), [](const RankedSentence& a, const RankedSentence& b) {
        if (a.importance != b.importance) return a.importance > b.importance;
        return std::tie(a.path_id, a.ref.doc_role, a.ref.sentence_index) <
               std::tie(b.path_id, b.ref.doc_role, b.ref.sentence_index);
    });
    if (static_cast<int>(all.size()) > cfg.top_k) all.resize(cfg.top_k);

    CandidateSet cands;
    cands.sentences = std::move(all);
    return cands;
}

InformativeContext relevance_filter(const CandidateSet& cands, const Context& context,
                                    const Bag& bag, const FilterConfig& cfg) {
    InformativeContext out;
    out.context_tokens = context.tokens();

    int budget = cfg.token_budget - static_cast<int>(out.context_tokens.size());
    if (budget < 0)
        throw FilterError("context tokens (" + std::to_string(out.context_tokens.size()) +
                          ") exceed token budget (" + std::to_string(cfg.token_budget) + ")");

    // Sentences containing the target entity anywhere in the bag are the
    // reference set for relevance.
    std::vector<TfVec> target_vecs;
    for (const TextPath& path : bag.paths) {
        for (int role : {0, 1}) {
            const Document& doc = path_doc(path, role);
            auto sets = sentence_entity_sets(doc);
            for (std::size_t s = 0; s < doc.sentences.size(); ++s)
                if (sets[s].count(bag.target)) target_vecs.push_back(tf_vector(doc.sentences[s]));
        }
    }

    struct Scored {
        RankedSentence rs;
        double relevance;
        int cand_rank;
    };
    std::vector<Scored> scored;
    scored.reserve(cands.sentences.size());
    for (std::size_t c = 0; c < cands.sentences.size(); ++c) {
        const RankedSentence& rs = cands.sentences[c];
        const Document& doc = path_doc(bag.paths[rs.ref.path_index], rs.ref.doc_role);
        double rel = 0.0;
        if (cfg.relevance_filter && !target_vecs.empty()) {
            TfVec v = tf_vector(doc.sentences[rs.ref.sentence_index]);
            for (const TfVec& tv : target_vecs) rel = std::max(rel, cosine(v, tv));
        }
        scored.push_back(Scored{rs, rel, static_cast<int>(c)});
    }

    if (cfg.relevance_filter) {
        std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
            if (a.relevance != b.relevance) return a.relevance > b.relevance;
            if (a.rs.importance != b.rs.importance) return a.rs.importance > b.rs.importance;
            return std::tie(a.rs.path_id, a.rs.ref.doc_role, a.rs.ref.sentence_index) <
                   std::tie(b.rs.path_id, b.rs.ref.doc_role, b.rs.ref.sentence_index);
        });
    }  // keep-all mode: candidate (importance) order

    int max_keep = cfg.relevance_keep > 0 ? cfg.relevance_keep
                                          : static_cast<int>(scored.size());
    int keep_rank = 0;
    for (const Scored& sc : scored) {
        if (keep_rank >= max_keep) break;
        const Document& doc = path_doc(bag.paths[sc.rs.ref.path_index], sc.rs.ref.doc_role);
        int len = static_cast<int>(doc.sentences[sc.rs.ref.sentence_index].size());
        if (len > budget) continue;
        budget -= len;
        out.selected.push_back(SelectedSentence{sc.rs.ref, sc.rs.path_id, sc.rs.importance,
                                                sc.relevance, keep_rank});
        ++keep_rank;
    }

    // output order: context first, then sentences in original document order
    std::sort(out.selected.begin(), out.selected.end(),
              [](const SelectedSentence& a, const SelectedSentence& b) { return a.ref < b.ref; });

    out.flattened_tokens = out.context_tokens;
    for (const SelectedSentence& s : out.selected) {
        const Document& doc = path_doc(bag.paths[s.ref.path_index], s.ref.doc_role);
        const auto& toks = doc.sentences[s.ref.sentence_index];
        out.flattened_tokens.insert(out.flattened_tokens.end(), toks.begin(), toks.end());
    }

    std::uint64_t h = nn::fnv1a(bag.bag_id);
    for (const std::string& t : out.flattened_tokens) {
        h = nn::fnv1a(t, h);
        h = nn::fnv1a("\x1f", h);
    }
    out.content_hash = h;
    return out;
}

}  // namespace kxdoc
