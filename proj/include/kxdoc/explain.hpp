#pragma once

#include <string>
#include <vector>

#include "kxdoc/classifier.hpp"
#include "kxdoc/corpus.hpp"
#include "kxdoc/filters.hpp"

namespace kxdoc {

struct ProvenanceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SpanRole { Source, Target, Bridge };

std::string to_string(SpanRole r);

struct ExplanationSpan {
    EntityId entity;
    SpanRole role;
    int token_start = 0;
    int token_end = 0;
};

struct ExplanationSentence {
    std::string path_id;
    std::string doc_id;
    int sentence_index = 0;
    std::vector<std::string> tokens;
    std::vector<ExplanationSpan> spans;
};

// Extractive explanation: exactly the filtered tokens the model consumed,
// with role-tagged entity spans and the aggregated context block. Content
// never goes beyond I*.
struct Explanation {
    std::string bag_id;
    std::vector<std::string> predicted_relations;  // empty = NA
    std::vector<std::string> context_tokens;
    std::vector<ExplanationSentence> sentences;  // in I* order
};

// scores.ictx_hash must match ictx.content_hash (the scores were produced from
// exactly this filtered input).
Explanation explain(const Bag& bag, const InformativeContext& ictx, const BagScores& scores,
                    const RelationVocabulary& vocab);

std::string render_markdown(const Explanation& ex);
std::string render_json(const Explanation& ex);

}  // namespace kxdoc
