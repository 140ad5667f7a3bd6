#include "kxdoc/explain.hpp"

#include <algorithm>
#include <json.hpp>
#include <sstream>

namespace kxdoc {

std::string to_string(SpanRole r) {
    switch (r) {
        case SpanRole::Source: return "source";
        case SpanRole::Target: return "target";
        case SpanRole::Bridge: return "bridge";
    }
    return "bridge";
}

Explanation explain(const Bag& bag, const InformativeContext& ictx, const BagScores& scores,
                    const RelationVocabulary& vocab) {
    if (scores.ictx_hash != ictx.content_hash)
        throw ProvenanceError("bag " + bag.bag_id +
                              ": scores were not produced from this filtered input");

    Explanation ex;
    ex.bag_id = bag.bag_id;
    for (int r : scores.predicted) ex.predicted_relations.push_back(vocab.labels[r]);
    ex.context_tokens = ictx.context_tokens;

    for (const SelectedSentence& s : ictx.selected) {
        const TextPath& path = bag.paths[s.ref.path_index];
        const Document& doc = path_doc(path, s.ref.doc_role);
        ExplanationSentence es;
        es.path_id = path.path_id;
        es.doc_id = doc.doc_id;
        es.sentence_index = s.ref.sentence_index;
        es.tokens = doc.sentences[s.ref.sentence_index];
        for (const Mention& m : doc.mentions) {
            if (m.sentence_index != s.ref.sentence_index) continue;
            SpanRole role = m.entity == bag.source   ? SpanRole::Source
                            : m.entity == bag.target ? SpanRole::Target
                                                     : SpanRole::Bridge;
            es.spans.push_back(ExplanationSpan{m.entity, role, m.token_start, m.token_end});
        }
        std::sort(es.spans.begin(), es.spans.end(),
                  [](const ExplanationSpan& a, const ExplanationSpan& b) {
                      return std::tie(a.token_start, a.token_end, a.entity) <
                             std::tie(b.token_start, b.token_end, b.entity);
                  });
        ex.sentences.push_back(std::move(es));
    }
    return ex;
}

namespace {

// Renders one sentence with [role| ...] brackets around tagged spans; nested
// spans bracket outer-first.
std::string render_sentence(const ExplanationSentence& es) {
    int n = static_cast<int>(es.tokens.size());
    std::vector<std::string> prefix(n), suffix(n);
    std::vector<ExplanationSpan> spans = es.spans;
    std::sort(spans.begin(), spans.end(), [](const ExplanationSpan& a, const ExplanationSpan& b) {
        if (a.token_start != b.token_start) return a.token_start < b.token_start;
        if (a.token_end != b.token_end) return a.token_end > b.token_end;
        return a.entity < b.entity;
    });
    for (const ExplanationSpan& sp : spans) {
        prefix[sp.token_start] += "[" + to_string(sp.role) + "| ";
        suffix[sp.token_end - 1] += "]";
    }
    std::ostringstream out;
    for (int p = 0; p < n; ++p) {
        if (p) out << " ";
        out << prefix[p] << es.tokens[p] << suffix[p];
    }
    return out.str();
}

}  // namespace

std::string render_markdown(const Explanation& ex) {
    std::ostringstream out;
    out << "# Explanation for " << ex.bag_id << "\n\n";
    out << "Predicted: ";
    if (ex.predicted_relations.empty()) {
        out << "NA";
    } else {
        for (std::size_t i = 0; i < ex.predicted_relations.size(); ++i) {
            if (i) out << ", ";
            out << ex.predicted_relations[i];
        }
    }
    out << "\n\n";
    if (!ex.context_tokens.empty()) {
        out << "Context: ";
        for (std::size_t i = 0; i < ex.context_tokens.size(); ++i) {
            if (i) out << " ";
            out << "[context| " << ex.context_tokens[i] << "]";
        }
        out << "\n\n";
    }
    for (const ExplanationSentence& es : ex.sentences) {
        out << "- (" << es.path_id << ", " << es.doc_id << ", s" << es.sentence_index << ") "
            << render_sentence(es) << "\n";
    }
    return out.str();
}

std::string render_json(const Explanation& ex) {
    nlohmann::json j;
    j["bag_id"] = ex.bag_id;
    j["predicted_relations"] = ex.predicted_relations;
    j["context_tokens"] = ex.context_tokens;
    nlohmann::json sents = nlohmann::json::array();
    for (const ExplanationSentence& es : ex.sentences) {
        nlohmann::json spans = nlohmann::json::array();
        for (const ExplanationSpan& sp : es.spans)
            spans.push_back({{"entity", sp.entity},
                             {"role", to_string(sp.role)},
                             {"token_start", sp.token_start},
                             {"token_end", sp.token_end}});
        sents.push_back({{"path_id", es.path_id},
                         {"doc_id", es.doc_id},
                         {"sentence_index", es.sentence_index},
                         {"tokens", es.tokens},
                         {"spans", std::move(spans)}});
    }
    j["sentences"] = std::move(sents);
    return j.dump(2);
}

}  // namespace kxdoc
