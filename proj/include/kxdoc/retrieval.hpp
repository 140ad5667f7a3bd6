#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "kxdoc/corpus.hpp"

namespace kxdoc {

struct RetrievalConfig {
    int top_k = 16;
    double w_count = 1.0;
    double w_shared = 1.0;
    double w_tfidf = 1.0;
};

struct PathScore {
    std::string source_doc_id;
    std::string target_doc_id;
    int entity_count = 0;     // occurrences of e_s in source doc + e_o in target doc
    int shared_entities = 0;  // |entities(source) ∩ entities(target)|
    double tfidf_sim = 0.0;
    double combined = 0.0;  // weighted sum of min-max-normalized components
};

// Inverted TF-IDF index over lowercased tokens. IDF(t) = ln(N/df(t)); document
// vectors are L2-normalized TF*IDF; the similarity of zero vectors is 0.
class TfIdfIndex {
  public:
    explicit TfIdfIndex(const std::vector<Document>& docs);

    double similarity(int doc_a, int doc_b) const;
    double idf(const std::string& term) const;
    int num_docs() const { return static_cast<int>(vectors_.size()); }

  private:
    std::unordered_map<std::string, double> idf_;
    std::vector<std::unordered_map<std::string, double>> vectors_;  // L2-normalized
};

// Candidate pairs: (doc mentioning e_s) x (doc mentioning e_o), distinct docs,
// at least one shared entity. Ranked by combined score descending with
// (source_doc_id, target_doc_id) tie-break, truncated to top_k.
std::vector<PathScore> retrieve_paths(const EntityId& source, const EntityId& target,
                                      const std::vector<Document>& docs, const TfIdfIndex& index,
                                      const RetrievalConfig& cfg);

// Loads a JSONL file of documents (one Document object per line).
std::vector<Document> load_documents(const std::string& docs_path);

// Assembles a bag for the open setting from retrieved paths.
Bag bag_from_retrieval(const EntityId& source, const EntityId& target,
                       const std::vector<Document>& docs,
                       const std::unordered_map<std::string, int>& doc_index,
                       const std::vector<PathScore>& ranked, const std::string& bag_id);

}  // namespace kxdoc
