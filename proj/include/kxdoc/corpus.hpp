#pragma once

#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "kxdoc/kg.hpp"

namespace kxdoc {

struct Mention {
    EntityId entity;
    int sentence_index = 0;
    int token_start = 0;
    int token_end = 0;  // exclusive

    auto operator<=>(const Mention&) const = default;
};

struct Document {
    std::string doc_id;
    std::vector<std::vector<std::string>> sentences;  // pre-tokenized
    std::vector<Mention> mentions;

    bool operator==(const Document&) const = default;
};

// A text path is exactly one (source-doc, target-doc) pair. mentioned_entities
// is derived on load: all entities mentioned in either document minus the
// bag's endpoints.
struct TextPath {
    std::string path_id;
    Document source_doc;
    Document target_doc;
    std::set<EntityId> mentioned_entities;

    bool operator==(const TextPath&) const = default;
};

struct Bag {
    std::string bag_id;
    EntityId source;
    EntityId target;
    std::vector<TextPath> paths;
    std::set<std::string> gold_relations;  // empty means NA

    bool operator==(const Bag&) const = default;
};

struct RelationVocabulary {
    std::vector<std::string> labels;
    std::unordered_map<std::string, int> index;

    int size() const { return static_cast<int>(labels.size()); }
};

struct CorpusError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// corpus.jsonl: one bag per line; relations.txt: one label per line, order
// defines the class index. All bag/document invariants are validated here and
// violations name the offending bag/doc.
std::pair<std::vector<Bag>, RelationVocabulary> load_corpus(const std::string& corpus_path,
                                                            const std::string& vocab_path);

RelationVocabulary load_vocab(const std::string& vocab_path);

// Writes bags back out in the canonical JSONL form (round-trips with
// load_corpus).
void save_corpus(const std::vector<Bag>& bags, const std::string& corpus_path);

// Recomputes TextPath::mentioned_entities from scratch.
std::set<EntityId> derive_mentioned_entities(const TextPath& path, const EntityId& source,
                                             const EntityId& target);

}  // namespace kxdoc
