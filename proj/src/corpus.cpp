#include "kxdoc/corpus.hpp"

#include <fstream>
#include <json.hpp>

namespace kxdoc {

using nlohmann::json;

namespace {

json doc_to_json(const Document& d) {
    json j;
    j["doc_id"] = d.doc_id;
    j["sentences"] = d.sentences;
    json ms = json::array();
    for (const Mention& m : d.mentions) {
        ms.push_back({{"entity", m.entity},
                      {"sentence_index", m.sentence_index},
                      {"token_start", m.token_start},
                      {"token_end", m.token_end}});
    }
    j["mentions"] = std::move(ms);
    return j;
}

Document doc_from_json(const json& j) {
    Document d;
    d.doc_id = j.at("doc_id").get<std::string>();
    d.sentences = j.at("sentences").get<std::vector<std::vector<std::string>>>();
    for (const json& m : j.at("mentions")) {
        d.mentions.push_back(Mention{m.at("entity").get<std::string>(),
                                     m.at("sentence_index").get<int>(),
                                     m.at("token_start").get<int>(),
                                     m.at("token_end").get<int>()});
    }
    return d;
}

void validate_document(const Document& d, const std::string& bag_id) {
    for (const Mention& m : d.mentions) {
        if (m.sentence_index < 0 || m.sentence_index >= static_cast<int>(d.sentences.size()))
            throw CorpusError("bag " + bag_id + " doc " + d.doc_id + ": mention of " + m.entity +
                              " references sentence " + std::to_string(m.sentence_index) +
                              " out of range");
        int len = static_cast<int>(d.sentences[m.sentence_index].size());
        if (m.token_start < 0 || m.token_end <= m.token_start || m.token_end > len)
            throw CorpusError("bag " + bag_id + " doc " + d.doc_id + ": mention span [" +
                              std::to_string(m.token_start) + "," + std::to_string(m.token_end) +
                              ") of " + m.entity + " outside sentence of length " +
                              std::to_string(len));
    }
}

bool mentions_entity(const Document& d, const EntityId& e) {
    for (const Mention& m : d.mentions)
        if (m.entity == e) return true;
    return false;
}

}  // namespace

std::set<EntityId> derive_mentioned_entities(const TextPath& path, const EntityId& source,
                                             const EntityId& target) {
    std::set<EntityId> out;
    for (const Document* d : {&path.source_doc, &path.target_doc})
        for (const Mention& m : d->mentions) out.insert(m.entity);
    out.erase(source);
    out.erase(target);
    return out;
}

RelationVocabulary load_vocab(const std::string& vocab_path) {
    std::ifstream in(vocab_path);
    if (!in) throw CorpusError("cannot open " + vocab_path);
    RelationVocabulary vocab;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line == "NA")
            throw CorpusError("vocabulary must not contain a literal NA label (NA is the empty set)");
        if (vocab.index.count(line)) throw CorpusError("duplicate relation label " + line);
        vocab.index[line] = static_cast<int>(vocab.labels.size());
        vocab.labels.push_back(line);
    }
    return vocab;
}

std::pair<std::vector<Bag>, RelationVocabulary> load_corpus(const std::string& corpus_path,
                                                            const std::string& vocab_path) {
    RelationVocabulary vocab = load_vocab(vocab_path);

    std::ifstream in(corpus_path);
    if (!in) throw CorpusError("cannot open " + corpus_path);

    std::vector<Bag> bags;
    std::unordered_map<std::string, const Document*> seen_docs;  // doc_id -> first occurrence
    std::set<std::string> seen_bag_ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw CorpusError(corpus_path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        Bag bag;
        bag.bag_id = j.at("bag_id").get<std::string>();
        bag.source = j.at("source").get<std::string>();
        bag.target = j.at("target").get<std::string>();
        if (bag.source == bag.target)
            throw CorpusError("bag " + bag.bag_id + ": source equals target");
        if (!seen_bag_ids.insert(bag.bag_id).second)
            throw CorpusError("duplicate bag_id " + bag.bag_id);
        for (const json& r : j.at("gold_relations")) {
            std::string label = r.get<std::string>();
            if (!vocab.index.count(label))
                throw CorpusError("bag " + bag.bag_id + ": unknown relation label " + label);
            bag.gold_relations.insert(label);
        }
        for (const json& pj : j.at("paths")) {
            TextPath p;
            p.path_id = pj.at("path_id").get<std::string>();
            p.source_doc = doc_from_json(pj.at("source_doc"));
            p.target_doc = doc_from_json(pj.at("target_doc"));
            validate_document(p.source_doc, bag.bag_id);
            validate_document(p.target_doc, bag.bag_id);
            if (!mentions_entity(p.source_doc, bag.source))
                throw CorpusError("bag " + bag.bag_id + " path " + p.path_id + ": source doc " +
                                  p.source_doc.doc_id + " has no mention of " + bag.source);
            if (!mentions_entity(p.target_doc, bag.target))
                throw CorpusError("bag " + bag.bag_id + " path " + p.path_id + ": target doc " +
                                  p.target_doc.doc_id + " has no mention of " + bag.target);
            p.mentioned_entities = derive_mentioned_entities(p, bag.source, bag.target);
            bag.paths.push_back(std::move(p));
        }
        if (bag.paths.empty()) throw CorpusError("bag " + bag.bag_id + ": no text paths");

        // A doc_id reused anywhere in the corpus must denote identical content.
        for (const TextPath& p : bag.paths) {
            for (const Document* d : {&p.source_doc, &p.target_doc}) {
                auto [it, inserted] = seen_docs.emplace(d->doc_id, d);
                if (!inserted && !(*it->second == *d))
                    throw CorpusError("bag " + bag.bag_id + ": doc_id " + d->doc_id +
                                      " reused with different content");
            }
        }
        bags.push_back(std::move(bag));
    }
    return {std::move(bags), std::move(vocab)};
}

void save_corpus(const std::vector<Bag>& bags, const std::string& corpus_path) {
    std::ofstream out(corpus_path);
    if (!out) throw CorpusError("cannot open " + corpus_path + " for writing");
    for (const Bag& b : bags) {
        json j;
        j["bag_id"] = b.bag_id;
        j["source"] = b.source;
        j["target"] = b.target;
        j["gold_relations"] = b.gold_relations;
        json paths = json::array();
        for (const TextPath& p : b.paths) {
            paths.push_back({{"path_id", p.path_id},
                             {"source_doc", doc_to_json(p.source_doc)},
                             {"target_doc", doc_to_json(p.target_doc)}});
        }
        j["paths"] = std::move(paths);
        out << j.dump() << "\n";
    }
}

}  // namespace kxdoc
