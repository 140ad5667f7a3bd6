#include "kxdoc/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>

namespace kxdoc {

namespace {

std::string lower(const std::string& s) {
    std::string out = s;
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

TfIdfIndex::TfIdfIndex(const std::vector<Document>& docs) {
    std::unordered_map<std::string, int> df;
    std::vector<std::unordered_map<std::string, double>> tf(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        for (const auto& sent : docs[d].sentences)
            for (const std::string& tok : sent) tf[d][lower(tok)] += 1.0;
        for (const auto& [t, _] : tf[d]) df[t] += 1;
    }
    double n = static_cast<double>(docs.size());
    for (const auto& [t, c] : df) idf_[t] = std::log(n / c);

    vectors_.resize(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        double norm2 = 0.0;
        for (const auto& [t, c] : tf[d]) {
            double w = c * idf_.at(t);
            if (w != 0.0) vectors_[d][t] = w;
            norm2 += w * w;
        }
        if (norm2 > 0.0) {
            double inv = 1.0 / std::sqrt(norm2);
            for (auto& [t, w] : vectors_[d]) w *= inv;
        }
    }
}

double TfIdfIndex::idf(const std::string& term) const {
    auto it = idf_.find(lower(term));
    return it == idf_.end() ? 0.0 : it->second;
}

double TfIdfIndex::similarity(int doc_a, int doc_b) const {
    const auto& a = vectors_[doc_a];
    const auto& b = vectors_[doc_b];
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& big = a.size() <= b.size() ? b : a;
    double dot = 0.0;
    for (const auto& [t, w] : small) {
        auto it = big.find(t);
        if (it != big.end()) dot += w * it->second;
    }
    return dot;  // vectors are L2-normalized; zero vectors give 0
}

std::vector<PathScore> retrieve_paths(const EntityId& source, const EntityId& target,
                                      const std::vector<Document>& docs, const TfIdfIndex& index,
                                      const RetrievalConfig& cfg) {
    std::vector<int> source_docs, target_docs;
    std::vector<std::set<EntityId>> entity_sets(docs.size());
    std::vector<int> source_count(docs.size(), 0), target_count(docs.size(), 0);
    for (std::size_t d = 0; d < docs.size(); ++d) {
        for (const Mention& m : docs[d].mentions) {
            entity_sets[d].insert(m.entity);
            if (m.entity == source) ++source_count[d];
            if (m.entity == target) ++target_count[d];
        }
        if (source_count[d] > 0) source_docs.push_back(static_cast<int>(d));
        if (target_count[d] > 0) target_docs.push_back(static_cast<int>(d));
    }

    std::vector<PathScore> cands;
    for (int sd : source_docs) {
        for (int td : target_docs) {
            if (sd == td) continue;
            int shared = 0;
            const auto& a = entity_sets[sd];
            const auto& b = entity_sets[td];
            const auto& small = a.size() <= b.size() ? a : b;
            const auto& big = a.size() <= b.size() ? b : a;
            for (const EntityId& e : small)
                if (big.count(e)) ++shared;
            if (shared == 0) continue;
            PathScore ps;
            ps.source_doc_id = docs[sd].doc_id;
            ps.target_doc_id = docs[td].doc_id;
            ps.entity_count = source_count[sd] + target_count[td];
            ps.shared_entities = shared;
            ps.tfidf_sim = index.similarity(sd, td);
            cands.push_back(std::move(ps));
        }
    }
    if (cands.empty()) return {};

    // min-max normalize each component across candidates; a constant
    // component contributes 0 for everyone
    auto norm = [](double x, double lo, double hi) {
        return hi > lo ? (x - lo) / (hi - lo) : 0.0;
    };
    double c_lo = 1e300, c_hi = -1e300, s_lo = 1e300, s_hi = -1e300, t_lo = 1e300, t_hi = -1e300;
    for (const PathScore& p : cands) {
        c_lo = std::min(c_lo, static_cast<double>(p.entity_count));
        c_hi = std::max(c_hi, static_cast<double>(p.entity_count));
        s_lo = std::min(s_lo, static_cast<double>(p.shared_entities));
        s_hi = std::max(s_hi, static_cast<double>(p.shared_entities));
        t_lo = std::min(t_lo, p.tfidf_sim);
        t_hi = std::max(t_hi, p.tfidf_sim);
    }
    for (PathScore& p : cands) {
        p.combined = cfg.w_count * norm(p.entity_count, c_lo, c_hi) +
                     cfg.w_shared * norm(p.shared_entities, s_lo, s_hi) +
                     cfg.w_tfidf * norm(p.tfidf_sim, t_lo, t_hi);
    }
    std::sort(cands.begin(), cands.end(), [](const PathScore& a, const PathScore& b) {
        if (a.combined != b.combined) return a.combined > b.combined;
        return std::tie(a.source_doc_id, a.target_doc_id) <
               std::tie(b.source_doc_id, b.target_doc_id);
    });
    if (static_cast<int>(cands.size()) > cfg.top_k) cands.resize(cfg.top_k);
    return cands;
}

std::vector<Document> load_documents(const std::string& docs_path) {
    std::ifstream in(docs_path);
    if (!in) throw CorpusError("cannot open " + docs_path);
    std::vector<Document> docs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw CorpusError(docs_path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        Document d;
        d.doc_id = j.at("doc_id").get<std::string>();
        d.sentences = j.at("sentences").get<std::vector<std::vector<std::string>>>();
        for (const nlohmann::json& m : j.at("mentions")) {
            d.mentions.push_back(Mention{m.at("entity").get<std::string>(),
                                         m.at("sentence_index").get<int>(),
                                         m.at("token_start").get<int>(),
                                         m.at("token_end").get<int>()});
        }
        docs.push_back(std::move(d));
    }
    return docs;
}

Bag bag_from_retrieval(const EntityId& source, const EntityId& target,
                       const std::vector<Document>& docs,
                       const std::unordered_map<std::string, int>& doc_index,
                       const std::vector<PathScore>& ranked, const std::string& bag_id) {
    Bag bag;
    bag.bag_id = bag_id;
    bag.source = source;
    bag.target = target;
    int k = 0;
    for (const PathScore& ps : ranked) {
        TextPath p;
        p.path_id = bag_id + "#r" + std::to_string(k++);
        p.source_doc = docs[doc_index.at(ps.source_doc_id)];
        p.target_doc = docs[doc_index.at(ps.target_doc_id)];
        p.mentioned_entities = derive_mentioned_entities(p, source, target);
        bag.paths.push_back(std::move(p));
    }
    return bag;
}

}  // namespace kxdoc
