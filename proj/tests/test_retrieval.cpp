#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "kxdoc/retrieval.hpp"
#include "oracles.hpp"

using namespace kxdoc;

namespace {

Document doc_of(const std::string& id, const std::vector<std::string>& tokens,
                const std::vector<EntityId>& entities) {
    Document d;
    d.doc_id = id;
    d.sentences = {tokens};
    int pos = 0;
    for (const EntityId& e : entities) {
        d.mentions.push_back(Mention{e, 0, pos % static_cast<int>(tokens.size()),
                                     pos % static_cast<int>(tokens.size()) + 1});
        ++pos;
    }
    return d;
}

std::vector<Document> random_docs(nn::Rng& rng, int n) {
    std::vector<Document> docs;
    for (int i = 0; i < n; ++i) {
        int len = 4 + static_cast<int>(rng.below(8));
        std::vector<std::string> toks;
        for (int t = 0; t < len; ++t) toks.push_back("w" + std::to_string(rng.below(25)));
        std::vector<EntityId> ents;
        int ne = 1 + static_cast<int>(rng.below(4));
        for (int e = 0; e < ne; ++e) ents.push_back("E" + std::to_string(rng.below(8)));
        if (rng.bernoulli(0.5)) ents.push_back("Es");
        if (rng.bernoulli(0.5)) ents.push_back("Eo");
        docs.push_back(doc_of("d" + std::to_string(i), toks, ents));
    }
    return docs;
}

// dense brute-force TF-IDF cosine
double dense_cosine(const std::vector<Document>& docs, int a, int b) {
    auto terms_of = [](const Document& d) {
        std::map<std::string, double> tf;
        for (const auto& s : d.sentences)
            for (std::string t : s) {
                for (char& c : t) c = static_cast<char>(std::tolower((unsigned char)c));
                tf[t] += 1.0;
            }
        return tf;
    };
    std::map<std::string, int> df;
    std::vector<std::map<std::string, double>> tfs;
    for (const Document& d : docs) {
        tfs.push_back(terms_of(d));
        for (const auto& [t, _] : tfs.back()) df[t] += 1;
    }
    auto vec = [&](int i) {
        std::map<std::string, double> v;
        for (const auto& [t, c] : tfs[i]) v[t] = c * std::log((double)docs.size() / df[t]);
        return v;
    };
    auto va = vec(a), vb = vec(b);
    double dot = 0, na = 0, nb = 0;
    for (const auto& [t, x] : va) na += x * x;
    for (const auto& [t, x] : vb) nb += x * x;
    for (const auto& [t, x] : va) {
        auto it = vb.find(t);
        if (it != vb.end()) dot += x * it->second;
    }
    if (na == 0 || nb == 0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// exhaustive retrieval oracle mirroring the documented scoring rule
std::vector<PathScore> oracle_retrieve(const EntityId& s, const EntityId& o,
                                       const std::vector<Document>& docs,
                                       const RetrievalConfig& cfg) {
    std::vector<PathScore> cands;
    for (std::size_t a = 0; a < docs.size(); ++a) {
        int sc = 0;
        for (const Mention& m : docs[a].mentions) sc += m.entity == s ? 1 : 0;
        if (sc == 0) continue;
        for (std::size_t b = 0; b < docs.size(); ++b) {
            if (a == b) continue;
            int oc = 0;
            for (const Mention& m : docs[b].mentions) oc += m.entity == o ? 1 : 0;
            if (oc == 0) continue;
            std::set<EntityId> ea, eb;
            for (const Mention& m : docs[a].mentions) ea.insert(m.entity);
            for (const Mention& m : docs[b].mentions) eb.insert(m.entity);
            int shared = 0;
            for (const EntityId& e : ea) shared += eb.count(e) ? 1 : 0;
            if (shared == 0) continue;
            PathScore ps;
            ps.source_doc_id = docs[a].doc_id;
            ps.target_doc_id = docs[b].doc_id;
            ps.entity_count = sc + oc;
            ps.shared_entities = shared;
            ps.tfidf_sim = dense_cosine(docs, (int)a, (int)b);
            cands.push_back(ps);
        }
    }
    if (cands.empty()) return {};
    auto mm = [](double x, double lo, double hi) { return hi > lo ? (x - lo) / (hi - lo) : 0.0; };
    double clo = 1e300, chi = -1e300, slo = 1e300, shi = -1e300, tlo = 1e300, thi = -1e300;
    for (auto& p : cands) {
        clo = std::min(clo, (double)p.entity_count);
        chi = std::max(chi, (double)p.entity_count);
        slo = std::min(slo, (double)p.shared_entities);
        shi = std::max(shi, (double)p.shared_entities);
        tlo = std::min(tlo, p.tfidf_sim);
        thi = std::max(thi, p.tfidf_sim);
    }
    for (auto& p : cands)
        p.combined = cfg.w_count * mm(p.entity_count, clo, chi) +
                     cfg.w_shared * mm(p.shared_entities, slo, shi) +
                     cfg.w_tfidf * mm(p.tfidf_sim, tlo, thi);
    std::sort(cands.begin(), cands.end(), [](const PathScore& x, const PathScore& y) {
        if (x.combined != y.combined) return x.combined > y.combined;
        return std::tie(x.source_doc_id, x.target_doc_id) <
               std::tie(y.source_doc_id, y.target_doc_id);
    });
    return cands;
}

}  // namespace

TEST_CASE("single-document corpus has all-zero IDF and zero similarities") {
    std::vector<Document> docs{doc_of("d0", {"a", "b", "a"}, {"Es"})};
    TfIdfIndex idx(docs);
    CHECK(idx.idf("a") == 0.0);
    CHECK(idx.idf("b") == 0.0);
}

TEST_CASE("two identical documents similarity is 0 by the zero-vector convention") {
    std::vector<Document> docs{doc_of("d0", {"x", "y"}, {"Es"}), doc_of("d1", {"x", "y"}, {"Eo"})};
    TfIdfIndex idx(docs);
    CHECK(idx.similarity(0, 1) == 0.0);
}

TEST_CASE("pairwise similarity matches the dense oracle") {
    nn::Rng rng(41);
    for (int round = 0; round < 10; ++round) {
        auto docs = random_docs(rng, 12);
        TfIdfIndex idx(docs);
        for (int a = 0; a < 12; ++a)
            for (int b = 0; b < 12; ++b)
                CHECK(idx.similarity(a, b) ==
                      doctest::Approx(dense_cosine(docs, a, b)).epsilon(1e-9));
    }
}

TEST_CASE("exactly one candidate pair is returned regardless of score") {
    std::vector<Document> docs{doc_of("ds", {"a", "b"}, {"Es", "Eb"}),
                               doc_of("dt", {"c", "d"}, {"Eo", "Eb"}),
                               doc_of("dx", {"e", "f"}, {"Enope"})};
    TfIdfIndex idx(docs);
    auto ranked = retrieve_paths("Es", "Eo", docs, idx, RetrievalConfig{});
    REQUIRE(ranked.size() == 1);
    CHECK(ranked[0].source_doc_id == "ds");
    CHECK(ranked[0].target_doc_id == "dt");
}

TEST_CASE("no shared entity means no candidate") {
    std::vector<Document> docs{doc_of("ds", {"a"}, {"Es"}), doc_of("dt", {"b"}, {"Eo"})};
    TfIdfIndex idx(docs);
    CHECK(retrieve_paths("Es", "Eo", docs, idx, RetrievalConfig{}).empty());
}

TEST_CASE("pareto dominance implies higher rank") {
    // pair (ds1, dt1) dominates (ds2, dt2) on all three components
    std::vector<Document> docs{
        doc_of("ds1", {"common", "common", "extra"}, {"Es", "Es", "Eb", "Ec"}),
        doc_of("ds2", {"plain", "words"}, {"Es", "Eb"}),
        doc_of("dt1", {"common", "common", "tail"}, {"Eo", "Eo", "Eb", "Ec"}),
        doc_of("dt2", {"other", "stuff"}, {"Eo", "Eb"}),
    };
    TfIdfIndex idx(docs);
    auto ranked = retrieve_paths("Es", "Eo", docs, idx, RetrievalConfig{});
    REQUIRE(ranked.size() >= 2);
    CHECK(ranked[0].source_doc_id == "ds1");
    CHECK(ranked[0].target_doc_id == "dt1");
}

TEST_CASE("full ranking equals the exhaustive oracle and top_k is a prefix") {
    nn::Rng rng(42);
    for (int round = 0; round < 15; ++round) {
        auto docs = random_docs(rng, 14);
        TfIdfIndex idx(docs);
        RetrievalConfig cfg;
        cfg.top_k = 1000;
        auto full = retrieve_paths("Es", "Eo", docs, idx, cfg);
        auto want = oracle_retrieve("Es", "Eo", docs, cfg);
        REQUIRE(full.size() == want.size());
        for (std::size_t i = 0; i < full.size(); ++i) {
            CHECK(full[i].source_doc_id == want[i].source_doc_id);
            CHECK(full[i].target_doc_id == want[i].target_doc_id);
            CHECK(full[i].combined == doctest::Approx(want[i].combined).epsilon(1e-9));
        }
        RetrievalConfig small = cfg;
        small.top_k = 3;
        auto top = retrieve_paths("Es", "Eo", docs, idx, small);
        REQUIRE(top.size() == std::min<std::size_t>(3, full.size()));
        for (std::size_t i = 0; i < top.size(); ++i) {
            CHECK(top[i].source_doc_id == full[i].source_doc_id);
            CHECK(top[i].target_doc_id == full[i].target_doc_id);
        }
    }
}

TEST_CASE("ranking is invariant under joint positive weight rescaling") {
    nn::Rng rng(43);
    auto docs = random_docs(rng, 12);
    TfIdfIndex idx(docs);
    RetrievalConfig a;
    RetrievalConfig b;
    b.w_count = 3.7;
    b.w_shared = 3.7;
    b.w_tfidf = 3.7;
    auto ra = retrieve_paths("Es", "Eo", docs, idx, a);
    auto rb = retrieve_paths("Es", "Eo", docs, idx, b);
    REQUIRE(ra.size() == rb.size());
    for (std::size_t i = 0; i < ra.size(); ++i) {
        CHECK(ra[i].source_doc_id == rb[i].source_doc_id);
        CHECK(ra[i].target_doc_id == rb[i].target_doc_id);
    }
}

TEST_CASE("adding shared entities to a candidate never lowers its rank") {
    std::vector<Document> base{
        doc_of("ds1", {"alpha", "beta"}, {"Es", "Eb"}),
        doc_of("ds2", {"gamma", "delta"}, {"Es", "Ec", "Ed"}),
        doc_of("dt", {"alpha", "gamma"}, {"Eo", "Eb", "Ec", "Ed"}),
    };
    TfIdfIndex idx(base);
    auto before = retrieve_paths("Es", "Eo", base, idx, RetrievalConfig{});
    auto rank_of = [](const std::vector<PathScore>& r, const std::string& sid) {
        for (std::size_t i = 0; i < r.size(); ++i)
            if (r[i].source_doc_id == sid) return static_cast<int>(i);
        return -1;
    };
    int before_rank = rank_of(before, "ds1");

    // give ds1 an extra shared entity, everything else unchanged
    auto boosted = base;
    boosted[0].mentions.push_back(Mention{"Ec", 0, 0, 1});
    TfIdfIndex idx2(boosted);
    auto after = retrieve_paths("Es", "Eo", boosted, idx2, RetrievalConfig{});
    CHECK(rank_of(after, "ds1") <= before_rank);
}
