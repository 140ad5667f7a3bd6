#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <unistd.h>

#include "kxdoc/kg.hpp"
#include "kxdoc/nn/rng.hpp"

using namespace kxdoc;

namespace {

std::string fixture(const std::string& rel) { return std::string(KXDOC_FIXTURES) + "/" + rel; }

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("kxdoc_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name, const std::string& content) const {
        std::string p = (path / name).string();
        std::ofstream out(p);
        out << content;
        return p;
    }
};

KnowledgeGraph load_fig3(bool undirected = true) {
    return load_kg(fixture("fig3/triples.tsv"), fixture("fig3/labels.tsv"),
                   fixture("fig3/types.tsv"), undirected);
}

}  // namespace

TEST_CASE("fig3 fixture loads with expected shape") {
    KnowledgeGraph g = load_fig3();
    CHECK(g.triples.size() == 5);
    CHECK(g.entity_labels.size() == 6);
    CHECK(g.property_labels.size() == 5);

    auto& adj = neighbors(g, "Q6196505");
    REQUIRE(adj.size() == 1);
    CHECK(adj[0].first == "P31");
    CHECK(g.property_labels.at(adj[0].first) == "instance of");
    CHECK(g.entity_labels.at(adj[0].second) == "Human");
}

TEST_CASE("entity types resolve per the type map") {
    KnowledgeGraph g = load_fig3();
    CHECK(get_entity_type(g, "Q6196505") == "Person");
    CHECK(get_entity_type(g, "Q1140152") == "GeoPoliticalEntity");
    CHECK_FALSE(get_entity_type(g, "Q42").has_value());  // untyped intermediate
    CHECK_FALSE(get_entity_type(g, "Q999").has_value());
}

TEST_CASE("neighbors of unknown entity is empty") {
    KnowledgeGraph g = load_fig3();
    CHECK(neighbors(g, "Qnope").empty());
}

TEST_CASE("empty files load to empty graph") {
    TempDir tmp("kg_empty");
    auto t = tmp.file("t.tsv", "");
    auto l = tmp.file("l.tsv", "");
    auto y = tmp.file("y.tsv", "");
    KnowledgeGraph g = load_kg(t, l, y);
    CHECK(g.triples.empty());
    CHECK(g.entity_labels.empty());
}

TEST_CASE("malformed line reports file and line number") {
    TempDir tmp("kg_bad");
    auto t = tmp.file("t.tsv", "Q1\tP1\tQ2\nQ3 only two fields\n");
    auto l = tmp.file("l.tsv", "Q1\ta\nQ2\tb\nP1\tp\n");
    auto y = tmp.file("y.tsv", "");
    CHECK_THROWS_WITH_AS(load_kg(t, l, y), doctest::Contains(":2:"), KgError);
}

TEST_CASE("triple referencing unlabeled entity is an integrity error listing offenders") {
    TempDir tmp("kg_dangle");
    auto t = tmp.file("t.tsv", "Q1\tP1\tQ2\n");
    auto l = tmp.file("l.tsv", "Q1\ta\nP1\tp\n");
    auto y = tmp.file("y.tsv", "");
    CHECK_THROWS_WITH_AS(load_kg(t, l, y), doctest::Contains("Q2"), KgError);
}

TEST_CASE("comment lines are skipped") {
    TempDir tmp("kg_comment");
    auto t = tmp.file("t.tsv", "# header\nQ1\tP1\tQ2\n");
    auto l = tmp.file("l.tsv", "Q1\ta\nQ2\tb\nP1\tp\n");
    auto y = tmp.file("y.tsv", "# none\n");
    KnowledgeGraph g = load_kg(t, l, y);
    CHECK(g.triples.size() == 1);
}

namespace {

std::vector<Triple> random_graph_files(kxdoc::nn::Rng& rng, int entities, int edges,
                                       std::string& triples_tsv, std::string& labels_tsv) {
    std::set<Triple> tset;
    for (int i = 0; i < edges; ++i) {
        tset.insert(Triple{"Q" + std::to_string(rng.below(entities)),
                           "P" + std::to_string(rng.below(8)),
                           "Q" + std::to_string(rng.below(entities))});
    }
    for (int e = 0; e < entities; ++e)
        labels_tsv += "Q" + std::to_string(e) + "\tentity " + std::to_string(e) + "\n";
    for (int p = 0; p < 8; ++p)
        labels_tsv += "P" + std::to_string(p) + "\tprop " + std::to_string(p) + "\n";
    for (const Triple& t : tset)
        triples_tsv += t.subject + "\t" + t.property + "\t" + t.object + "\n";
    return {tset.begin(), tset.end()};
}

}  // namespace

TEST_CASE("adjacency reflects the triple multiset exactly (directed load)") {
    kxdoc::nn::Rng rng(401);
    TempDir tmp("kg_prop");
    for (int round = 0; round < 20; ++round) {
        std::string ttsv, ltsv;
        auto triples = random_graph_files(rng, 30, 120, ttsv, ltsv);
        auto t = tmp.file("t" + std::to_string(round) + ".tsv", ttsv);
        auto l = tmp.file("l" + std::to_string(round) + ".tsv", ltsv);
        auto y = tmp.file("y" + std::to_string(round) + ".tsv", "");
        KnowledgeGraph g = load_kg(t, l, y, /*undirected=*/false);

        std::set<Triple> flattened;
        std::size_t edge_count = 0;
        for (const auto& [subj, edges] : g.out_adjacency) {
            edge_count += edges.size();
            for (const Edge& e : edges) flattened.insert(Triple{subj, e.first, e.second});
            CHECK(std::is_sorted(edges.begin(), edges.end()));
        }
        CHECK(edge_count == triples.size());
        CHECK(flattened == std::set<Triple>(triples.begin(), triples.end()));

        // full-scan oracle for neighbors()
        EntityId probe = "Q" + std::to_string(rng.below(30));
        std::vector<Edge> expect;
        for (const Triple& tr : triples)
            if (tr.subject == probe) expect.push_back({tr.property, tr.object});
        std::sort(expect.begin(), expect.end());
        CHECK(neighbors(g, probe) == expect);
    }
}

TEST_CASE("undirected load adds reverse edges with the same property") {
    TempDir tmp("kg_undir");
    auto t = tmp.file("t.tsv", "Q1\tP1\tQ2\n");
    auto l = tmp.file("l.tsv", "Q1\ta\nQ2\tb\nP1\tp\n");
    auto y = tmp.file("y.tsv", "");
    KnowledgeGraph g = load_kg(t, l, y, /*undirected=*/true);
    CHECK(neighbors(g, "Q2") == std::vector<Edge>{{"P1", "Q1"}});
    CHECK(g.triples.size() == 1);  // stored triples keep the file's direction
}

TEST_CASE("1000 random triples over 100 entities: per-subject recount oracle") {
    kxdoc::nn::Rng rng(77);
    TempDir tmp("kg_1000");
    std::string ttsv, ltsv;
    std::set<Triple> tset;
    while (tset.size() < 1000) {
        tset.insert(Triple{"Q" + std::to_string(rng.below(100)),
                           "P" + std::to_string(rng.below(20)),
                           "Q" + std::to_string(rng.below(100))});
    }
    for (int e = 0; e < 100; ++e) ltsv += "Q" + std::to_string(e) + "\te" + std::to_string(e) + "\n";
    for (int p = 0; p < 20; ++p) ltsv += "P" + std::to_string(p) + "\tp" + std::to_string(p) + "\n";
    for (const Triple& t : tset) ttsv += t.subject + "\t" + t.property + "\t" + t.object + "\n";
    auto t = tmp.file("t.tsv", ttsv);
    auto l = tmp.file("l.tsv", ltsv);
    auto y = tmp.file("y.tsv", "");
    KnowledgeGraph g = load_kg(t, l, y, /*undirected=*/false);

    std::size_t total = 0;
    for (int e = 0; e < 100; ++e) {
        EntityId id = "Q" + std::to_string(e);
        std::size_t naive = 0;
        for (const Triple& tr : tset)
            if (tr.subject == id) ++naive;
        CHECK(neighbors(g, id).size() == naive);
        total += naive;
    }
    CHECK(total == 1000);
}

TEST_CASE("loading the same files twice is byte-identical under serialization") {
    KnowledgeGraph a = load_fig3();
    KnowledgeGraph b = load_fig3();
    CHECK(serialize_kg(a) == serialize_kg(b));
    CHECK_FALSE(serialize_kg(a).empty());
}
