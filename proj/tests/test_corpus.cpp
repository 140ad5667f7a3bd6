#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unistd.h>

#include "kxdoc/corpus.hpp"
#include "kxdoc/nn/rng.hpp"
#include "kxdoc/synth.hpp"

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
    std::string sub(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("fig1 bag loads with three paths and the expected bridges") {
    auto [bags, vocab] = load_corpus(fixture("fig1/corpus.jsonl"), fixture("fig1/relations.txt"));
    REQUIRE(bags.size() == 1);
    const Bag& bag = bags[0];
    CHECK(bag.paths.size() == 3);
    CHECK(vocab.labels == std::vector<std::string>{"developer"});
    CHECK(bag.gold_relations == std::set<std::string>{"developer"});

    std::set<EntityId> all_mentioned;
    for (const TextPath& p : bag.paths)
        all_mentioned.insert(p.mentioned_entities.begin(), p.mentioned_entities.end());
    for (const EntityId& e : {"Q388", "Q640695", "Q44571"})  // Linux, Qt, GNU
        CHECK(all_mentioned.count(e) == 1);
    CHECK(all_mentioned.count(bag.source) == 0);
    CHECK(all_mentioned.count(bag.target) == 0);
}

TEST_CASE("bag whose docs share nothing beyond the endpoints has empty bridge set") {
    TempDir tmp("corpus_nobridge");
    std::string line =
        R"({"bag_id":"b0","source":"Qs","target":"Qt","gold_relations":[],"paths":[{"path_id":"p0","source_doc":{"doc_id":"ds","sentences":[["alpha","beta"]],"mentions":[{"entity":"Qs","sentence_index":0,"token_start":0,"token_end":1}]},"target_doc":{"doc_id":"dt","sentences":[["gamma","delta"]],"mentions":[{"entity":"Qt","sentence_index":0,"token_start":0,"token_end":1}]}}]})";
    auto corpus = tmp.file("c.jsonl", line + "\n");
    auto rels = tmp.file("r.txt", "rel_a\n");
    auto [bags, vocab] = load_corpus(corpus, rels);
    CHECK(bags[0].paths[0].mentioned_entities.empty());
}

TEST_CASE("span out of range names the bag and doc") {
    TempDir tmp("corpus_badspan");
    std::string line =
        R"({"bag_id":"bx","source":"Qs","target":"Qt","gold_relations":[],"paths":[{"path_id":"p0","source_doc":{"doc_id":"ds","sentences":[["a"]],"mentions":[{"entity":"Qs","sentence_index":0,"token_start":0,"token_end":2}]},"target_doc":{"doc_id":"dt","sentences":[["b"]],"mentions":[{"entity":"Qt","sentence_index":0,"token_start":0,"token_end":1}]}}]})";
    auto corpus = tmp.file("c.jsonl", line + "\n");
    auto rels = tmp.file("r.txt", "rel_a\n");
    CHECK_THROWS_WITH_AS(load_corpus(corpus, rels), doctest::Contains("bx"), CorpusError);
}

TEST_CASE("unknown relation label is a vocabulary error") {
    TempDir tmp("corpus_badrel");
    std::string line =
        R"({"bag_id":"bx","source":"Qs","target":"Qt","gold_relations":["nope"],"paths":[{"path_id":"p0","source_doc":{"doc_id":"ds","sentences":[["a"]],"mentions":[{"entity":"Qs","sentence_index":0,"token_start":0,"token_end":1}]},"target_doc":{"doc_id":"dt","sentences":[["b"]],"mentions":[{"entity":"Qt","sentence_index":0,"token_start":0,"token_end":1}]}}]})";
    auto corpus = tmp.file("c.jsonl", line + "\n");
    auto rels = tmp.file("r.txt", "rel_a\n");
    CHECK_THROWS_WITH_AS(load_corpus(corpus, rels), doctest::Contains("nope"), CorpusError);
}

TEST_CASE("vocabulary rejects a literal NA label") {
    TempDir tmp("vocab_na");
    auto rels = tmp.file("r.txt", "rel_a\nNA\n");
    CHECK_THROWS_AS(load_vocab(rels), CorpusError);
}

TEST_CASE("mentioned_entities equals a brute-force scan") {
    auto [bags, vocab] = load_corpus(fixture("fig1/corpus.jsonl"), fixture("fig1/relations.txt"));
    for (const Bag& bag : bags) {
        for (const TextPath& p : bag.paths) {
            std::set<EntityId> naive;
            for (const Document* d : {&p.source_doc, &p.target_doc})
                for (const Mention& m : d->mentions) naive.insert(m.entity);
            naive.erase(bag.source);
            naive.erase(bag.target);
            CHECK(p.mentioned_entities == naive);
            CHECK(derive_mentioned_entities(p, bag.source, bag.target) == naive);
        }
    }
}

TEST_CASE("corpus round-trips through save and load") {
    auto [bags, vocab] = load_corpus(fixture("fig1/corpus.jsonl"), fixture("fig1/relations.txt"));
    TempDir tmp("corpus_rt");
    save_corpus(bags, tmp.sub("again.jsonl"));
    auto [bags2, vocab2] = load_corpus(tmp.sub("again.jsonl"), fixture("fig1/relations.txt"));
    CHECK(bags == bags2);
}

TEST_CASE("generator is reproducible per seed") {
    TempDir a("synth_a"), b("synth_b");
    SynthConfig cfg;
    cfg.bags = 12;
    cfg.dev_bags = 4;
    cfg.seed = 7;
    synthesize_corpus(cfg, a.path.string());
    synthesize_corpus(cfg, b.path.string());
    for (const char* f : {"train.jsonl", "dev.jsonl", "relations.txt", "docs.jsonl",
                          "kg_triples.tsv", "kg_labels.tsv", "kg_types.tsv", "manifest.json"})
        CHECK(slurp(a.sub(f)) == slurp(b.sub(f)));

    TempDir c("synth_c");
    SynthConfig other = cfg;
    other.seed = 8;
    synthesize_corpus(other, c.path.string());
    CHECK(slurp(a.sub("train.jsonl")) != slurp(c.sub("train.jsonl")));
}

TEST_CASE("loader counts match the generator manifest") {
    TempDir tmp("synth_counts");
    SynthConfig cfg;
    cfg.bags = 50;
    cfg.dev_bags = 10;
    cfg.seed = 3;
    synthesize_corpus(cfg, tmp.path.string());
    auto [bags, vocab] = load_corpus(tmp.sub("train.jsonl"), tmp.sub("relations.txt"));
    REQUIRE(bags.size() == 50);

    nlohmann::json manifest = nlohmann::json::parse(slurp(tmp.sub("manifest.json")));
    int pos = 0, na = 0;
    for (const Bag& b : bags) (b.gold_relations.empty() ? na : pos) += 1;
    CHECK(pos == manifest["counts"]["train"]["positive"].get<int>());
    CHECK(na == manifest["counts"]["train"]["na"].get<int>());
}

TEST_CASE("planted strength 1.0 plants a scannable signal in every positive bag") {
    TempDir tmp("synth_plant");
    SynthConfig cfg;
    cfg.bags = 30;
    cfg.dev_bags = 0;
    cfg.planted_strength = 1.0;
    cfg.signal_channel = SignalChannel::Text;
    cfg.seed = 5;
    synthesize_corpus(cfg, tmp.path.string());
    auto [bags, vocab] = load_corpus(tmp.sub("train.jsonl"), tmp.sub("relations.txt"));
    for (const Bag& bag : bags) {
        if (bag.gold_relations.empty()) continue;
        int rel = vocab.index.at(*bag.gold_relations.begin());
        std::string token = "relsig_" + std::to_string(rel);
        bool found = false;
        for (const TextPath& p : bag.paths)
            for (const Document* d : {&p.source_doc, &p.target_doc})
                for (const auto& sent : d->sentences)
                    for (const std::string& t : sent)
                        if (t == token) found = true;
        CHECK_MESSAGE(found, "bag ", bag.bag_id, " missing ", token);
    }
}

TEST_CASE("zero bags produce an empty corpus and an empty manifest") {
    TempDir tmp("synth_zero");
    SynthConfig cfg;
    cfg.bags = 0;
    cfg.dev_bags = 0;
    synthesize_corpus(cfg, tmp.path.string());
    CHECK(slurp(tmp.sub("train.jsonl")).empty());
    auto [bags, vocab] = load_corpus(tmp.sub("train.jsonl"), tmp.sub("relations.txt"));
    CHECK(bags.empty());
    nlohmann::json manifest = nlohmann::json::parse(slurp(tmp.sub("manifest.json")));
    CHECK(manifest["counts"]["train"]["bags"].get<int>() == 0);
    CHECK(manifest["bags"].empty());
}

TEST_CASE("infeasible generator config is rejected") {
    TempDir tmp("synth_bad");
    SynthConfig cfg;
    cfg.bags = 10;
    cfg.relations = 0;
    cfg.na_fraction = 0.0;
    CHECK_THROWS_AS(synthesize_corpus(cfg, tmp.path.string()), SynthError);
}

TEST_CASE("generated corpora pass full load validation") {
    TempDir tmp("synth_valid");
    SynthConfig cfg;
    cfg.bags = 20;
    cfg.dev_bags = 8;
    cfg.signal_channel = SignalChannel::Both;
    synthesize_corpus(cfg, tmp.path.string());
    CHECK_NOTHROW(load_corpus(tmp.sub("train.jsonl"), tmp.sub("relations.txt")));
    CHECK_NOTHROW(load_corpus(tmp.sub("dev.jsonl"), tmp.sub("relations.txt")));
    CHECK_NOTHROW(load_kg(tmp.sub("kg_triples.tsv"), tmp.sub("kg_labels.tsv"),
                          tmp.sub("kg_types.tsv")));
}
