#include "kxdoc/synth.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <vector>

#include "kxdoc/corpus.hpp"
#include "kxdoc/nn/rng.hpp"

namespace kxdoc {

using nlohmann::json;

std::string to_string(SignalChannel c) {
    switch (c) {
        case SignalChannel::Text: return "text";
        case SignalChannel::Context: return "context";
        case SignalChannel::Both: return "both";
    }
    return "both";
}

SignalChannel signal_channel_from_string(const std::string& s) {
    if (s == "text") return SignalChannel::Text;
    if (s == "context") return SignalChannel::Context;
    if (s == "both") return SignalChannel::Both;
    throw SynthError("unknown signal channel: " + s);
}

namespace {

struct GenState {
    nn::Rng rng;
    long next_entity = 1;
    std::map<std::string, std::string> kg_labels;  // id -> label (entities + properties)
    std::vector<Triple> kg_triples;
    std::map<std::string, std::string> kg_types;
    std::vector<Document> all_docs;

    explicit GenState(std::uint64_t seed) : rng(seed) {}

    EntityId fresh_entity(const std::string& label_prefix) {
        EntityId id = "Q" + std::to_string(next_entity++);
        kg_labels[id] = label_prefix + " " + id;
        return id;
    }
};

// Mention surfaces are drawn from small shared pools so held-out bags reuse
// trained token embeddings; entity identity lives in the mention annotation,
// not the surface form.
std::string surface(const std::string& prefix, const EntityId& id, int pool) {
    std::size_t h = nn::fnv1a(id) % static_cast<std::size_t>(pool);
    return prefix + std::to_string(h);
}

std::vector<std::string> filler_tokens(GenState& st, const SynthConfig& cfg, int n) {
    std::vector<std::string> toks;
    for (int i = 0; i < n; ++i)
        toks.push_back("w" + std::to_string(st.rng.below(cfg.filler_vocab)));
    return toks;
}

// One document: filler sentences (optionally mentioning a fresh distractor
// entity), then the signal sentence holding the endpoint and the bridge.
Document make_doc(GenState& st, const SynthConfig& cfg, const std::string& doc_id,
                  const EntityId& endpoint, const std::string& endpoint_surface,
                  const EntityId& bridge, const std::string& signal_token) {
    Document d;
    d.doc_id = doc_id;
    for (int s = 0; s < cfg.filler_sentences; ++s) {
        std::vector<std::string> toks = filler_tokens(st, cfg, cfg.tokens_per_sentence);
        if (st.rng.bernoulli(0.5)) {
            EntityId distractor = st.fresh_entity("noise");
            int pos = static_cast<int>(st.rng.below(toks.size()));
            toks[pos] = surface("dst", distractor, 17);
            d.mentions.push_back(
                Mention{distractor, static_cast<int>(d.sentences.size()), pos, pos + 1});
        }
        d.sentences.push_back(std::move(toks));
    }
    int sidx = static_cast<int>(d.sentences.size());
    std::vector<std::string> sig{endpoint_surface, signal_token, surface("brg", bridge, 20)};
    std::vector<std::string> tail = filler_tokens(st, cfg, 1);
    sig.insert(sig.end(), tail.begin(), tail.end());
    d.mentions.push_back(Mention{endpoint, sidx, 0, 1});
    d.mentions.push_back(Mention{bridge, sidx, 2, 3});
    d.sentences.push_back(std::move(sig));
    return d;
}

struct BagPlan {
    std::string split;
    int relation = -1;  // -1 = NA
    bool planted = false;
};

Bag make_bag(GenState& st, const SynthConfig& cfg, const BagPlan& plan, int bag_index,
             json& manifest_rows) {
    Bag bag;
    bag.bag_id = "b" + std::to_string(bag_index);
    bag.source = st.fresh_entity("src");
    bag.target = st.fresh_entity("tgt");
    st.kg_types[bag.source] = "SrcType";
    st.kg_types[bag.target] = "DstType";

    bool positive = plan.relation >= 0;
    if (positive) bag.gold_relations.insert("rel_" + std::to_string(plan.relation));

    bool text_signal = positive && plan.planted &&
                       (cfg.signal_channel == SignalChannel::Text ||
                        cfg.signal_channel == SignalChannel::Both);
    bool context_signal = positive && plan.planted &&
                          (cfg.signal_channel == SignalChannel::Context ||
                           cfg.signal_channel == SignalChannel::Both);
    std::string sig_token = text_signal ? "relsig_" + std::to_string(plan.relation) : "relsig_na";

    int n_paths = cfg.paths_min + static_cast<int>(st.rng.below(cfg.paths_max - cfg.paths_min + 1));
    std::string src_surface = surface("ent", bag.source, 20);
    std::string tgt_surface = surface("ent", bag.target, 20);
    for (int p = 0; p < n_paths; ++p) {
        EntityId bridge = st.fresh_entity("brg");
        TextPath path;
        path.path_id = bag.bag_id + "#p" + std::to_string(p);
        path.source_doc = make_doc(st, cfg, bag.bag_id + "_p" + std::to_string(p) + "_s",
                                   bag.source, src_surface, bridge, sig_token);
        path.target_doc = make_doc(st, cfg, bag.bag_id + "_p" + std::to_string(p) + "_t",
                                   bag.target, tgt_surface, bridge, sig_token);
        path.mentioned_entities = derive_mentioned_entities(path, bag.source, bag.target);
        bag.paths.push_back(std::move(path));
        st.all_docs.push_back(bag.paths.back().source_doc);
        st.all_docs.push_back(bag.paths.back().target_doc);
    }

    if (context_signal) {
        EntityId mid = st.fresh_entity("mid");
        PropertyId p_sig = "P10" + std::to_string(plan.relation);
        PropertyId p_link = "P2";
        st.kg_labels[p_sig] = "ctx rel " + std::to_string(plan.relation) + " marker";
        st.kg_labels[p_link] = "linked to";
        st.kg_triples.push_back(Triple{bag.source, p_sig, mid});
        st.kg_triples.push_back(Triple{mid, p_link, bag.target});
    }

    manifest_rows.push_back({{"bag_id", bag.bag_id},
                             {"split", plan.split},
                             {"relations", bag.gold_relations},
                             {"planted", plan.planted},
                             {"text_signal", text_signal},
                             {"context_signal", context_signal},
                             {"signal_token", sig_token},
                             {"paths", n_paths}});
    return bag;
}

std::vector<BagPlan> plan_split(GenState& st, const SynthConfig& cfg, const std::string& split,
                                int count) {
    int n_pos = static_cast<int>(std::lround(count * (1.0 - cfg.na_fraction)));
    if (n_pos > 0 && cfg.relations <= 0)
        throw SynthError("infeasible config: positive bags require at least one relation");
    std::vector<BagPlan> plans;
    for (int i = 0; i < count; ++i) {
        BagPlan plan;
        plan.split = split;
        if (i < n_pos) {
            plan.relation = i % cfg.relations;
            plan.planted = st.rng.bernoulli(cfg.planted_strength);
        }
        plans.push_back(plan);
    }
    st.rng.shuffle(plans);
    return plans;
}

}  // namespace

void synthesize_corpus(const SynthConfig& cfg, const std::string& out_dir) {
    if (cfg.bags < 0 || cfg.dev_bags < 0) throw SynthError("negative bag count");
    if (cfg.na_fraction < 0.0 || cfg.na_fraction > 1.0)
        throw SynthError("na_fraction outside [0,1]");
    if (cfg.paths_min < 1 || cfg.paths_max < cfg.paths_min)
        throw SynthError("invalid paths_min/paths_max");
    if (cfg.tokens_per_sentence < 1) throw SynthError("tokens_per_sentence must be >= 1");

    std::filesystem::create_directories(out_dir);
    GenState st(cfg.seed);

    json manifest_rows = json::array();
    std::vector<Bag> train_bags, dev_bags;
    int bag_index = 0;
    for (const BagPlan& plan : plan_split(st, cfg, "train", cfg.bags))
        train_bags.push_back(make_bag(st, cfg, plan, bag_index++, manifest_rows));
    for (const BagPlan& plan : plan_split(st, cfg, "dev", cfg.dev_bags))
        dev_bags.push_back(make_bag(st, cfg, plan, bag_index++, manifest_rows));

    save_corpus(train_bags, out_dir + "/train.jsonl");
    save_corpus(dev_bags, out_dir + "/dev.jsonl");

    {
        std::ofstream rel(out_dir + "/relations.txt");
        for (int r = 0; r < cfg.relations; ++r) rel << "rel_" << r << "\n";
    }
    {
        std::ofstream docs(out_dir + "/docs.jsonl");
        std::vector<Bag> dummy;
        // reuse the corpus writers' document shape
        for (const Document& d : st.all_docs) {
            json j;
            j["doc_id"] = d.doc_id;
            j["sentences"] = d.sentences;
            json ms = json::array();
            for (const Mention& m : d.mentions)
                ms.push_back({{"entity", m.entity},
                              {"sentence_index", m.sentence_index},
                              {"token_start", m.token_start},
                              {"token_end", m.token_end}});
            j["mentions"] = std::move(ms);
            docs << j.dump() << "\n";
        }
    }
    {
        std::ofstream tf(out_dir + "/kg_triples.tsv");
        tf << "# subject\tproperty\tobject\n";
        for (const Triple& t : st.kg_triples)
            tf << t.subject << "\t" << t.property << "\t" << t.object << "\n";
        std::ofstream lf(out_dir + "/kg_labels.tsv");
        for (const auto& [id, label] : st.kg_labels) lf << id << "\t" << label << "\n";
        std::ofstream yf(out_dir + "/kg_types.tsv");
        for (const auto& [id, ty] : st.kg_types) yf << id << "\t" << ty << "\n";
    }

    json manifest;
    manifest["config"] = {{"bags", cfg.bags},
                          {"dev_bags", cfg.dev_bags},
                          {"relations", cfg.relations},
                          {"na_fraction", cfg.na_fraction},
                          {"paths_min", cfg.paths_min},
                          {"paths_max", cfg.paths_max},
                          {"filler_sentences", cfg.filler_sentences},
                          {"tokens_per_sentence", cfg.tokens_per_sentence},
                          {"filler_vocab", cfg.filler_vocab},
                          {"planted_strength", cfg.planted_strength},
                          {"signal_channel", to_string(cfg.signal_channel)},
                          {"seed", cfg.seed}};
    json counts;
    for (const std::string& split : {"train", "dev"}) {
        int pos = 0, na = 0;
        for (const json& row : manifest_rows)
            if (row.at("split") == split) (row.at("relations").empty() ? na : pos) += 1;
        counts[split] = {{"bags", pos + na}, {"positive", pos}, {"na", na}};
    }
    manifest["counts"] = std::move(counts);
    manifest["bags"] = std::move(manifest_rows);
    std::ofstream mf(out_dir + "/manifest.json");
    mf << manifest.dump(2) << "\n";
}

}  // namespace kxdoc
