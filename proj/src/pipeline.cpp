#include "kxdoc/pipeline.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <json.hpp>

namespace kxdoc {

using nlohmann::json;

PreparedBag prepare_bag(const Bag& bag, const KnowledgeGraph& kg, const RelationVocabulary& vocab,
                        const PipelineConfig& cfg, ContextCache& cache,
                        ContextDiagnostics* diag) {
    PreparedBag prep;
    prep.bag_id = bag.bag_id;
    for (const std::string& label : bag.gold_relations) prep.gold.insert(vocab.index.at(label));
    for (const TextPath& p : bag.paths) prep.path_ids.push_back(p.path_id);

    prep.context = cache.get(kg, bag.source, bag.target, {cfg.hops, cfg.mode}, diag);

    auto scores = score_mentions(bag, cfg.filter);
    CandidateSet cands = rank_sentences(bag, scores, cfg.filter);
    prep.ictx = relevance_filter(cands, prep.context, bag, cfg.filter);
    prep.seq = mark_sequence(prep.ictx, bag, cfg.enc.max_positions);

    std::set<EntityId> with_embedding;
    for (const MarkedSpan& sp : prep.seq.spans) with_embedding.insert(sp.entity);

    std::map<EntityId, double> bridge_scores;
    for (const auto& path_scores : scores)
        for (const auto& [e, ms] : path_scores) {
            auto it = bridge_scores.find(e);
            if (it == bridge_scores.end() || ms.total > it->second) bridge_scores[e] = ms.total;
        }

    prep.entities = matrix_entities(bag, with_embedding, bridge_scores, cfg.rea.entity_cap);

    int n = static_cast<int>(prep.entities.size());
    prep.path_masks.resize(bag.paths.size());
    for (std::size_t i = 0; i < bag.paths.size(); ++i) {
        std::vector<std::uint8_t> in_path(n, 0);
        for (int u = 0; u < n; ++u) {
            const EntityId& e = prep.entities[u];
            in_path[u] = (e == bag.source || e == bag.target ||
                          bag.paths[i].mentioned_entities.count(e) > 0)
                             ? 1
                             : 0;
        }
        std::vector<std::uint8_t>& mask = prep.path_masks[i];
        mask.assign(static_cast<std::size_t>(n) * n, 0);
        for (int u = 0; u < n; ++u)
            if (in_path[u])
                for (int v = 0; v < n; ++v)
                    if (in_path[v]) mask[static_cast<std::size_t>(u) * n + v] = 1;
    }
    return prep;
}

Model::Model(const PipelineConfig& cfg, const RelationVocabulary& vocab, std::uint64_t seed)
    : cfg_(cfg), vocab_(vocab) {
    nn::Rng rng(seed);
    encoder_ = std::make_unique<Encoder>(cfg.enc, rng);
    reasoner_ = std::make_unique<Reasoner>(cfg.enc.embed_dim, cfg.rea, rng);
    classifier_ = std::make_unique<Classifier>(cfg.enc.embed_dim, vocab.size(), rng);
}

Model::BagForward Model::forward(const PreparedBag& prep) {
    BagForward f;
    f.enc = encoder_->encode(prep.seq);
    nn::Mat entity_emb = pool_entity_embeddings(prep.entities, f.enc.spans, cfg_.enc.embed_dim,
                                                &f.pool_sources);
    f.rea = reasoner_->run(prep.entities, entity_emb, prep.path_ids, prep.path_masks);
    f.scores = classifier_->score_bag(f.rea.reps, cfg_.theta, f.clf);
    f.scores.ictx_hash = prep.ictx.content_hash;
    return f;
}

void Model::backward(BagForward& fwd, const PreparedBag& prep, const std::vector<double>& dpooled) {
    auto dreps = classifier_->backward(fwd.clf, fwd.scores, dpooled);
    nn::Mat dent = reasoner_->backward(fwd.rea, dreps);

    std::vector<std::vector<double>> dspans(fwd.enc.spans.size(),
                                            std::vector<double>(cfg_.enc.embed_dim, 0.0));
    for (std::size_t i = 0; i < prep.entities.size(); ++i) {
        const std::vector<int>& src = fwd.pool_sources[i];
        if (src.empty()) continue;
        double inv = 1.0 / src.size();
        const double* row = dent.row(static_cast<int>(i));
        for (int k : src)
            for (int j = 0; j < cfg_.enc.embed_dim; ++j) dspans[k][j] += inv * row[j];
    }
    encoder_->backward(fwd.enc, dspans);
}

double Model::loss(const BagScores& scores, const std::set<int>& gold) const {
    return bag_loss(scores.pooled, gold, cfg_.theta, cfg_.loss_variant);
}

std::vector<double> Model::loss_grad(const BagScores& scores, const std::set<int>& gold) const {
    return bag_loss_grad(scores.pooled, gold, cfg_.theta, cfg_.loss_variant);
}

std::vector<nn::Param*> Model::parameters() {
    std::vector<nn::Param*> out;
    encoder_->collect(out);
    reasoner_->collect(out);
    classifier_->collect(out);
    return out;
}

void Model::zero_grad() {
    for (nn::Param* p : parameters()) p->zero_grad();
}

namespace {

json pipeline_config_to_json(const PipelineConfig& c) {
    json j;
    j["mode"] = to_string(c.mode);
    j["hops"] = c.hops;
    j["filter"] = {{"lambda", c.filter.lambda_w},
                   {"eta", c.filter.eta_w},
                   {"kappa", c.filter.kappa_w},
                   {"top_k", c.filter.top_k},
                   {"relevance_keep", c.filter.relevance_keep},
                   {"token_budget", c.filter.token_budget},
                   {"entity_filter", c.filter.entity_filter},
                   {"relevance_filter", c.filter.relevance_filter},
                   {"theta1_requires_both", c.filter.theta1_requires_both}};
    j["encoder"] = {{"embed_dim", c.enc.embed_dim},
                    {"num_layers", c.enc.num_layers},
                    {"num_heads", c.enc.num_heads},
                    {"vocab_hash_buckets", c.enc.vocab_hash_buckets},
                    {"max_positions", c.enc.max_positions}};
    j["reasoner"] = {{"num_layers", c.rea.num_layers},
                     {"num_heads", c.rea.num_heads},
                     {"masked_readout", c.rea.masked_readout},
                     {"entity_cap", c.rea.entity_cap}};
    j["loss_variant"] = c.loss_variant == LossVariant::Adaptive ? "adaptive" : "literal";
    j["theta"] = c.theta;
    return j;
}

PipelineConfig pipeline_config_from_json(const json& j) {
    PipelineConfig c;
    c.mode = context_mode_from_string(j.at("mode").get<std::string>()).value();
    c.hops = j.at("hops").get<int>();
    const json& f = j.at("filter");
    c.filter.lambda_w = f.at("lambda").get<double>();
    c.filter.eta_w = f.at("eta").get<double>();
    c.filter.kappa_w = f.at("kappa").get<double>();
    c.filter.top_k = f.at("top_k").get<int>();
    c.filter.relevance_keep = f.at("relevance_keep").get<int>();
    c.filter.token_budget = f.at("token_budget").get<int>();
    c.filter.entity_filter = f.at("entity_filter").get<bool>();
    c.filter.relevance_filter = f.at("relevance_filter").get<bool>();
    c.filter.theta1_requires_both = f.at("theta1_requires_both").get<bool>();
    const json& e = j.at("encoder");
    c.enc.embed_dim = e.at("embed_dim").get<int>();
    c.enc.num_layers = e.at("num_layers").get<int>();
    c.enc.num_heads = e.at("num_heads").get<int>();
    c.enc.vocab_hash_buckets = e.at("vocab_hash_buckets").get<int>();
    c.enc.max_positions = e.at("max_positions").get<int>();
    const json& r = j.at("reasoner");
    c.rea.num_layers = r.at("num_layers").get<int>();
    c.rea.num_heads = r.at("num_heads").get<int>();
    c.rea.masked_readout = r.at("masked_readout").get<bool>();
    c.rea.entity_cap = r.at("entity_cap").get<int>();
    c.loss_variant = j.at("loss_variant").get<std::string>() == "literal" ? LossVariant::Literal
                                                                          : LossVariant::Adaptive;
    c.theta = j.at("theta").get<double>();
    return c;
}

constexpr char kMagic[8] = {'K', 'X', 'C', 'K', 'P', 'T', '1', '\n'};

}  // namespace

void Model::save(const std::string& path) const {
    json manifest;
    manifest["config"] = pipeline_config_to_json(cfg_);
    manifest["relations"] = vocab_.labels;
    json tensors = json::array();

    auto params = const_cast<Model*>(this)->parameters();
    for (const nn::Param* p : params)
        tensors.push_back({{"name", p->name}, {"rows", p->w.rows}, {"cols", p->w.cols}});
    manifest["tensors"] = std::move(tensors);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(kMagic, sizeof(kMagic));
    std::string mstr = manifest.dump();
    std::uint64_t mlen = mstr.size();
    out.write(reinterpret_cast<const char*>(&mlen), sizeof(mlen));
    out.write(mstr.data(), static_cast<std::streamsize>(mstr.size()));
    for (const nn::Param* p : params)
        out.write(reinterpret_cast<const char*>(p->w.a.data()),
                  static_cast<std::streamsize>(p->w.a.size() * sizeof(double)));
}

Model Model::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error(path + ": not a checkpoint file");
    std::uint64_t mlen = 0;
    in.read(reinterpret_cast<char*>(&mlen), sizeof(mlen));
    std::string mstr(mlen, '\0');
    in.read(mstr.data(), static_cast<std::streamsize>(mlen));
    json manifest = json::parse(mstr);

    PipelineConfig cfg = pipeline_config_from_json(manifest.at("config"));
    RelationVocabulary vocab;
    for (const json& l : manifest.at("relations")) {
        std::string label = l.get<std::string>();
        vocab.index[label] = static_cast<int>(vocab.labels.size());
        vocab.labels.push_back(label);
    }

    Model model(cfg, vocab, /*seed=*/0);
    auto params = model.parameters();
    const json& tensors = manifest.at("tensors");
    if (tensors.size() != params.size())
        throw std::runtime_error(path + ": tensor count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        const json& t = tensors[i];
        if (t.at("name") != params[i]->name || t.at("rows") != params[i]->w.rows ||
            t.at("cols") != params[i]->w.cols)
            throw std::runtime_error(path + ": tensor shape mismatch for " + params[i]->name);
        in.read(reinterpret_cast<char*>(params[i]->w.a.data()),
                static_cast<std::streamsize>(params[i]->w.a.size() * sizeof(double)));
    }
    if (!in) throw std::runtime_error(path + ": truncated checkpoint");
    return model;
}

}  // namespace kxdoc
