#include "kxdoc/encoder.hpp"

#include <algorithm>
#include <map>

namespace kxdoc {

namespace {

struct SentencePiece {
    SentenceRef ref;
    int path_index;
    int keep_rank;
    const std::vector<std::string>* tokens;
    std::vector<Mention> mentions;  // mentions inside this sentence
};

// Emits one sentence with entity markers; appends adjusted spans.
void emit_sentence(const SentencePiece& sp, std::vector<std::string>& out,
                   std::vector<MarkedSpan>& spans) {
    std::vector<Mention> ms = sp.mentions;
    std::sort(ms.begin(), ms.end(), [](const Mention& a, const Mention& b) {
        if (a.token_start != b.token_start) return a.token_start < b.token_start;
        if (a.token_end != b.token_end) return a.token_end > b.token_end;  // outer first
        return a.entity < b.entity;
    });
    // reject partial overlaps (outer-first nesting is fine)
    for (std::size_t i = 0; i + 1 < ms.size(); ++i) {
        for (std::size_t j = i + 1; j < ms.size(); ++j) {
            const Mention& a = ms[i];
            const Mention& b = ms[j];
            if (b.token_start >= a.token_end) break;
            if (b.token_end > a.token_end)
                throw MarkError("unresolvable overlapping mentions of " + a.entity + " and " +
                                b.entity + " in sentence " + std::to_string(a.sentence_index));
        }
    }

    int n = static_cast<int>(sp.tokens->size());
    std::vector<std::vector<int>> opens(n + 1), closes(n + 1);
    for (std::size_t k = 0; k < ms.size(); ++k) {
        opens[ms[k].token_start].push_back(static_cast<int>(k));  // already outer-first
        closes[ms[k].token_end].push_back(static_cast<int>(k));
    }
    for (auto& v : closes) std::reverse(v.begin(), v.end());  // inner closes first

    std::vector<MarkedSpan> local(ms.size());
    for (int p = 0; p <= n; ++p) {
        for (int k : closes[p]) {
            local[k].end = static_cast<int>(out.size());
            out.push_back(kEntityClose);
        }
        if (p == n) break;
        for (int k : opens[p]) {
            out.push_back(kEntityOpen);
            local[k].start = static_cast<int>(out.size());
        }
        out.push_back((*sp.tokens)[p]);
    }
    for (std::size_t k = 0; k < ms.size(); ++k) {
        local[k].entity = ms[k].entity;
        local[k].path_index = sp.path_index;
        spans.push_back(local[k]);
    }
}

MarkedSequence build_marked(const std::vector<std::string>& context_tokens,
                            const std::vector<SentencePiece>& pieces) {
    MarkedSequence seq;
    if (!context_tokens.empty()) {
        seq.tokens.push_back(kContextOpen);
        int start = static_cast<int>(seq.tokens.size());
        seq.tokens.insert(seq.tokens.end(), context_tokens.begin(), context_tokens.end());
        seq.context_span = {start, static_cast<int>(seq.tokens.size())};
        seq.tokens.push_back(kContextClose);
    }
    for (const SentencePiece& sp : pieces) emit_sentence(sp, seq.tokens, seq.spans);
    return seq;
}

}  // namespace

MarkedSequence mark_sequence(const InformativeContext& ictx, const Bag& bag, int max_positions) {
    std::vector<SentencePiece> pieces;
    for (const SelectedSentence& s : ictx.selected) {
        const Document& doc = path_doc(bag.paths[s.ref.path_index], s.ref.doc_role);
        SentencePiece sp;
        sp.ref = s.ref;
        sp.path_index = s.ref.path_index;
        sp.keep_rank = s.keep_rank;
        sp.tokens = &doc.sentences[s.ref.sentence_index];
        for (const Mention& m : doc.mentions)
            if (m.sentence_index == s.ref.sentence_index) sp.mentions.push_back(m);
        pieces.push_back(std::move(sp));
    }

    while (true) {
        MarkedSequence seq = build_marked(ictx.context_tokens, pieces);
        if (static_cast<int>(seq.tokens.size()) <= max_positions) return seq;
        if (pieces.empty())
            throw MarkError("marked context block alone exceeds max positions (" +
                            std::to_string(seq.tokens.size()) + " > " +
                            std::to_string(max_positions) + ")");
        // drop the lowest-priority sentence and retry
        auto victim = std::max_element(
            pieces.begin(), pieces.end(),
            [](const SentencePiece& a, const SentencePiece& b) { return a.keep_rank < b.keep_rank; });
        pieces.erase(victim);
    }
}

Encoder::Encoder(const EncoderConfig& cfg, nn::Rng& rng)
    : cfg_(cfg),
      tok_emb_("enc.tok_emb", cfg.vocab_hash_buckets, cfg.embed_dim),
      pos_emb_("enc.pos_emb", cfg.max_positions, cfg.embed_dim) {
    if (cfg.embed_dim % cfg.num_heads != 0)
        throw std::invalid_argument("embed_dim must be divisible by num_heads");
    nn::xavier_init(tok_emb_.w, rng);
    nn::xavier_init(pos_emb_.w, rng);
    for (int l = 0; l < cfg.num_layers; ++l) {
        blocks_.emplace_back("enc.block" + std::to_string(l), cfg.embed_dim, cfg.num_heads);
        blocks_.back().init(rng);
    }
}

std::size_t Encoder::token_id(const std::string& token) const {
    return nn::fnv1a(token) % static_cast<std::size_t>(cfg_.vocab_hash_buckets);
}

Encoder::Forward Encoder::encode(const MarkedSequence& seq) {
    int L = static_cast<int>(seq.tokens.size());
    if (L > cfg_.max_positions)
        throw std::invalid_argument("sequence length " + std::to_string(L) +
                                    " exceeds max positions " + std::to_string(cfg_.max_positions));
    Forward f;
    f.token_ids.reserve(L);
    f.x0 = nn::Mat(L, cfg_.embed_dim);
    for (int i = 0; i < L; ++i) {
        std::size_t id = token_id(seq.tokens[i]);
        f.token_ids.push_back(id);
        const double* te = tok_emb_.w.row(static_cast<int>(id));
        const double* pe = pos_emb_.w.row(i);
        double* xi = f.x0.row(i);
        for (int j = 0; j < cfg_.embed_dim; ++j) xi[j] = te[j] + pe[j];
    }

    nn::Mat x = f.x0;
    f.caches.resize(blocks_.size());
    for (std::size_t l = 0; l < blocks_.size(); ++l) x = blocks_[l].forward(x, nullptr, f.caches[l]);
    f.out = std::move(x);

    // group mentions by (entity, path) in first-seen order
    std::map<std::pair<EntityId, int>, int> group_of;
    for (const MarkedSpan& sp : seq.spans) {
        auto key = std::make_pair(sp.entity, sp.path_index);
        auto it = group_of.find(key);
        int gi;
        if (it == group_of.end()) {
            gi = static_cast<int>(f.spans.size());
            group_of.emplace(key, gi);
            SpanEmbedding se;
            se.entity = sp.entity;
            se.path_index = sp.path_index;
            se.vec.assign(cfg_.embed_dim, 0.0);
            f.spans.push_back(std::move(se));
            f.span_sources.emplace_back();
        } else {
            gi = it->second;
        }
        f.span_sources[gi].push_back({sp.start, sp.end});
    }
    for (std::size_t g = 0; g < f.spans.size(); ++g) {
        std::vector<double>& acc = f.spans[g].vec;
        for (const auto& [start, end] : f.span_sources[g]) {
            double inv = 1.0 / (end - start);
            for (int r = start; r < end; ++r) {
                const double* row = f.out.row(r);
                for (int j = 0; j < cfg_.embed_dim; ++j) acc[j] += inv * row[j];
            }
        }
        double invm = 1.0 / f.span_sources[g].size();
        for (double& v : acc) v *= invm;
    }
    return f;
}

void Encoder::backward(Forward& fwd, const std::vector<std::vector<double>>& dspans) {
    int L = fwd.out.rows;
    nn::Mat dout(L, cfg_.embed_dim);
    for (std::size_t g = 0; g < fwd.spans.size(); ++g) {
        const std::vector<double>& dg = dspans[g];
        double invm = 1.0 / fwd.span_sources[g].size();
        for (const auto& [start, end] : fwd.span_sources[g]) {
            double w = invm / (end - start);
            for (int r = start; r < end; ++r) {
                double* row = dout.row(r);
                for (int j = 0; j < cfg_.embed_dim; ++j) row[j] += w * dg[j];
            }
        }
    }

    nn::Mat dx = std::move(dout);
    for (std::size_t l = blocks_.size(); l-- > 0;) dx = blocks_[l].backward(dx, fwd.caches[l]);

    for (int i = 0; i < L; ++i) {
        const double* di = dx.row(i);
        double* tg = tok_emb_.g.row(static_cast<int>(fwd.token_ids[i]));
        double* pg = pos_emb_.g.row(i);
        for (int j = 0; j < cfg_.embed_dim; ++j) {
            tg[j] += di[j];
            pg[j] += di[j];
        }
    }
}

void Encoder::collect(std::vector<nn::Param*>& out) {
    out.push_back(&tok_emb_);
    out.push_back(&pos_emb_);
    for (auto& b : blocks_) b.collect(out);
}

}  // namespace kxdoc
