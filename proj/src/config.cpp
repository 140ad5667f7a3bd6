#include "kxdoc/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace kxdoc {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\'')))
        return s.substr(1, s.size() - 2);
    return s;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
    KeyValueConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = unquote(trim(t.substr(eq + 1)));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (!section.empty()) key = section + "." + key;
        cfg.values_[key] = value;
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    auto v = get(key);
    return v ? *v : fallback;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        return std::stod(*v);
    } catch (...) {
        throw ConfigError("key " + key + ": not a number: " + *v);
    }
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        return std::stoi(*v);
    } catch (...) {
        throw ConfigError("key " + key + ": not an integer: " + *v);
    }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError("key " + key + ": not a bool: " + *v);
}

RunConfig run_config_from(const KeyValueConfig& kv) {
    static const std::set<std::string> known = {
        "setting",          "mode",
        "hops",             "seed",
        "data_root",        "filter.lambda",
        "filter.eta",       "filter.kappa",
        "filter.top_k",     "filter.relevance_keep",
        "filter.token_budget", "filter.entity_filter",
        "filter.relevance_filter", "filter.theta1_requires_both",
        "encoder.embed_dim", "encoder.num_layers",
        "encoder.num_heads", "encoder.vocab_hash_buckets",
        "encoder.max_positions", "reasoner.num_layers",
        "reasoner.num_heads", "reasoner.masked_readout",
        "reasoner.entity_cap", "loss_variant",
        "theta",            "train.learning_rate",
        "train.weight_decay", "train.epochs",
        "train.batch_size", "train.optimizer",
        "retrieval.top_k",  "retrieval.w_count",
        "retrieval.w_shared", "retrieval.w_tfidf"};
    for (const auto& [key, _] : kv.values())
        if (!known.count(key)) throw ConfigError("unknown config key: " + key);

    RunConfig rc;
    std::string setting = kv.get_string("setting", "closed");
    if (setting == "closed")
        rc.setting = Setting::Closed;
    else if (setting == "open")
        rc.setting = Setting::Open;
    else
        throw ConfigError("setting must be closed or open, got " + setting);

    auto mode = context_mode_from_string(kv.get_string("mode", "ecc"));
    if (!mode) throw ConfigError("mode must be one of none/ec/cc/ecc");
    rc.pipeline.mode = *mode;
    rc.pipeline.hops = kv.get_int("hops", 5);

    rc.pipeline.filter.lambda_w = kv.get_double("filter.lambda", 0.1);
    rc.pipeline.filter.eta_w = kv.get_double("filter.eta", 0.01);
    rc.pipeline.filter.kappa_w = kv.get_double("filter.kappa", 0.001);
    rc.pipeline.filter.top_k = kv.get_int("filter.top_k", 16);
    rc.pipeline.filter.relevance_keep = kv.get_int("filter.relevance_keep", 0);
    rc.pipeline.filter.token_budget = kv.get_int("filter.token_budget", 512);
    rc.pipeline.filter.entity_filter = kv.get_bool("filter.entity_filter", true);
    rc.pipeline.filter.relevance_filter = kv.get_bool("filter.relevance_filter", true);
    rc.pipeline.filter.theta1_requires_both = kv.get_bool("filter.theta1_requires_both", false);

    rc.pipeline.enc.embed_dim = kv.get_int("encoder.embed_dim", 64);
    rc.pipeline.enc.num_layers = kv.get_int("encoder.num_layers", 3);
    rc.pipeline.enc.num_heads = kv.get_int("encoder.num_heads", 4);
    rc.pipeline.enc.vocab_hash_buckets = kv.get_int("encoder.vocab_hash_buckets", 50021);
    rc.pipeline.enc.max_positions =
        kv.get_int("encoder.max_positions", rc.pipeline.filter.token_budget);

    rc.pipeline.rea.num_layers = kv.get_int("reasoner.num_layers", 2);
    rc.pipeline.rea.num_heads = kv.get_int("reasoner.num_heads", 4);
    rc.pipeline.rea.masked_readout = kv.get_bool("reasoner.masked_readout", true);
    rc.pipeline.rea.entity_cap = kv.get_int("reasoner.entity_cap", 32);

    std::string lv = kv.get_string("loss_variant", "adaptive");
    if (lv == "adaptive")
        rc.pipeline.loss_variant = LossVariant::Adaptive;
    else if (lv == "literal")
        rc.pipeline.loss_variant = LossVariant::Literal;
    else
        throw ConfigError("loss_variant must be adaptive or literal");
    rc.pipeline.theta = kv.get_double("theta", 0.0);

    std::string opt = kv.get_string("train.optimizer", "adamw");
    if (opt != "adamw") throw ConfigError("only the adamw optimizer is implemented");
    rc.train.learning_rate = kv.get_double("train.learning_rate", 1e-3);
    rc.train.weight_decay = kv.get_double("train.weight_decay", 0.01);
    rc.train.epochs = kv.get_int("train.epochs", 100);
    rc.train.batch_size = kv.get_int("train.batch_size", 4);
    rc.train.seed = static_cast<std::uint64_t>(kv.get_int("seed", 7));

    rc.retrieval.top_k = kv.get_int("retrieval.top_k", 16);
    rc.retrieval.w_count = kv.get_double("retrieval.w_count", 1.0);
    rc.retrieval.w_shared = kv.get_double("retrieval.w_shared", 1.0);
    rc.retrieval.w_tfidf = kv.get_double("retrieval.w_tfidf", 1.0);

    rc.data_root = kv.get_string("data_root", "");

    if (rc.pipeline.filter.token_budget < 16) throw ConfigError("token_budget must be >= 16");
    if (rc.pipeline.filter.top_k < 1) throw ConfigError("filter.top_k must be >= 1");
    if (rc.pipeline.hops < 1) throw ConfigError("hops must be >= 1");
    if (rc.train.learning_rate <= 0) throw ConfigError("learning_rate must be positive");
    if (rc.pipeline.enc.embed_dim % rc.pipeline.enc.num_heads != 0)
        throw ConfigError("embed_dim must be divisible by num_heads");
    return rc;
}

}  // namespace kxdoc
