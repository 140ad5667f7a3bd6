#include "kxdoc/kg.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace kxdoc {

namespace {

// Splits one TSV line into exactly `fields` columns. Returns false for lines
// that should be skipped (comments, blanks).
bool split_tsv(const std::string& line, std::size_t fields, std::vector<std::string>& out) {
    if (line.empty() || line[0] == '#') return false;
    out.clear();
    std::size_t start = 0;
    while (true) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    if (out.size() != fields) {
        throw KgError("expected " + std::to_string(fields) + " tab-separated fields, got " +
                      std::to_string(out.size()));
    }
    return true;
}

template <typename Fn>
void for_each_row(const std::string& path, std::size_t fields, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw KgError("cannot open " + path);
    std::string line;
    std::vector<std::string> cols;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        try {
            if (split_tsv(line, fields, cols)) fn(cols);
        } catch (const KgError& e) {
            throw KgError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

bool looks_like_property(const std::string& id) {
    if (id.size() < 2 || id[0] != 'P') return false;
    return std::all_of(id.begin() + 1, id.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

KnowledgeGraph load_kg(const std::string& triples_path, const std::string& labels_path,
                       const std::string& types_path, bool undirected) {
    KnowledgeGraph g;
    g.undirected = undirected;

    std::map<std::string, std::string> raw_labels;
    for_each_row(labels_path, 2, [&](const std::vector<std::string>& c) {
        if (c[0].empty()) throw KgError("empty id");
        raw_labels[c[0]] = c[1];
    });

    std::set<Triple> triple_set;
    for_each_row(triples_path, 3, [&](const std::vector<std::string>& c) {
        if (c[0].empty() || c[1].empty() || c[2].empty()) throw KgError("empty triple component");
        triple_set.insert(Triple{c[0], c[1], c[2]});
    });

    std::map<EntityId, std::string> raw_types;
    for_each_row(types_path, 2, [&](const std::vector<std::string>& c) {
        if (c[0].empty()) throw KgError("empty entity id");
        raw_types[c[0]] = c[1];
    });

    // Partition labels: ids used as subject/object (or typed) are entities, ids
    // used as property are properties, unreferenced ids fall back to the
    // P-number convention.
    std::set<std::string> entity_ids, property_ids;
    for (const Triple& t : triple_set) {
        entity_ids.insert(t.subject);
        entity_ids.insert(t.object);
        property_ids.insert(t.property);
    }
    for (const auto& [e, _] : raw_types) entity_ids.insert(e);

    std::vector<std::string> offenders;
    for (const auto& id : entity_ids) {
        if (!raw_labels.count(id)) offenders.push_back("unlabeled entity " + id);
    }
    for (const auto& id : property_ids) {
        if (!raw_labels.count(id)) offenders.push_back("unlabeled property " + id);
    }
    if (!offenders.empty()) {
        std::string msg = "integrity error:";
        for (const auto& o : offenders) msg += " " + o + ";";
        throw KgError(msg);
    }

    for (const auto& [id, label] : raw_labels) {
        if (property_ids.count(id) && !entity_ids.count(id)) {
            g.property_labels[id] = label;
        } else if (entity_ids.count(id)) {
            g.entity_labels[id] = label;
        } else if (looks_like_property(id)) {
            g.property_labels[id] = label;
        } else {
            g.entity_labels[id] = label;
        }
    }
    g.entity_types.insert(raw_types.begin(), raw_types.end());

    g.triples.assign(triple_set.begin(), triple_set.end());

    std::map<EntityId, std::set<Edge>> adj;
    for (const Triple& t : g.triples) {
        adj[t.subject].insert({t.property, t.object});
        if (undirected) adj[t.object].insert({t.property, t.subject});
    }
    for (auto& [e, edges] : adj) {
        g.out_adjacency[e].assign(edges.begin(), edges.end());
    }
    return g;
}

const std::vector<Edge>& neighbors(const KnowledgeGraph& g, const EntityId& e) {
    static const std::vector<Edge> empty;
    auto it = g.out_adjacency.find(e);
    return it == g.out_adjacency.end() ? empty : it->second;
}

std::optional<std::string> get_entity_type(const KnowledgeGraph& g, const EntityId& e) {
    auto it = g.entity_types.find(e);
    if (it == g.entity_types.end()) return std::nullopt;
    return it->second;
}

std::string serialize_kg(const KnowledgeGraph& g) {
    std::ostringstream out;
    out << "kg v1 undirected=" << (g.undirected ? 1 : 0) << "\n";
    out << "triples " << g.triples.size() << "\n";
    for (const Triple& t : g.triples) out << t.subject << "\t" << t.property << "\t" << t.object << "\n";
    std::map<std::string, std::string> sorted_el(g.entity_labels.begin(), g.entity_labels.end());
    std::map<std::string, std::string> sorted_pl(g.property_labels.begin(), g.property_labels.end());
    std::map<std::string, std::string> sorted_ty(g.entity_types.begin(), g.entity_types.end());
    out << "entity_labels " << sorted_el.size() << "\n";
    for (const auto& [k, v] : sorted_el) out << k << "\t" << v << "\n";
    out << "property_labels " << sorted_pl.size() << "\n";
    for (const auto& [k, v] : sorted_pl) out << k << "\t" << v << "\n";
    out << "entity_types " << sorted_ty.size() << "\n";
    for (const auto& [k, v] : sorted_ty) out << k << "\t" << v << "\n";
    out << "adjacency\n";
    for (const auto& [e, edges] : g.out_adjacency) {
        out << e;
        for (const Edge& ed : edges) out << "\t" << ed.first << " " << ed.second;
        out << "\n";
    }
    return out.str();
}

}  // namespace kxdoc
