#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace kxdoc {

using EntityId = std::string;    // "Q"-prefixed by convention
using PropertyId = std::string;  // "P"-prefixed by convention

struct Triple {
    EntityId subject;
    PropertyId property;
    EntityId object;

    auto operator<=>(const Triple&) const = default;
};

// One outgoing edge: (property, neighbor).
using Edge = std::pair<PropertyId, EntityId>;

// Wikidata-style labeled multigraph. Immutable after load; adjacency lists are
// sorted by (property id, object id) so downstream path search is
// deterministic. When loaded with undirected=true every triple also
// materializes a reverse edge with the same property id (the stored triple set
// keeps only the file's direction).
struct KnowledgeGraph {
    std::vector<Triple> triples;  // deduplicated, sorted
    std::map<EntityId, std::vector<Edge>> out_adjacency;
    std::unordered_map<EntityId, std::string> entity_labels;
    std::unordered_map<PropertyId, std::string> property_labels;
    std::unordered_map<EntityId, std::string> entity_types;  // partial
    bool undirected = true;

    bool has_entity(const EntityId& e) const { return entity_labels.count(e) > 0; }
};

// Raised for unreadable/malformed input files and referential-integrity
// violations; message carries file and line context.
struct KgError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Loads triples.tsv / labels.tsv / types.tsv (tab-separated, '#' comments).
// Every triple component must be labeled, and every typed entity must exist;
// violations are reported together in one integrity error.
KnowledgeGraph load_kg(const std::string& triples_path, const std::string& labels_path,
                       const std::string& types_path, bool undirected = true);

// Sorted adjacency of e; empty for unknown or sink entities.
const std::vector<Edge>& neighbors(const KnowledgeGraph& g, const EntityId& e);

std::optional<std::string> get_entity_type(const KnowledgeGraph& g, const EntityId& e);

// Canonical text dump (sorted, stable) used by the determinism check and the
// ingest-kg --dump flag.
std::string serialize_kg(const KnowledgeGraph& g);

}  // namespace kxdoc
