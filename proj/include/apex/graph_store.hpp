#pragma once
// Typed property graph backing the procedural knowledge graph.
//
// Nodes are never deleted; archival and staleness are flags. Entity (and
// Experience) lineages are linked by `supersedes` edges pointing from the
// newer node to the one it replaces. The store itself is not synchronized:
// MemoryStore owns the per-namespace lock and the persistence journal.

#include <atomic>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "apex/common.hpp"

namespace apex {

inline constexpr double kSimilarToThreshold = 0.85;        // strict >
inline constexpr double kStructuralEdgeThreshold = 0.6;    // >=
inline constexpr double kExperienceSupersedeThreshold = 0.95;  // strict >

struct NodeFlags {
    bool archived = false;
    bool stale = false;
    bool is_template = false;
    int procedure_bump = 0;  // template refinements applied on top of procedure_ref_id

    bool operator==(const NodeFlags&) const = default;
};

struct GraphNode {
    NodeId id;
    NodeKind kind = NodeKind::Entity;
    std::string title;
    std::string description;
    std::string domain_tag;
    std::string payload;  // kind-specific: canonical op id for Operation nodes
    std::uint64_t created_at = 0;
    std::uint32_t version = 1;
    NodeFlags flags;
};

struct GraphEdge {
    EdgeId id;
    NodeId from;
    NodeId to;
    EdgeKind kind = EdgeKind::RelatesTo;
    std::optional<double> weight;
    std::uint64_t created_at = 0;
};

// Receives every mutation in application order (used for the namespace log).
struct GraphListener {
    std::function<void(const GraphNode&)> node_added;
    std::function<void(const GraphEdge&)> edge_added;
    std::function<void(const GraphNode&)> flags_changed;
};

class GraphStore {
public:
    GraphStore() = default;
    GraphStore(const GraphStore&) = delete;
    GraphStore& operator=(const GraphStore&) = delete;

    void set_listener(GraphListener listener) { listener_ = std::move(listener); }

    // Assigns an id when node.id is unset; a preset id must be unused.
    NodeId add_node(GraphNode node);
    EdgeId add_edge(NodeId from, NodeId to, EdgeKind kind, std::optional<double> weight = {});
    // Returns the existing edge when (from, to, kind) is already present.
    EdgeId add_edge_if_absent(NodeId from, NodeId to, EdgeKind kind,
                              std::optional<double> weight = {});

    NodeId version_entity(NodeId old_id, GraphNode replacement);
    NodeId resolve_latest(NodeId id) const;

    // Breadth-first closure over `kinds` in both directions, seeds excluded.
    std::unordered_set<NodeId> traverse(std::span<const NodeId> seeds,
                                        std::span<const EdgeKind> kinds, int max_hops) const;
    // Same closure with the hop count at which each node was first reached.
    std::unordered_map<NodeId, int> traverse_depths(std::span<const NodeId> seeds,
                                                    std::span<const EdgeKind> kinds,
                                                    int max_hops) const;

    bool contains(NodeId id) const { return nodes_.count(id) != 0; }
    const GraphNode& node(NodeId id) const;
    const GraphNode* find(NodeId id) const;
    std::optional<NodeId> find_by_payload(NodeKind kind, std::string_view payload) const;
    std::optional<NodeId> find_by_title(NodeKind kind, std::string_view title) const;
    std::vector<NodeId> nodes_of_kind(NodeKind kind) const;

    std::vector<const GraphEdge*> out_edges(NodeId id, std::optional<EdgeKind> kind = {}) const;
    std::vector<const GraphEdge*> in_edges(NodeId id, std::optional<EdgeKind> kind = {}) const;
    bool is_superseded(NodeId id) const;

    void set_flags(NodeId id, const NodeFlags& flags);

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    const std::map<NodeId, GraphNode>& nodes() const { return nodes_; }
    const std::vector<GraphEdge>& edges() const { return edges_; }
    std::uint64_t clock() const { return clock_; }

    // Hands out an id without creating the node (batched resolver writes).
    // Thread-safe; the id becomes visible once added with add_node.
    NodeId reserve_id() { return NodeId{next_id_.fetch_add(1)}; }

    // Installs a fully specified node/edge from a persisted log.
    void restore_node(const GraphNode& node);
    void restore_edge(const GraphEdge& edge);

private:
    struct EdgeKey {
        std::uint64_t from;
        std::uint64_t to;
        int kind;
        bool operator==(const EdgeKey&) const = default;
    };
    struct EdgeKeyHash {
        std::size_t operator()(const EdgeKey& k) const noexcept {
            std::size_t h = std::hash<std::uint64_t>{}(k.from);
            h ^= std::hash<std::uint64_t>{}(k.to) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            h ^= static_cast<std::size_t>(k.kind) * 0x100000001b3ULL;
            return h;
        }
    };
    struct Adjacency {
        std::vector<std::size_t> out;
        std::vector<std::size_t> in;
    };

    void validate_node(const GraphNode& node) const;
    void check_edge(NodeId from, NodeId to, EdgeKind kind, const std::optional<double>& weight) const;
    EdgeId insert_edge(NodeId from, NodeId to, EdgeKind kind, std::optional<double> weight);

    std::map<NodeId, GraphNode> nodes_;
    std::vector<GraphEdge> edges_;
    std::unordered_map<NodeId, Adjacency> adjacency_;
    std::unordered_map<EdgeKey, std::size_t, EdgeKeyHash> edge_index_;
    std::unordered_map<std::string, NodeId> payload_index_;  // "<kind>|<payload>"
    std::atomic<std::uint64_t> next_id_{1};
    std::uint64_t clock_ = 0;
    GraphListener listener_;
};

}  // namespace apex
