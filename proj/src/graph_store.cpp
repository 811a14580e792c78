#include "apex/graph_store.hpp"

#include <algorithm>
#include <deque>
#include <regex>

namespace apex {

namespace {

std::string payload_key(NodeKind kind, std::string_view payload) {
    return std::string(to_string(kind)) + "|" + std::string(payload);
}

bool is_similarity_kind(EdgeKind kind) {
    return kind == EdgeKind::SimilarTo || kind == EdgeKind::StructurallySimilarTo;
}

[[noreturn]] void type_violation(EdgeKind kind, const GraphNode& from, const GraphNode& to) {
    throw Error(ErrorCode::TypeConstraintViolation,
                std::string(to_string(kind)) + " cannot connect " +
                    std::string(to_string(from.kind)) + " -> " + std::string(to_string(to.kind)));
}

}  // namespace

void GraphStore::validate_node(const GraphNode& node) const {
    if (node.title.empty() || node.description.empty()) {
        throw Error(ErrorCode::MalformedPayload, "node must carry a title and a description");
    }
    if (node.version < 1) {
        throw Error(ErrorCode::MalformedPayload, "version must be >= 1");
    }
    if (node.kind == NodeKind::Operation) {
        static const std::regex op_re("^op:[a-z0-9_]+$");
        if (!std::regex_match(node.payload, op_re)) {
            throw Error(ErrorCode::MalformedPayload,
                        "operation payload must be a canonical op id, got '" + node.payload + "'");
        }
    }
    if (node.kind == NodeKind::Experience && node.payload.empty()) {
        throw Error(ErrorCode::MalformedPayload, "experience payload must reference its record");
    }
}

NodeId GraphStore::add_node(GraphNode node) {
    validate_node(node);
    if (node.id.valid()) {
        if (contains(node.id)) {
            throw Error(ErrorCode::DuplicateId, render_id(node.kind, node.id) + " already exists");
        }
        auto next = next_id_.load();
        while (next <= node.id.value && !next_id_.compare_exchange_weak(next, node.id.value + 1)) {
        }
    } else {
        node.id = reserve_id();
    }
    if (node.kind == NodeKind::Operation && find_by_payload(node.kind, node.payload)) {
        throw Error(ErrorCode::DuplicateId, "operation " + node.payload + " already exists");
    }
    node.created_at = ++clock_;
    node.version = 1;
    node.flags = NodeFlags{};
    NodeId id = node.id;
    if (!node.payload.empty()) {
        payload_index_.emplace(payload_key(node.kind, node.payload), id);
    }
    adjacency_[id];
    auto [it, _] = nodes_.emplace(id, std::move(node));
    if (listener_.node_added) listener_.node_added(it->second);
    return id;
}

void GraphStore::check_edge(NodeId from, NodeId to, EdgeKind kind,
                            const std::optional<double>& weight) const {
    const GraphNode* a = find(from);
    const GraphNode* b = find(to);
    if (!a || !b) {
        throw Error(ErrorCode::MissingEndpoint, "edge endpoint does not exist");
    }
    auto require = [&](NodeKind fk, NodeKind tk) {
        if (a->kind != fk || b->kind != tk) type_violation(kind, *a, *b);
    };
    switch (kind) {
        case EdgeKind::FollowedBy: require(NodeKind::Operation, NodeKind::Operation); break;
        case EdgeKind::RelatesTo: require(NodeKind::Entity, NodeKind::Entity); break;
        case EdgeKind::Uses: require(NodeKind::Operation, NodeKind::Entity); break;
        case EdgeKind::EquivalentTo: require(NodeKind::Entity, NodeKind::Entity); break;
        case EdgeKind::MemberOf:
            if (b->kind != NodeKind::TaskTopic || a->kind == NodeKind::TaskTopic) {
                type_violation(kind, *a, *b);
            }
            break;
        case EdgeKind::UsesEntity: require(NodeKind::Experience, NodeKind::Entity); break;
        case EdgeKind::SimilarTo:
        case EdgeKind::StructurallySimilarTo:
        case EdgeKind::DerivedFrom: require(NodeKind::Experience, NodeKind::Experience); break;
        case EdgeKind::Supersedes:
            if (a->kind != b->kind ||
                (a->kind != NodeKind::Entity && a->kind != NodeKind::Experience)) {
                type_violation(kind, *a, *b);
            }
            break;
    }
    if (from == to && (kind == EdgeKind::Supersedes || is_similarity_kind(kind) ||
                       kind == EdgeKind::DerivedFrom)) {
        throw Error(ErrorCode::TypeConstraintViolation, "self-referencing " +
                                                            std::string(to_string(kind)));
    }

    const bool weighted = is_similarity_kind(kind) ||
                          (kind == EdgeKind::Supersedes && a->kind == NodeKind::Experience);
    if (weighted != weight.has_value()) {
        throw Error(ErrorCode::InvalidArgument,
                    std::string(to_string(kind)) +
                        (weighted ? " requires a similarity weight" : " does not take a weight"));
    }
    if (weight) {
        const double w = *weight;
        if (!(w >= 0.0 && w <= 1.0)) {
            throw Error(ErrorCode::ThresholdViolation, "weight outside [0,1]");
        }
        if (kind == EdgeKind::SimilarTo && !(w > kSimilarToThreshold)) {
            throw Error(ErrorCode::ThresholdViolation, "similar_to requires cosine > 0.85");
        }
        if (kind == EdgeKind::StructurallySimilarTo && !(w >= kStructuralEdgeThreshold)) {
            throw Error(ErrorCode::ThresholdViolation,
                        "structurally_similar_to requires overlap >= 0.6");
        }
        if (kind == EdgeKind::Supersedes && !(w > kExperienceSupersedeThreshold)) {
            throw Error(ErrorCode::ThresholdViolation,
                        "experience supersedes requires structural similarity > 0.95");
        }
    }
    if (kind == EdgeKind::Supersedes) {
        if (is_superseded(to)) {
            throw Error(ErrorCode::AlreadySuperseded,
                        render_id(b->kind, to) + " already has a successor");
        }
        // `from` must not already be older than `to`.
        std::unordered_set<NodeId> seen;
        NodeId cur = from;
        while (seen.insert(cur).second) {
            if (cur == to) {
                throw Error(ErrorCode::CycleDetected, "supersedes edge would close a cycle");
            }
            auto newer = in_edges(cur, EdgeKind::Supersedes);
            if (newer.empty()) break;
            cur = newer.front()->from;
        }
    }
}

EdgeId GraphStore::insert_edge(NodeId from, NodeId to, EdgeKind kind,
                               std::optional<double> weight) {
    GraphEdge edge;
    edge.id = EdgeId{edges_.size() + 1};
    edge.from = from;
    edge.to = to;
    edge.kind = kind;
    edge.weight = weight;
    edge.created_at = ++clock_;
    const std::size_t index = edges_.size();
    edges_.push_back(edge);
    adjacency_[from].out.push_back(index);
    adjacency_[to].in.push_back(index);
    edge_index_.emplace(EdgeKey{from.value, to.value, static_cast<int>(kind)}, index);
    if (listener_.edge_added) listener_.edge_added(edges_.back());
    return edge.id;
}

EdgeId GraphStore::add_edge(NodeId from, NodeId to, EdgeKind kind, std::optional<double> weight) {
    check_edge(from, to, kind, weight);
    return insert_edge(from, to, kind, weight);
}

EdgeId GraphStore::add_edge_if_absent(NodeId from, NodeId to, EdgeKind kind,
                                      std::optional<double> weight) {
    auto it = edge_index_.find(EdgeKey{from.value, to.value, static_cast<int>(kind)});
    if (it != edge_index_.end()) return edges_[it->second].id;
    return add_edge(from, to, kind, weight);
}

NodeId GraphStore::version_entity(NodeId old_id, GraphNode replacement) {
    const GraphNode& old = node(old_id);
    if (old.kind != NodeKind::Entity || replacement.kind != NodeKind::Entity) {
        throw Error(ErrorCode::NotAnEntity, "only Entity nodes are versioned");
    }
    if (is_superseded(old_id)) {
        throw Error(ErrorCode::AlreadySuperseded,
                    render_id(old.kind, old_id) + " already has a newer version");
    }
    validate_node(replacement);
    const std::uint32_t version = old.version + 1;
    replacement.id = NodeId{};
    // add_node resets the version; patch it before listeners observe the edge.
    NodeId fresh = reserve_id();
    replacement.id = fresh;
    replacement.created_at = ++clock_;
    replacement.version = version;
    replacement.flags = NodeFlags{};
    if (!replacement.payload.empty()) {
        payload_index_.emplace(payload_key(replacement.kind, replacement.payload), fresh);
    }
    adjacency_[fresh];
    auto [it, _] = nodes_.emplace(fresh, std::move(replacement));
    if (listener_.node_added) listener_.node_added(it->second);
    insert_edge(fresh, old_id, EdgeKind::Supersedes, std::nullopt);
    return fresh;
}

NodeId GraphStore::resolve_latest(NodeId id) const {
    if (!contains(id)) {
        throw Error(ErrorCode::NotFound, "node " + std::to_string(id.value) + " not found");
    }
    std::unordered_set<NodeId> seen;
    NodeId cur = id;
    while (true) {
        if (!seen.insert(cur).second) {
            throw Error(ErrorCode::CycleDetected, "supersedes chain loops");
        }
        auto newer = in_edges(cur, EdgeKind::Supersedes);
        if (newer.empty()) return cur;
        cur = newer.front()->from;
    }
}

std::unordered_map<NodeId, int> GraphStore::traverse_depths(std::span<const NodeId> seeds,
                                                            std::span<const EdgeKind> kinds,
                                                            int max_hops) const {
    std::unordered_map<NodeId, int> depth;
    if (max_hops <= 0) return depth;
    unsigned mask = 0;
    for (EdgeKind k : kinds) mask |= 1u << static_cast<unsigned>(k);

    std::unordered_set<NodeId> seed_set;
    std::deque<std::pair<NodeId, int>> queue;
    for (NodeId s : seeds) {
        if (!contains(s)) {
            throw Error(ErrorCode::NotFound, "traversal seed " + std::to_string(s.value));
        }
        if (seed_set.insert(s).second) queue.emplace_back(s, 0);
    }
    auto visit = [&](NodeId next, int d) {
        if (seed_set.count(next) || depth.count(next)) return;
        depth.emplace(next, d);
        if (d < max_hops) queue.emplace_back(next, d);
    };
    while (!queue.empty()) {
        auto [cur, d] = queue.front();
        queue.pop_front();
        const auto& adj = adjacency_.at(cur);
        for (std::size_t e : adj.out) {
            if (mask & (1u << static_cast<unsigned>(edges_[e].kind))) visit(edges_[e].to, d + 1);
        }
        for (std::size_t e : adj.in) {
            if (mask & (1u << static_cast<unsigned>(edges_[e].kind))) visit(edges_[e].from, d + 1);
        }
    }
    return depth;
}

std::unordered_set<NodeId> GraphStore::traverse(std::span<const NodeId> seeds,
                                                std::span<const EdgeKind> kinds,
                                                int max_hops) const {
    std::unordered_set<NodeId> out;
    for (const auto& [id, _] : traverse_depths(seeds, kinds, max_hops)) out.insert(id);
    return out;
}

const GraphNode& GraphStore::node(NodeId id) const {
    const GraphNode* n = find(id);
    if (!n) throw Error(ErrorCode::NotFound, "node " + std::to_string(id.value) + " not found");
    return *n;
}

const GraphNode* GraphStore::find(NodeId id) const {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
}

std::optional<NodeId> GraphStore::find_by_payload(NodeKind kind, std::string_view payload) const {
    auto it = payload_index_.find(payload_key(kind, payload));
    if (it == payload_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<NodeId> GraphStore::find_by_title(NodeKind kind, std::string_view title) const {
    for (const auto& [id, n] : nodes_) {
        if (n.kind == kind && n.title == title) return id;
    }
    return std::nullopt;
}

std::vector<NodeId> GraphStore::nodes_of_kind(NodeKind kind) const {
    std::vector<NodeId> out;
    for (const auto& [id, n] : nodes_) {
        if (n.kind == kind) out.push_back(id);
    }
    return out;
}

std::vector<const GraphEdge*> GraphStore::out_edges(NodeId id, std::optional<EdgeKind> kind) const {
    std::vector<const GraphEdge*> out;
    auto it = adjacency_.find(id);
    if (it == adjacency_.end()) return out;
    for (std::size_t e : it->second.out) {
        if (!kind || edges_[e].kind == *kind) out.push_back(&edges_[e]);
    }
    return out;
}

std::vector<const GraphEdge*> GraphStore::in_edges(NodeId id, std::optional<EdgeKind> kind) const {
    std::vector<const GraphEdge*> out;
    auto it = adjacency_.find(id);
    if (it == adjacency_.end()) return out;
    for (std::size_t e : it->second.in) {
        if (!kind || edges_[e].kind == *kind) out.push_back(&edges_[e]);
    }
    return out;
}

bool GraphStore::is_superseded(NodeId id) const {
    auto it = adjacency_.find(id);
    if (it == adjacency_.end()) return false;
    return std::any_of(it->second.in.begin(), it->second.in.end(),
                       [&](std::size_t e) { return edges_[e].kind == EdgeKind::Supersedes; });
}

void GraphStore::set_flags(NodeId id, const NodeFlags& flags) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) {
        throw Error(ErrorCode::NotFound, "node " + std::to_string(id.value) + " not found");
    }
    if (it->second.flags == flags) return;
    it->second.flags = flags;
    if (listener_.flags_changed) listener_.flags_changed(it->second);
}

void GraphStore::restore_node(const GraphNode& node) {
    validate_node(node);
    if (contains(node.id) || !node.id.valid()) {
        throw Error(ErrorCode::DuplicateId, "restored node id clashes");
    }
    auto next = next_id_.load();
    while (next <= node.id.value && !next_id_.compare_exchange_weak(next, node.id.value + 1)) {
    }
    clock_ = std::max(clock_, node.created_at);
    if (!node.payload.empty()) {
        payload_index_.emplace(payload_key(node.kind, node.payload), node.id);
    }
    adjacency_[node.id];
    auto [it, _] = nodes_.emplace(node.id, node);
    if (listener_.node_added) listener_.node_added(it->second);
}

void GraphStore::restore_edge(const GraphEdge& edge) {
    if (edge.id.value != edges_.size() + 1) {
        throw Error(ErrorCode::ParseError, "edge ids must be contiguous in the log");
    }
    if (!contains(edge.from) || !contains(edge.to)) {
        throw Error(ErrorCode::MissingEndpoint, "restored edge endpoint missing");
    }
    clock_ = std::max(clock_, edge.created_at);
    const std::size_t index = edges_.size();
    edges_.push_back(edge);
    adjacency_[edge.from].out.push_back(index);
    adjacency_[edge.to].in.push_back(index);
    edge_index_.emplace(EdgeKey{edge.from.value, edge.to.value, static_cast<int>(edge.kind)}, index);
    if (listener_.edge_added) listener_.edge_added(edges_.back());
}

}  // namespace apex
