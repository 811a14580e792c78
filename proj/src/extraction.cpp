#include "apex/extraction.hpp"

#include <algorithm>

namespace apex {

namespace {

NodeId topic_node(GraphStore& g, std::string_view topic, std::string_view domain) {
    const std::string payload = "topic:" + op_id_from_text(topic).substr(3);
    if (auto id = g.find_by_payload(NodeKind::TaskTopic, payload)) return *id;
    GraphNode n;
    n.kind = NodeKind::TaskTopic;
    n.title = std::string(topic);
    n.description = "Task topic '" + std::string(topic) + "'";
    n.domain_tag = std::string(domain);
    n.payload = payload;
    return g.add_node(std::move(n));
}

void push_unique(std::vector<NodeId>& v, NodeId id) {
    if (std::find(v.begin(), v.end(), id) == v.end()) v.push_back(id);
}

}  // namespace

std::string hypothesize_op(const RawStep& step, const EntityResolver& resolver,
                           const OperationCanon& canon) {
    if (is_op_id(step.text)) return step.text;
    if (auto op = canon.lookup(step.text)) return *op;
    if (auto hit = resolver.probe(step.text, NodeKind::Operation, kGlobalDomain)) {
        return resolver.memory().graph().node(hit->node).payload;
    }
    return op_id_from_text(step.text);
}

StructuralSignature hypothesize_signature(std::span<const RawStep> steps,
                                          const EntityResolver& resolver,
                                          const OperationCanon& canon) {
    StructuralSignature sig;
    for (const auto& step : steps) sig.ops.push_back(hypothesize_op(step, resolver, canon));
    return sig;
}

std::vector<NodeId> materialize_signature(const StructuralSignature& sig, EntityResolver& resolver) {
    std::vector<NodeId> ids;
    for (const auto& op : sig.ops) ids.push_back(resolver.resolve_operation(op).node);
    resolver.flush();
    GraphStore& g = resolver.memory().graph();
    for (std::size_t i = 1; i < ids.size(); ++i) {
        g.add_edge_if_absent(ids[i - 1], ids[i], EdgeKind::FollowedBy);
    }
    return ids;
}

std::vector<NodeId> link_step_metadata(std::span<const RawStep> steps, std::span<const NodeId> ops,
                                       EntityResolver& resolver, std::string_view domain) {
    if (steps.size() != ops.size()) {
        throw Error(ErrorCode::InvalidArgument, "one operation node per step expected");
    }
    struct StepNodes {
        std::vector<NodeId> entities;
        std::vector<NodeId> properties;
    };
    std::vector<StepNodes> per_step(steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) {
        for (const auto& e : steps[i].entities) {
            per_step[i].entities.push_back(resolver.resolve(e, NodeKind::Entity, domain).node);
        }
        for (const auto& p : steps[i].properties) {
            per_step[i].properties.push_back(resolver.resolve(p, NodeKind::Entity, domain).node);
        }
    }
    resolver.flush();

    GraphStore& g = resolver.memory().graph();
    std::vector<NodeId> touched;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto& sn = per_step[i];
        for (NodeId p : sn.properties) {
            g.add_edge_if_absent(ops[i], p, EdgeKind::Uses);
            push_unique(touched, p);
        }
        for (std::size_t k = 0; k < sn.entities.size(); ++k) {
            const NodeId e = sn.entities[k];
            push_unique(touched, e);
            for (NodeId p : sn.properties) {
                if (p != e) g.add_edge_if_absent(e, p, EdgeKind::RelatesTo);
            }
            if (sn.properties.empty() && k + 1 < sn.entities.size() && sn.entities[k + 1] != e) {
                g.add_edge_if_absent(e, sn.entities[k + 1], EdgeKind::RelatesTo);
            }
        }
        if (!steps[i].topic.empty()) {
            g.add_edge_if_absent(ops[i], topic_node(g, steps[i].topic, domain), EdgeKind::MemberOf);
        }
    }
    return touched;
}

ExtractionResult extract_signature(std::span<const RawStep> steps, EntityResolver& resolver,
                                   std::string_view domain, const OperationCanon& canon) {
    if (steps.empty()) throw Error(ErrorCode::InvalidArgument, "no steps to extract from");
    ExtractionResult out;
    const std::size_t before = resolver.memory().graph().node_count();
    try {
        for (const auto& step : steps) {
            std::optional<std::string> op;
            if (is_op_id(step.text)) {
                op = step.text;
            } else {
                op = canon.lookup(step.text);
            }
            out.operations.push_back(
                (op ? resolver.resolve_operation(*op)
                    : resolver.resolve(step.text, NodeKind::Operation, kGlobalDomain))
                    .node);
        }
        resolver.flush();
        GraphStore& g = resolver.memory().graph();
        for (std::size_t i = 0; i < steps.size(); ++i) {
            out.signature.ops.push_back(g.node(out.operations[i]).payload);
            if (i > 0) g.add_edge_if_absent(out.operations[i - 1], out.operations[i], EdgeKind::FollowedBy);
        }
        out.entities = link_step_metadata(steps, out.operations, resolver, domain);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ResolutionFailure) throw;
        throw Error(ErrorCode::ResolutionFailure, e.what());
    }
    out.nodes_created = resolver.memory().graph().node_count() - before;
    return out;
}

}  // namespace apex
