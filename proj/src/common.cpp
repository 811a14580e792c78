#include "apex/common.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace apex {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::MalformedPayload: return "MalformedPayload";
        case ErrorCode::MissingEndpoint: return "MissingEndpoint";
        case ErrorCode::TypeConstraintViolation: return "TypeConstraintViolation";
        case ErrorCode::ThresholdViolation: return "ThresholdViolation";
        case ErrorCode::NotAnEntity: return "NotAnEntity";
        case ErrorCode::AlreadySuperseded: return "AlreadySuperseded";
        case ErrorCode::CycleDetected: return "CycleDetected";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::EmptyText: return "EmptyText";
        case ErrorCode::DimMismatch: return "DimMismatch";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::ResolutionFailure: return "ResolutionFailure";
        case ErrorCode::InvariantViolation: return "InvariantViolation";
        case ErrorCode::BudgetTooSmall: return "BudgetTooSmall";
        case ErrorCode::WeightSumInvalid: return "WeightSumInvalid";
        case ErrorCode::InvalidRecord: return "InvalidRecord";
        case ErrorCode::AdapterFailure: return "AdapterFailure";
        case ErrorCode::HookFailure: return "HookFailure";
        case ErrorCode::RaggedInput: return "RaggedInput";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

namespace {

constexpr std::array<std::pair<NodeKind, std::string_view>, 5> kNodeNames{{
    {NodeKind::Entity, "Entity"},
    {NodeKind::Experience, "Experience"},
    {NodeKind::SubTask, "SubTask"},
    {NodeKind::Operation, "Operation"},
    {NodeKind::TaskTopic, "TaskTopic"},
}};

constexpr std::array<std::pair<EdgeKind, std::string_view>, 10> kEdgeNames{{
    {EdgeKind::FollowedBy, "FOLLOWED_BY"},
    {EdgeKind::RelatesTo, "RELATES_TO"},
    {EdgeKind::Uses, "USES"},
    {EdgeKind::EquivalentTo, "EQUIVALENT_TO"},
    {EdgeKind::MemberOf, "MEMBER_OF"},
    {EdgeKind::UsesEntity, "uses_entity"},
    {EdgeKind::SimilarTo, "similar_to"},
    {EdgeKind::StructurallySimilarTo, "structurally_similar_to"},
    {EdgeKind::DerivedFrom, "derived_from"},
    {EdgeKind::Supersedes, "supersedes"},
}};

}  // namespace

std::string_view to_string(NodeKind kind) {
    for (const auto& [k, name] : kNodeNames) {
        if (k == kind) return name;
    }
    return "?";
}

std::string_view to_string(EdgeKind kind) {
    for (const auto& [k, name] : kEdgeNames) {
        if (k == kind) return name;
    }
    return "?";
}

NodeKind node_kind_from_string(std::string_view text) {
    for (const auto& [k, name] : kNodeNames) {
        if (name == text) return k;
    }
    throw Error(ErrorCode::ParseError, "unknown node kind '" + std::string(text) + "'");
}

EdgeKind edge_kind_from_string(std::string_view text) {
    for (const auto& [k, name] : kEdgeNames) {
        if (name == text) return k;
    }
    throw Error(ErrorCode::ParseError, "unknown edge kind '" + std::string(text) + "'");
}

std::string_view id_prefix(NodeKind kind) {
    switch (kind) {
        case NodeKind::Entity: return "ent";
        case NodeKind::Experience: return "exp";
        case NodeKind::SubTask: return "sub";
        case NodeKind::Operation: return "op";
        case NodeKind::TaskTopic: return "topic";
    }
    return "node";
}

std::string render_id(NodeKind kind, NodeId id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06llu", static_cast<unsigned long long>(id.value));
    return std::string(id_prefix(kind)) + ":" + buf;
}

std::string render_edge_id(EdgeId id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "edge:%06llu", static_cast<unsigned long long>(id.value));
    return buf;
}

NodeId parse_node_id(std::string_view text) {
    auto colon = text.rfind(':');
    std::string_view digits = colon == std::string_view::npos ? text : text.substr(colon + 1);
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size() || value == 0) {
        throw Error(ErrorCode::ParseError, "bad node id '" + std::string(text) + "'");
    }
    return NodeId{value};
}

}  // namespace apex
