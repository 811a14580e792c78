#pragma once
// Shared vocabulary for the experience memory: ids, node/edge kinds, errors.

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace apex {

using Json = nlohmann::ordered_json;

enum class ErrorCode {
    DuplicateId,
    MalformedPayload,
    MissingEndpoint,
    TypeConstraintViolation,
    ThresholdViolation,
    NotAnEntity,
    AlreadySuperseded,
    CycleDetected,
    NotFound,
    EmptyText,
    DimMismatch,
    ZeroVector,
    ResolutionFailure,
    InvariantViolation,
    BudgetTooSmall,
    WeightSumInvalid,
    InvalidRecord,
    AdapterFailure,
    HookFailure,
    RaggedInput,
    InvalidArgument,
    ParseError,
    IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

enum class NodeKind { Entity, Experience, SubTask, Operation, TaskTopic };

enum class EdgeKind {
    FollowedBy,
    RelatesTo,
    Uses,
    EquivalentTo,
    MemberOf,
    UsesEntity,
    SimilarTo,
    StructurallySimilarTo,
    DerivedFrom,
    Supersedes,
};

inline constexpr EdgeKind kAllEdgeKinds[] = {
    EdgeKind::FollowedBy,  EdgeKind::RelatesTo,   EdgeKind::Uses,
    EdgeKind::EquivalentTo, EdgeKind::MemberOf,   EdgeKind::UsesEntity,
    EdgeKind::SimilarTo,   EdgeKind::StructurallySimilarTo,
    EdgeKind::DerivedFrom, EdgeKind::Supersedes,
};

std::string_view to_string(NodeKind kind);
std::string_view to_string(EdgeKind kind);
NodeKind node_kind_from_string(std::string_view text);
EdgeKind edge_kind_from_string(std::string_view text);

// Namespace-scoped monotonic id. Rendered with a kind prefix ("exp:000042").
struct NodeId {
    std::uint64_t value = 0;

    bool valid() const noexcept { return value != 0; }
    auto operator<=>(const NodeId&) const = default;
};

struct EdgeId {
    std::uint64_t value = 0;
    auto operator<=>(const EdgeId&) const = default;
};

std::string_view id_prefix(NodeKind kind);
std::string render_id(NodeKind kind, NodeId id);
std::string render_edge_id(EdgeId id);
// Accepts "exp:000042", "42" or any "<prefix>:<digits>".
NodeId parse_node_id(std::string_view text);

}  // namespace apex

template <>
struct std::hash<apex::NodeId> {
    std::size_t operator()(const apex::NodeId& id) const noexcept {
        return std::hash<std::uint64_t>{}(id.value);
    }
};
