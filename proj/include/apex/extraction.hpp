#pragma once
// Signature extraction as a side effect of graph construction: every step is
// resolved to an Operation node, consecutive operations are chained with
// FOLLOWED_BY, and step metadata becomes RELATES_TO / USES / MEMBER_OF edges.

#include <span>
#include <vector>

#include "apex/plan.hpp"
#include "apex/resolver.hpp"

namespace apex {

struct ExtractionResult {
    StructuralSignature signature;
    std::vector<NodeId> operations;  // one per step, in step order
    std::vector<NodeId> entities;    // distinct entity/property nodes touched
    std::size_t nodes_created = 0;
};

// Writes to the graph: the caller holds the namespace write lock.
ExtractionResult extract_signature(std::span<const RawStep> steps, EntityResolver& resolver,
                                   std::string_view domain,
                                   const OperationCanon& canon = OperationCanon::defaults());

// Canonical op id for one step without touching the graph: synonym canon,
// then a read-only resolver probe, then the slug of the step text.
std::string hypothesize_op(const RawStep& step, const EntityResolver& resolver,
                           const OperationCanon& canon = OperationCanon::defaults());
StructuralSignature hypothesize_signature(std::span<const RawStep> steps,
                                          const EntityResolver& resolver,
                                          const OperationCanon& canon = OperationCanon::defaults());

// Find-or-create the Operation nodes of a signature and chain them.
std::vector<NodeId> materialize_signature(const StructuralSignature& sig, EntityResolver& resolver);

// Resolves step entities/properties/topics and adds USES, RELATES_TO and
// MEMBER_OF edges around the given per-step operation nodes. Returns the
// distinct entity nodes touched.
std::vector<NodeId> link_step_metadata(std::span<const RawStep> steps, std::span<const NodeId> ops,
                                       EntityResolver& resolver, std::string_view domain);

}  // namespace apex
