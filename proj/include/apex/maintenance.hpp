#pragma once
// Explicit memory upkeep: archive dominated experiences, promote the best
// member of tightly similar groups to a procedure template, and flag
// experiences bound to superseded entities. Never edits record content.

#include <vector>

#include "apex/memory.hpp"

namespace apex {

inline constexpr std::size_t kMinConsolidationGroup = 3;

struct ArchivedAction {
    NodeId id;
    NodeId by;
};

struct TemplateAction {
    NodeId id;
    std::vector<NodeId> group;
    std::string procedure_ref;
};

struct StaleAction {
    NodeId id;
    std::vector<NodeId> superseded_entities;
};

struct CompactionReport {
    std::vector<ArchivedAction> archived;
    std::vector<TemplateAction> templates;
    std::vector<StaleAction> stale;

    bool empty() const { return archived.empty() && templates.empty() && stale.empty(); }
};

// Caller holds the namespace write lock.
CompactionReport compact(Memory& mem);
Json report_to_json(const CompactionReport& report);

}  // namespace apex
