#pragma once
// Ingest: turn teacher feedback into Error Registry / Patch entries and commit
// quality-gated experiences with their similarity and supersedes edges.

#include <functional>
#include <string_view>
#include <vector>

#include "apex/experience.hpp"
#include "apex/plan.hpp"
#include "apex/resolver.hpp"

namespace apex {

struct ExtractedFeedback {
    std::vector<ErrorEntry> errors;
    std::vector<PatchEntry> patches;
};

using FeedbackExtractor = std::function<ExtractedFeedback(std::string_view feedback)>;

// Line grammar (other lines are ignored):
//   ERROR: <class> @step <n> [@iter <m>] [recovery=<procedure>] [outcome=<outcome>]
//   CAUSE: <hypothesis words...> <confidence>
//   PATCH: <insert_step|replace_logic> <location> <new logic...>
// CAUSE attaches to the preceding ERROR; PATCH is triggered by it.
// Throws ParseError on anything malformed, including unknown error classes.
ExtractedFeedback stub_feedback_extractor(std::string_view feedback);

// Never throws: extractor failures yield empty lists and a logged warning.
ExtractedFeedback decompose_feedback(std::string_view feedback,
                                     const FeedbackExtractor& extractor = stub_feedback_extractor);

inline constexpr std::size_t kSimilarWindow = 1000;

struct CommitOptions {
    std::vector<NodeId> derived_from;  // experiences consulted while producing this one
    std::vector<RawStep> steps;        // planning steps, one per signature op, when available
    std::size_t similar_window = kSimilarWindow;
};

struct CommitResult {
    NodeId id;
    std::vector<NodeId> archived;
    std::size_t similar_edges = 0;
    std::size_t structural_edges = 0;
    std::size_t entity_edges = 0;
};

// Caller holds the namespace write lock (resolver.memory()).
CommitResult commit(EntityResolver& resolver, ExperienceRecord rec, const CommitOptions& opts = {});

}  // namespace apex
