#pragma once
// Hybrid retrieval: semantic, structural-signature and graph-traversal
// candidates merged, scored by a weighted composite, and split into
// positive (successful) and negative (failed) example sets.
//
// All functions read the Memory without locking; call them inside
// Memory::read().

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "apex/memory.hpp"

namespace apex {

struct RetrievalWeights {
    double alpha = 0.35;    // semantic
    double beta = 0.30;     // structural
    double gamma = 0.10;    // graph proximity
    double delta = 0.15;    // quality
    double epsilon = 0.10;  // recency

    bool operator==(const RetrievalWeights&) const = default;
};

// Chooses (k_pos, k_neg) given how many positive / negative candidates exist.
using DynamicKPolicy = std::function<std::pair<std::size_t, std::size_t>(std::size_t, std::size_t)>;

struct RetrievalConfig {
    RetrievalWeights weights;
    double tau_sigma = 0.6;
    std::size_t k_pos = 3;
    std::size_t k_neg = 2;
    std::size_t semantic_k = 20;
    double semantic_floor = 0.0;
    double recency_half_life = 200.0;
    int max_hops = 2;
    bool enable_semantic = true;
    bool enable_structural = true;
    bool enable_graph = true;
    DynamicKPolicy dynamic_k;
};

Json retrieval_config_to_json(const RetrievalConfig& cfg);
RetrievalConfig retrieval_config_from_json(const Json& j);

struct ScoreBreakdown {
    double sim_sem = 0.0;
    double sim_sigma = 0.0;
    double prox_g = 0.0;
    double quality = 0.0;
    double recency = 0.0;
    double total = 0.0;
    RetrievalWeights weights;
};

struct EntityBinding {
    NodeId original;
    NodeId latest;
    std::string title;  // title of the latest version
};

struct BundleEntry {
    NodeId id;
    const ExperienceRecord* record = nullptr;  // owned by the Memory
    ScoreBreakdown score;
    std::vector<EntityBinding> entity_bindings;
    std::string procedure_ref;  // procedure_ref_id with template refinements applied
    bool stale = false;
};

struct RetrievalDiagnostics {
    std::size_t semantic = 0;
    std::size_t structural = 0;
    std::size_t graph = 0;
    std::size_t merged = 0;
    RetrievalWeights weights;
};

struct RetrievalBundle {
    std::vector<BundleEntry> positives;
    std::vector<BundleEntry> negatives;
    RetrievalDiagnostics diagnostics;

    bool empty() const { return positives.empty() && negatives.empty(); }
};

std::vector<ScoredId> semantic_candidates(const Memory& mem, const EmbeddingVector& e_t,
                                          std::size_t k);
std::vector<ScoredId> structural_candidates(const Memory& mem, const StructuralSignature& sig,
                                            double tau_sigma);
std::vector<ScoredId> graph_candidates(const Memory& mem, std::span<const NodeId> seeds,
                                       int max_hops = 2);

double recency_score(std::uint64_t commits_total, std::uint64_t commit_seq, double half_life);
std::string effective_procedure_ref(const std::string& procedure_ref_id, int bump);

RetrievalBundle retrieve(const Memory& mem, const EmbeddingVector& e_t,
                         const StructuralSignature& sig, const RetrievalConfig& cfg = {});

Json bundle_to_json(const RetrievalBundle& bundle);

}  // namespace apex
