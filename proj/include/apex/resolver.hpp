#pragma once
// Mention -> PKG node resolution: embed, search same kind and domain, match
// above tau_r, hand near-ties to a disambiguator, otherwise create.
//
// The resolver does not take the namespace lock. resolve() and probe() need
// at least a read lock on the Memory; flush() needs the write lock. New nodes
// are staged with reserved ids and become graph-visible on flush().

#include <functional>
#include <list>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "apex/memory.hpp"

namespace apex {

enum class ResolutionAction { MatchedExisting, CreatedNew, Disambiguated };
std::string_view to_string(ResolutionAction a);

struct ResolutionOutcome {
    NodeId node;
    ResolutionAction action = ResolutionAction::CreatedNew;
    double score = 0.0;
};

struct ResolutionCandidate {
    NodeId id;
    std::string title;
    double score = 0.0;
};

struct DisambiguationChoice {
    NodeId chosen;
    std::string rationale;
};

using Disambiguator = std::function<DisambiguationChoice(
    std::string_view mention, const std::vector<ResolutionCandidate>& candidates)>;

// Most shared tokens with the mention, then lowest node id.
DisambiguationChoice lexical_disambiguator(std::string_view mention,
                                           const std::vector<ResolutionCandidate>& candidates);

inline constexpr std::string_view kGlobalDomain = "global";

struct ResolverConfig {
    double tau_r = 0.85;
    double delta_amb = 0.02;
    std::size_t cache_capacity = 4096;
    bool cache_enabled = true;
    std::size_t search_k = 16;
};

class EntityResolver {
public:
    explicit EntityResolver(Memory& memory, ResolverConfig cfg = {},
                            Disambiguator disambiguator = lexical_disambiguator);

    // kind must be Entity or Operation; Operation mentions ignore `domain`.
    ResolutionOutcome resolve(std::string_view mention, NodeKind kind, std::string_view domain);
    // Exact lookup of a canonical operation id, staging it when absent.
    ResolutionOutcome resolve_operation(std::string_view op_id);
    // Resolution without side effects; nullopt when resolve() would create.
    std::optional<ResolutionOutcome> probe(std::string_view mention, NodeKind kind,
                                           std::string_view domain) const;

    void flush();
    std::size_t pending() const;

    std::size_t cache_hits() const;
    std::size_t cache_misses() const;
    void clear_cache();
    const ResolverConfig& config() const { return cfg_; }
    Memory& memory() { return memory_; }
    const Memory& memory() const { return memory_; }

private:
    struct Pending {
        GraphNode node;
        EmbeddingVector embedding;
    };
    using CacheList = std::list<std::pair<std::string, ResolutionOutcome>>;

    std::optional<ResolutionOutcome> lookup(std::string_view mention, NodeKind kind,
                                            const std::string& domain,
                                            const EmbeddingVector& query) const;
    ResolutionOutcome stage(std::string_view mention, NodeKind kind, const std::string& domain,
                            EmbeddingVector embedding, std::string payload);
    ResolutionOutcome latest(ResolutionOutcome o) const;
    const ResolutionOutcome* cache_get(const std::string& key);
    void cache_put(const std::string& key, const ResolutionOutcome& o);

    Memory& memory_;
    ResolverConfig cfg_;
    Disambiguator disambiguator_;
    mutable std::mutex mutex_;
    std::vector<Pending> pending_;
    CacheList lru_;
    std::unordered_map<std::string, CacheList::iterator> cache_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

}  // namespace apex
