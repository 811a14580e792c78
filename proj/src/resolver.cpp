#include "apex/resolver.hpp"

#include <algorithm>
#include <set>

#include <spdlog/spdlog.h>

namespace apex {

std::string_view to_string(ResolutionAction a) {
    switch (a) {
        case ResolutionAction::MatchedExisting: return "matched_existing";
        case ResolutionAction::CreatedNew: return "created_new";
        case ResolutionAction::Disambiguated: return "disambiguated";
    }
    return "unknown";
}

DisambiguationChoice lexical_disambiguator(std::string_view mention,
                                           const std::vector<ResolutionCandidate>& candidates) {
    if (candidates.empty()) throw Error(ErrorCode::InvalidArgument, "no candidates");
    const auto mt = tokenize(mention);
    const std::set<std::string> mention_tokens(mt.begin(), mt.end());
    const ResolutionCandidate* best = nullptr;
    std::size_t best_overlap = 0;
    for (const auto& c : candidates) {
        std::size_t overlap = 0;
        const auto ct = tokenize(c.title);
        for (const auto& t : std::set<std::string>(ct.begin(), ct.end())) {
            overlap += mention_tokens.count(t);
        }
        if (!best || overlap > best_overlap || (overlap == best_overlap && c.id < best->id)) {
            best = &c;
            best_overlap = overlap;
        }
    }
    return {best->id, "lexical overlap " + std::to_string(best_overlap) + " with '" +
                          best->title + "'"};
}

EntityResolver::EntityResolver(Memory& memory, ResolverConfig cfg, Disambiguator disambiguator)
    : memory_(memory), cfg_(cfg), disambiguator_(std::move(disambiguator)) {
    if (!(cfg_.tau_r > 0.0 && cfg_.tau_r <= 1.0) || cfg_.delta_amb < 0.0 || cfg_.search_k == 0) {
        throw Error(ErrorCode::InvalidArgument, "invalid resolver configuration");
    }
}

namespace {

std::string effective_domain(NodeKind kind, std::string_view domain) {
    return kind == NodeKind::Operation ? std::string(kGlobalDomain) : std::string(domain);
}

void check_request(std::string_view mention, NodeKind kind) {
    if (kind != NodeKind::Entity && kind != NodeKind::Operation) {
        throw Error(ErrorCode::InvalidArgument, "resolver handles Entity and Operation mentions");
    }
    if (tokenize(mention).empty()) throw Error(ErrorCode::EmptyText, "empty mention");
}

std::string cache_key(std::string_view mention, NodeKind kind, const std::string& domain) {
    std::string key(mention);
    key.push_back('\x1f');
    key += to_string(kind);
    key.push_back('\x1f');
    key += domain;
    return key;
}

}  // namespace

std::optional<ResolutionOutcome> EntityResolver::lookup(std::string_view mention, NodeKind kind,
                                                        const std::string& domain,
                                                        const EmbeddingVector& query) const {
    const GraphStore& g = memory_.graph();
    std::vector<ResolutionCandidate> cands;
    for (const auto& hit : memory_.mention_index().search(query, cfg_.search_k, [&](NodeId id) {
             const GraphNode* n = g.find(id);
             return n && n->kind == kind && n->domain_tag == domain && !g.is_superseded(id);
         })) {
        cands.push_back({hit.id, g.node(hit.id).title, hit.score});
    }
    for (const auto& p : pending_) {
        if (p.node.kind == kind && p.node.domain_tag == domain) {
            cands.push_back({p.node.id, p.node.title, cosine(query, p.embedding)});
        }
    }
    std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    if (cands.empty() || cands.front().score < cfg_.tau_r) return std::nullopt;

    const double top = cands.front().score;
    std::vector<ResolutionCandidate> band;
    for (const auto& c : cands) {
        if (c.score >= cfg_.tau_r && top - c.score <= cfg_.delta_amb) band.push_back(c);
    }
    if (band.size() < 2) {
        return ResolutionOutcome{cands.front().id, ResolutionAction::MatchedExisting, top};
    }
    try {
        const auto choice = disambiguator_(mention, band);
        auto it = std::find_if(band.begin(), band.end(),
                               [&](const auto& c) { return c.id == choice.chosen; });
        if (it == band.end()) {
            throw Error(ErrorCode::HookFailure, "disambiguator chose a non-candidate");
        }
        spdlog::debug("disambiguated '{}' -> {} ({})", mention, it->title, choice.rationale);
        return ResolutionOutcome{it->id, ResolutionAction::Disambiguated, it->score};
    } catch (const std::exception& e) {
        spdlog::warn("disambiguator failed for '{}': {}; creating a new node", mention, e.what());
        return ResolutionOutcome{NodeId{}, ResolutionAction::CreatedNew, 0.0};
    }
}

ResolutionOutcome EntityResolver::latest(ResolutionOutcome o) const {
    if (memory_.graph().contains(o.node)) o.node = memory_.graph().resolve_latest(o.node);
    return o;
}

ResolutionOutcome EntityResolver::stage(std::string_view mention, NodeKind kind,
                                        const std::string& domain, EmbeddingVector embedding,
                                        std::string payload) {
    GraphNode node;
    node.id = memory_.graph().reserve_id();
    node.kind = kind;
    node.domain_tag = domain;
    if (kind == NodeKind::Operation) {
        node.title = humanize_op(payload);
        node.description = "Operation " + payload;
    } else {
        node.title = std::string(mention);
        node.description = "Entity '" + node.title + "' in " + domain;
    }
    node.payload = std::move(payload);
    const NodeId id = node.id;
    pending_.push_back({std::move(node), std::move(embedding)});
    return {id, ResolutionAction::CreatedNew, 1.0};
}

const ResolutionOutcome* EntityResolver::cache_get(const std::string& key) {
    if (!cfg_.cache_enabled) return nullptr;
    auto it = cache_.find(key);
    if (it == cache_.end()) {
        ++misses_;
        return nullptr;
    }
    ++hits_;
    lru_.splice(lru_.begin(), lru_, it->second);
    return &it->second->second;
}

void EntityResolver::cache_put(const std::string& key, const ResolutionOutcome& o) {
    if (!cfg_.cache_enabled || cfg_.cache_capacity == 0) return;
    auto it = cache_.find(key);
    if (it != cache_.end()) {
        it->second->second = o;
        lru_.splice(lru_.begin(), lru_, it->second);
        return;
    }
    lru_.emplace_front(key, o);
    cache_.emplace(key, lru_.begin());
    if (lru_.size() > cfg_.cache_capacity) {
        cache_.erase(lru_.back().first);
        lru_.pop_back();
    }
}

ResolutionOutcome EntityResolver::resolve(std::string_view mention, NodeKind kind,
                                          std::string_view domain) {
    check_request(mention, kind);
    const std::string dom = effective_domain(kind, domain);
    const std::string key = cache_key(mention, kind, dom);
    std::lock_guard lock(mutex_);
    if (const auto* hit = cache_get(key)) return latest(*hit);

    auto embedding = memory_.embedder().embed(mention);
    ResolutionOutcome out;
    auto found = lookup(mention, kind, dom, embedding);
    if (found && found->node.valid()) {
        out = latest(*found);
    } else {
        std::string payload = kind == NodeKind::Operation ? op_id_from_text(mention) : "";
        std::optional<NodeId> same;
        if (kind == NodeKind::Operation) {
            same = memory_.graph().find_by_payload(kind, payload);
            for (const auto& p : pending_) {
                if (!same && p.node.kind == kind && p.node.payload == payload) same = p.node.id;
            }
        }
        out = same ? latest({*same, ResolutionAction::MatchedExisting, 1.0})
                   : stage(mention, kind, dom, std::move(embedding), std::move(payload));
    }
    ResolutionOutcome cached = out;
    if (cached.action == ResolutionAction::CreatedNew) {
        cached.action = ResolutionAction::MatchedExisting;
        cached.score = 1.0;
    }
    cache_put(key, cached);
    return out;
}

ResolutionOutcome EntityResolver::resolve_operation(std::string_view op_id) {
    if (!is_op_id(op_id)) {
        throw Error(ErrorCode::InvalidArgument, "not an operation id: " + std::string(op_id));
    }
    std::lock_guard lock(mutex_);
    if (auto id = memory_.graph().find_by_payload(NodeKind::Operation, op_id)) {
        return {*id, ResolutionAction::MatchedExisting, 1.0};
    }
    for (const auto& p : pending_) {
        if (p.node.kind == NodeKind::Operation && p.node.payload == op_id) {
            return {p.node.id, ResolutionAction::MatchedExisting, 1.0};
        }
    }
    const std::string title = humanize_op(op_id);
    return stage(title, NodeKind::Operation, std::string(kGlobalDomain),
                 memory_.embedder().embed(title), std::string(op_id));
}

std::optional<ResolutionOutcome> EntityResolver::probe(std::string_view mention, NodeKind kind,
                                                       std::string_view domain) const {
    check_request(mention, kind);
    const std::string dom = effective_domain(kind, domain);
    std::lock_guard lock(mutex_);
    if (cfg_.cache_enabled) {
        auto it = cache_.find(cache_key(mention, kind, dom));
        if (it != cache_.end() && memory_.graph().contains(it->second->second.node)) {
            return latest(it->second->second);
        }
    }
    auto found = lookup(mention, kind, dom, memory_.embedder().embed(mention));
    if (!found || !found->node.valid() || !memory_.graph().contains(found->node)) {
        if (kind == NodeKind::Operation) {
            if (auto id = memory_.graph().find_by_payload(kind, op_id_from_text(mention))) {
                return latest({*id, ResolutionAction::MatchedExisting, 1.0});
            }
        }
        return std::nullopt;
    }
    return latest(*found);
}

void EntityResolver::flush() {
    std::lock_guard lock(mutex_);
    for (auto& p : pending_) memory_.graph().add_node(std::move(p.node));
    pending_.clear();
}

std::size_t EntityResolver::pending() const {
    std::lock_guard lock(mutex_);
    return pending_.size();
}

std::size_t EntityResolver::cache_hits() const {
    std::lock_guard lock(mutex_);
    return hits_;
}

std::size_t EntityResolver::cache_misses() const {
    std::lock_guard lock(mutex_);
    return misses_;
}

void EntityResolver::clear_cache() {
    std::lock_guard lock(mutex_);
    lru_.clear();
    cache_.clear();
}

}  // namespace apex
