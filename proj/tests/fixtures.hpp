#pragma once
// Shared builders and brute-force oracles for the test suites.

#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "apex/experience.hpp"
#include "apex/graph_store.hpp"
#include "apex/ingest.hpp"
#include "apex/memory.hpp"
#include "apex/resolver.hpp"
#include "apex/retrieval.hpp"

namespace fx {

using namespace apex;

inline GraphNode node(NodeKind kind, std::string title, std::string payload = {},
                      std::string domain = "test") {
    GraphNode n;
    n.kind = kind;
    n.title = title;
    n.description = "node " + title;
    n.domain_tag = std::move(domain);
    n.payload = payload.empty() && kind == NodeKind::Operation ? op_id_from_text(title) : std::move(payload);
    if (kind == NodeKind::Experience && n.payload.empty()) n.payload = "proc:" + title + ":v1";
    if (kind == NodeKind::TaskTopic && n.payload.empty()) n.payload = "topic:" + title;
    return n;
}

// Undirected BFS over an explicit edge list; seeds excluded from the result.
inline std::unordered_set<NodeId> bfs_oracle(const std::vector<GraphEdge>& edges,
                                              const std::set<EdgeKind>& kinds,
                                              const std::vector<NodeId>& seeds, int max_hops) {
    std::map<NodeId, std::vector<NodeId>> adj;
    for (const auto& e : edges) {
        if (!kinds.count(e.kind)) continue;
        adj[e.from].push_back(e.to);
        adj[e.to].push_back(e.from);
    }
    std::map<NodeId, int> dist;
    std::deque<NodeId> q;
    for (auto s : seeds) {
        dist[s] = 0;
        q.push_back(s);
    }
    while (!q.empty()) {
        auto u = q.front();
        q.pop_front();
        if (dist[u] == max_hops) continue;
        for (auto v : adj[u]) {
            if (!dist.count(v)) {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
        }
    }
    std::unordered_set<NodeId> out;
    std::set<NodeId> seed_set(seeds.begin(), seeds.end());
    for (auto& [id, d] : dist) {
        if (!seed_set.count(id)) out.insert(id);
    }
    return out;
}

// Longest common subsequence by enumerating every subsequence of `a`.
inline std::size_t lcs_bruteforce(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::size_t best = 0;
    const std::size_t n = a.size();
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<std::string> sub;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) sub.push_back(a[i]);
        }
        if (sub.size() <= best) continue;
        std::size_t j = 0;
        for (const auto& x : b) {
            if (j < sub.size() && sub[j] == x) ++j;
        }
        if (j == sub.size()) best = sub.size();
    }
    return best;
}

inline PlanDecomposition plan(std::string id, std::string description, std::string domain,
                              const std::vector<std::string>& step_texts) {
    PlanDecomposition p;
    p.task_id = std::move(id);
    p.task_description = std::move(description);
    p.domain = std::move(domain);
    p.understanding.intent = "answer the question";
    for (const auto& s : step_texts) p.steps.push_back({s, {}, {}, ""});
    return p;
}

inline Evaluation evaluation(double c, double eta, double kappa, std::string feedback = {}) {
    Evaluation ev;
    ev.correctness = c;
    ev.efficiency = eta;
    ev.completeness = kappa;
    ev.teacher_feedback = std::move(feedback);
    ev.overall = compute_quality({c, eta, kappa, ev.teacher_feedback, false}, ev.weights);
    return ev;
}

// A valid record over the given ops; quality from (c, eta, kappa).
inline ExperienceRecord record(const std::string& description, const std::string& domain,
                               const std::vector<std::string>& ops, double c, double eta = 1.0,
                               double kappa = 1.0, const EmbeddingProvider* embedder = nullptr,
                               std::vector<std::string> entities = {}) {
    HashingEmbedder fallback;
    const EmbeddingProvider& emb = embedder ? *embedder : fallback;
    auto p = plan("t", description, domain, {});
    p.entities = std::move(entities);
    for (const auto& op : ops) p.steps.push_back({humanize_op(op), {}, {}, ""});
    std::vector<IterationStep> trace{{Intent::Exploration, "artifact", "ran", c >= 0.5, c >= 0.5 ? "" : "ERROR: tool_failure @step 1"}};
    AssemblyExtras extras;
    extras.task_embedding = emb.embed(description);
    extras.oracle_reject = c < 0.5;
    if (c < 0.5) {
        extras.errors.push_back({ErrorClass::ToolFailure, 1, 1, "tool crashed", 0.7,
                                 RecoveryProcedure::RetryWithPatch, RecoveryOutcome::FailedRecovery});
    }
    return assemble_experience(p, trace, evaluation(c, eta, kappa), StructuralSignature{ops}, extras);
}

// Hop depth of every node reachable within max_hops over the given kinds (undirected).
inline std::map<NodeId, int> bfs_depths(const std::vector<GraphEdge>& edges, const std::set<EdgeKind>& kinds,
                                        const std::vector<NodeId>& seeds, int max_hops) {
    std::map<NodeId, std::vector<NodeId>> adj;
    for (const auto& e : edges) {
        if (!kinds.count(e.kind)) continue;
        adj[e.from].push_back(e.to);
        adj[e.to].push_back(e.from);
    }
    std::map<NodeId, int> dist;
    std::deque<NodeId> q;
    for (auto s : seeds) {
        dist[s] = 0;
        q.push_back(s);
    }
    while (!q.empty()) {
        auto u = q.front();
        q.pop_front();
        if (dist[u] == max_hops) continue;
        for (auto v : adj[u]) {
            if (!dist.count(v)) {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
        }
    }
    for (auto s : seeds) dist.erase(s);
    return dist;
}

inline double cosine_oracle(const EmbeddingVector& a, const EmbeddingVector& b) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        ab += double(a.values[i]) * b.values[i];
        aa += double(a.values[i]) * a.values[i];
        bb += double(b.values[i]) * b.values[i];
    }
    return aa == 0 || bb == 0 ? 0.0 : ab / std::sqrt(aa * bb);
}

inline double sim_oracle(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) return 0.0;
    const auto& shorter = a.size() <= b.size() ? a : b;
    const auto& longer = a.size() <= b.size() ? b : a;
    return double(lcs_bruteforce(shorter, longer)) / double(shorter.size());
}

struct OracleEntry {
    NodeId id;
    double total;
};

struct OracleBundle {
    std::vector<OracleEntry> positives;
    std::vector<OracleEntry> negatives;
};

// Independent recomputation of hybrid retrieval straight from the log-visible state.
inline OracleBundle oracle_retrieve(const Memory& mem, const EmbeddingVector& e_t, const StructuralSignature& sig,
                                    const RetrievalConfig& cfg) {
    const auto& g = mem.graph();
    auto archived = [&](NodeId id) { return g.node(id).flags.archived; };
    auto latest = [&](NodeId id) {
        for (;;) {
            NodeId next = id;
            for (const auto& e : g.edges()) {
                if (e.kind == EdgeKind::Supersedes && e.to == id) next = e.from;
            }
            if (next == id) return id;
            id = next;
        }
    };

    std::vector<std::pair<double, NodeId>> sem;
    if (cfg.enable_semantic) {
        for (const auto& [id, entry] : mem.experiences()) {
            if (!archived(id)) sem.push_back({cosine_oracle(e_t, entry.record.goal.task_embedding), id});
        }
        std::sort(sem.begin(), sem.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        if (sem.size() > cfg.semantic_k) sem.resize(cfg.semantic_k);
        std::erase_if(sem, [&](const auto& s) { return s.first < cfg.semantic_floor; });
    }
    std::vector<NodeId> str;
    if (cfg.enable_structural) {
        for (const auto& [id, entry] : mem.experiences()) {
            if (!archived(id) && sim_oracle(sig.ops, entry.record.signature.ops) >= cfg.tau_sigma) str.push_back(id);
        }
    }
    std::set<NodeId> seeds;
    for (const auto& s : sem) seeds.insert(s.second);
    seeds.insert(str.begin(), str.end());
    std::map<NodeId, double> prox;
    std::vector<NodeId> gr;
    if (cfg.enable_graph && !seeds.empty()) {
        auto depths = bfs_depths(g.edges(), {EdgeKind::DerivedFrom, EdgeKind::UsesEntity, EdgeKind::StructurallySimilarTo},
                                 {seeds.begin(), seeds.end()}, cfg.max_hops);
        for (const auto& [id, d] : depths) {
            if (g.node(id).kind != NodeKind::Experience) continue;
            prox[id] = d <= 1 ? 1.0 : 0.5;
            gr.push_back(id);
        }
    }
    std::set<NodeId> merged;
    auto add = [&](NodeId id) {
        NodeId l = latest(id);
        if (!archived(l) && mem.experience(l)) merged.insert(l);
    };
    for (const auto& s : sem) add(s.second);
    for (auto id : str) add(id);
    for (auto id : gr) add(id);

    const auto& order = mem.commit_order();
    const auto& w = cfg.weights;
    std::vector<std::pair<OracleEntry, bool>> scored;
    for (NodeId id : merged) {
        const auto& rec = mem.experience(id)->record;
        const auto pos = std::find(order.begin(), order.end(), id) - order.begin();
        const double age = double(order.size()) - double(pos + 1);
        double t = 0;
        if (cfg.enable_semantic) t += w.alpha * std::clamp(cosine_oracle(e_t, rec.goal.task_embedding), 0.0, 1.0);
        if (cfg.enable_structural) t += w.beta * sim_oracle(sig.ops, rec.signature.ops);
        if (cfg.enable_graph && prox.count(id)) t += w.gamma * prox[id];
        t += w.delta * rec.evaluation.overall + w.epsilon * std::pow(2.0, -age / cfg.recency_half_life);
        scored.push_back({{id, t}, rec.status == Status::Successful});
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        return a.first.total != b.first.total ? a.first.total > b.first.total : a.first.id < b.first.id;
    });
    OracleBundle out;
    for (const auto& [e, ok] : scored) {
        auto& list = ok ? out.positives : out.negatives;
        if (list.size() < (ok ? cfg.k_pos : cfg.k_neg)) list.push_back(e);
    }
    return out;
}

// Random namespace with overlapping text, signatures, entities, lineage and versioned entities.
inline void random_memory(Memory& mem, std::uint64_t seed, std::size_t n) {
    static const std::vector<std::string> words{"goals", "season", "revenue", "player", "company", "fiscal",
                                                "totals", "league", "market", "quarter", "striker", "profit"};
    static const std::vector<std::string> ops{"op:entity_resolution", "op:temporal_filter", "op:aggregation",
                                              "op:comparison", "op:join", "op:sorting"};
    static const std::vector<std::string> domains{"sports", "business"};
    std::mt19937_64 rng(seed);
    EntityResolver res(mem);
    std::vector<NodeId> ids;
    for (std::size_t i = 0; i < n; ++i) {
        std::string desc;
        for (int k = 0; k < 4; ++k) desc += (k ? " " : "") + words[rng() % words.size()];
        std::vector<std::string> sig;
        const std::size_t len = 2 + rng() % 4;
        for (std::size_t k = 0; k < len; ++k) sig.push_back(ops[rng() % ops.size()]);
        const double c = double(rng() % 5) / 4.0;
        CommitOptions opts;
        if (!ids.empty() && rng() % 4 == 0) opts.derived_from.push_back(ids[rng() % ids.size()]);
        std::vector<std::string> ents{"entity" + std::to_string(rng() % 6)};
        ids.push_back(commit(res, record(desc, domains[rng() % 2], sig, c, double(rng() % 3) / 2.0, 1.0,
                                         &mem.embedder(), ents),
                             opts)
                          .id);
    }
    auto& g = mem.graph();
    for (NodeId e : g.nodes_of_kind(NodeKind::Entity)) {
        if (rng() % 3 == 0 && !g.is_superseded(e)) {
            auto repl = g.node(e);
            repl.description += " (updated)";
            g.version_entity(e, repl);
        }
    }
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        static std::mt19937_64 rng{std::random_device{}()};
        path = std::filesystem::temp_directory_path() / ("apex-test-" + tag + "-" + std::to_string(rng()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

}  // namespace fx
