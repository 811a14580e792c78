#include "apex/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>
#include <unordered_map>

namespace apex {

namespace {

constexpr EdgeKind kGraphKinds[] = {EdgeKind::DerivedFrom, EdgeKind::UsesEntity,
                                    EdgeKind::StructurallySimilarTo};

bool by_score(const ScoredId& a, const ScoredId& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
}

double unit(double v) { return std::clamp(v, 0.0, 1.0); }

Json weights_json(const RetrievalWeights& w) {
    return {{"alpha", w.alpha}, {"beta", w.beta}, {"gamma", w.gamma},
            {"delta", w.delta}, {"epsilon", w.epsilon}};
}

}  // namespace

Json retrieval_config_to_json(const RetrievalConfig& cfg) {
    return {{"weights", weights_json(cfg.weights)},
            {"tau_sigma", cfg.tau_sigma},
            {"k_pos", cfg.k_pos},
            {"k_neg", cfg.k_neg},
            {"semantic_k", cfg.semantic_k},
            {"semantic_floor", cfg.semantic_floor},
            {"recency_half_life", cfg.recency_half_life},
            {"max_hops", cfg.max_hops},
            {"enable_semantic", cfg.enable_semantic},
            {"enable_structural", cfg.enable_structural},
            {"enable_graph", cfg.enable_graph}};
}

RetrievalConfig retrieval_config_from_json(const Json& j) {
    RetrievalConfig cfg;
    try {
        if (j.contains("weights")) {
            const auto& w = j["weights"];
            cfg.weights.alpha = w.value("alpha", cfg.weights.alpha);
            cfg.weights.beta = w.value("beta", cfg.weights.beta);
            cfg.weights.gamma = w.value("gamma", cfg.weights.gamma);
            cfg.weights.delta = w.value("delta", cfg.weights.delta);
            cfg.weights.epsilon = w.value("epsilon", cfg.weights.epsilon);
        }
        cfg.tau_sigma = j.value("tau_sigma", cfg.tau_sigma);
        cfg.k_pos = j.value("k_pos", cfg.k_pos);
        cfg.k_neg = j.value("k_neg", cfg.k_neg);
        cfg.semantic_k = j.value("semantic_k", cfg.semantic_k);
        cfg.semantic_floor = j.value("semantic_floor", cfg.semantic_floor);
        cfg.recency_half_life = j.value("recency_half_life", cfg.recency_half_life);
        cfg.max_hops = j.value("max_hops", cfg.max_hops);
        cfg.enable_semantic = j.value("enable_semantic", cfg.enable_semantic);
        cfg.enable_structural = j.value("enable_structural", cfg.enable_structural);
        cfg.enable_graph = j.value("enable_graph", cfg.enable_graph);
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("retrieval config: ") + e.what());
    }
    if (!(cfg.tau_sigma > 0.0 && cfg.tau_sigma <= 1.0) || cfg.semantic_k == 0 ||
        !(cfg.recency_half_life > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "retrieval config out of range");
    }
    return cfg;
}

std::vector<ScoredId> semantic_candidates(const Memory& mem, const EmbeddingVector& e_t,
                                          std::size_t k) {
    return mem.experience_index().search(e_t, k, [&](NodeId id) { return !mem.is_archived(id); });
}

std::vector<ScoredId> structural_candidates(const Memory& mem, const StructuralSignature& sig,
                                            double tau_sigma) {
    std::vector<ScoredId> out;
    if (sig.empty()) return out;
    std::unordered_map<std::string, double> memo;
    for (const auto& [id, entry] : mem.experiences()) {
        if (mem.is_archived(id)) continue;
        const auto& fp = entry.record.goal.goal_signature;
        auto it = memo.find(fp);
        if (it == memo.end()) {
            it = memo.emplace(fp, structural_similarity(sig, entry.record.signature)).first;
        }
        if (it->second >= tau_sigma) out.push_back({id, it->second});
    }
    std::sort(out.begin(), out.end(), by_score);
    return out;
}

std::vector<ScoredId> graph_candidates(const Memory& mem, std::span<const NodeId> seeds,
                                       int max_hops) {
    std::vector<ScoredId> out;
    if (seeds.empty()) return out;
    const auto& g = mem.graph();
    for (const auto& [id, depth] : g.traverse_depths(seeds, kGraphKinds, max_hops)) {
        if (g.node(id).kind != NodeKind::Experience) continue;
        out.push_back({id, depth <= 1 ? 1.0 : 0.5});
    }
    std::sort(out.begin(), out.end(), by_score);
    return out;
}

double recency_score(std::uint64_t commits_total, std::uint64_t commit_seq, double half_life) {
    const double age = commits_total >= commit_seq ? static_cast<double>(commits_total - commit_seq) : 0.0;
    return std::exp2(-age / half_life);
}

std::string effective_procedure_ref(const std::string& procedure_ref_id, int bump) {
    if (bump <= 0) return procedure_ref_id;
    static const std::regex re("^(proc:[^:]+:v)([0-9]+)$");
    std::smatch m;
    if (!std::regex_match(procedure_ref_id, m, re)) return procedure_ref_id;
    return m[1].str() + std::to_string(std::stoi(m[2].str()) + bump);
}

RetrievalBundle retrieve(const Memory& mem, const EmbeddingVector& e_t,
                         const StructuralSignature& sig, const RetrievalConfig& cfg) {
    RetrievalBundle bundle;
    bundle.diagnostics.weights = cfg.weights;
    const auto& g = mem.graph();

    std::vector<ScoredId> sem, str, gr;
    if (cfg.enable_semantic && mem.experience_index().size() > 0) {
        sem = semantic_candidates(mem, e_t, cfg.semantic_k);
        std::erase_if(sem, [&](const ScoredId& s) { return s.score < cfg.semantic_floor; });
    }
    if (cfg.enable_structural) str = structural_candidates(mem, sig, cfg.tau_sigma);
    std::vector<NodeId> seeds;
    for (const auto& s : sem) seeds.push_back(s.id);
    for (const auto& s : str) seeds.push_back(s.id);
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
    if (cfg.enable_graph) gr = graph_candidates(mem, seeds, cfg.max_hops);

    bundle.diagnostics.semantic = sem.size();
    bundle.diagnostics.structural = str.size();
    bundle.diagnostics.graph = gr.size();

    std::unordered_map<NodeId, double> prox;
    for (const auto& s : gr) prox[s.id] = s.score;

    std::map<NodeId, bool> merged;  // ordered for determinism
    for (const auto* list : {&sem, &str, &gr}) {
        for (const auto& s : *list) {
            const NodeId latest = g.resolve_latest(s.id);
            if (mem.is_archived(latest) || !mem.experience(latest)) continue;
            merged[latest] = true;
        }
    }
    bundle.diagnostics.merged = merged.size();

    const auto& w = cfg.weights;
    std::vector<BundleEntry> scored;
    for (const auto& [id, _] : merged) {
        const ExperienceEntry& entry = *mem.experience(id);
        BundleEntry b;
        b.id = id;
        b.record = &entry.record;
        auto& s = b.score;
        s.weights = w;
        if (cfg.enable_semantic) s.sim_sem = unit(cosine(e_t, entry.record.goal.task_embedding));
        if (cfg.enable_structural) s.sim_sigma = structural_similarity(sig, entry.record.signature);
        if (cfg.enable_graph) {
            auto it = prox.find(id);
            s.prox_g = it == prox.end() ? 0.0 : it->second;
        }
        s.quality = unit(entry.record.evaluation.overall);
        s.recency = recency_score(mem.commits_total(), entry.commit_seq, cfg.recency_half_life);
        s.total = w.alpha * s.sim_sem + w.beta * s.sim_sigma + w.gamma * s.prox_g +
                  w.delta * s.quality + w.epsilon * s.recency;
        scored.push_back(std::move(b));
    }
    std::sort(scored.begin(), scored.end(), [](const BundleEntry& a, const BundleEntry& b) {
        if (a.score.total != b.score.total) return a.score.total > b.score.total;
        return a.id < b.id;
    });

    std::size_t n_pos = 0, n_neg = 0;
    for (const auto& b : scored) (b.record->status == Status::Successful ? n_pos : n_neg)++;
    auto [k_pos, k_neg] = cfg.dynamic_k ? cfg.dynamic_k(n_pos, n_neg)
                                        : std::pair<std::size_t, std::size_t>{cfg.k_pos, cfg.k_neg};

    for (auto& b : scored) {
        auto& target = b.record->status == Status::Successful ? bundle.positives : bundle.negatives;
        const std::size_t cap = b.record->status == Status::Successful ? k_pos : k_neg;
        if (target.size() >= cap) continue;
        const GraphNode& node = g.node(b.id);
        b.stale = node.flags.stale;
        b.procedure_ref = effective_procedure_ref(b.record->procedure.procedure_ref_id,
                                                  node.flags.procedure_bump);
        for (const GraphEdge* e : g.out_edges(b.id, EdgeKind::UsesEntity)) {
            const NodeId latest = g.resolve_latest(e->to);
            b.entity_bindings.push_back({e->to, latest, g.node(latest).title});
        }
        target.push_back(std::move(b));
    }
    return bundle;
}

Json bundle_to_json(const RetrievalBundle& bundle) {
    auto entries = [](const std::vector<BundleEntry>& list) {
        Json arr = Json::array();
        for (const auto& b : list) {
            Json bindings = Json::array();
            for (const auto& eb : b.entity_bindings) {
                bindings.push_back({{"original", render_id(NodeKind::Entity, eb.original)},
                                    {"latest", render_id(NodeKind::Entity, eb.latest)},
                                    {"title", eb.title}});
            }
            arr.push_back({{"id", render_id(NodeKind::Experience, b.id)},
                           {"task", b.record->goal.task_description},
                           {"domain", b.record->goal.domain},
                           {"status", to_string(b.record->status)},
                           {"signature", b.record->signature.ops},
                           {"procedure_ref", b.procedure_ref},
                           {"stale", b.stale},
                           {"entity_bindings", bindings},
                           {"score",
                            {{"sim_sem", b.score.sim_sem},
                             {"sim_sigma", b.score.sim_sigma},
                             {"prox_g", b.score.prox_g},
                             {"quality", b.score.quality},
                             {"recency", b.score.recency},
                             {"total", b.score.total}}}});
        }
        return arr;
    };
    const auto& d = bundle.diagnostics;
    return {{"positives", entries(bundle.positives)},
            {"negatives", entries(bundle.negatives)},
            {"diagnostics",
             {{"semantic", d.semantic},
              {"structural", d.structural},
              {"graph", d.graph},
              {"merged", d.merged},
              {"weights", weights_json(d.weights)}}}};
}

}  // namespace apex
