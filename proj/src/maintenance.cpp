#include "apex/maintenance.hpp"

#include <algorithm>
#include <map>

#include "apex/retrieval.hpp"

namespace apex {

namespace {

void archive(GraphStore& g, NodeId id) {
    NodeFlags f = g.node(id).flags;
    f.archived = true;
    g.set_flags(id, f);
}

}  // namespace

CompactionReport compact(Memory& mem) {
    CompactionReport report;
    GraphStore& g = mem.graph();

    // (a) dominated experiences: same domain and signature, strictly lower q.
    std::map<std::pair<std::string, std::string>, std::vector<NodeId>> groups;
    for (const auto& [id, entry] : mem.experiences()) {
        if (mem.is_archived(id)) continue;
        groups[{entry.record.goal.domain, entry.record.goal.goal_signature}].push_back(id);
    }
    for (const auto& [key, members] : groups) {
        NodeId best = members.front();
        for (NodeId id : members) {
            if (mem.experience(id)->record.evaluation.overall >
                mem.experience(best)->record.evaluation.overall) {
                best = id;
            }
        }
        const double best_q = mem.experience(best)->record.evaluation.overall;
        for (NodeId id : members) {
            if (!(mem.experience(id)->record.evaluation.overall < best_q)) continue;
            if (!g.is_superseded(id)) {
                try {
                    g.add_edge(best, id, EdgeKind::Supersedes, 1.0);
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::CycleDetected) throw;
                }
            }
            archive(g, id);
            report.archived.push_back({id, best});
        }
    }

    // (b) consolidation into representative templates.
    std::vector<NodeId> live;
    for (const auto& [id, _] : mem.experiences()) {
        if (!mem.is_archived(id)) live.push_back(id);
    }
    std::vector<bool> used(live.size(), false);
    for (std::size_t i = 0; i < live.size(); ++i) {
        if (used[i]) continue;
        const auto& seed = mem.experience(live[i])->record;
        std::vector<std::size_t> group{i};
        for (std::size_t j = i + 1; j < live.size(); ++j) {
            if (used[j]) continue;
            const auto& cand = mem.experience(live[j])->record;
            if (cand.goal.domain != seed.goal.domain) continue;
            const bool fits = std::all_of(group.begin(), group.end(), [&](std::size_t k) {
                return structural_similarity(mem.experience(live[k])->record.signature,
                                             cand.signature) > kExperienceSupersedeThreshold;
            });
            if (fits) group.push_back(j);
        }
        if (group.size() < kMinConsolidationGroup) continue;
        for (std::size_t k : group) used[k] = true;
        NodeId best = live[group.front()];
        for (std::size_t k : group) {
            if (mem.experience(live[k])->record.evaluation.overall >
                mem.experience(best)->record.evaluation.overall) {
                best = live[k];
            }
        }
        NodeFlags f = g.node(best).flags;
        if (f.is_template) continue;
        f.is_template = true;
        f.procedure_bump += 1;
        g.set_flags(best, f);
        TemplateAction action;
        action.id = best;
        for (std::size_t k : group) action.group.push_back(live[k]);
        action.procedure_ref = effective_procedure_ref(
            mem.experience(best)->record.procedure.procedure_ref_id, f.procedure_bump);
        report.templates.push_back(std::move(action));
    }

    // (c) experiences bound to superseded entities.
    for (const auto& [id, _] : mem.experiences()) {
        StaleAction action{id, {}};
        for (const GraphEdge* e : g.out_edges(id, EdgeKind::UsesEntity)) {
            if (g.is_superseded(e->to)) action.superseded_entities.push_back(e->to);
        }
        if (action.superseded_entities.empty() || g.node(id).flags.stale) continue;
        NodeFlags f = g.node(id).flags;
        f.stale = true;
        g.set_flags(id, f);
        report.stale.push_back(std::move(action));
    }
    return report;
}

Json report_to_json(const CompactionReport& report) {
    auto exp_id = [](NodeId id) { return render_id(NodeKind::Experience, id); };
    Json archived = Json::array();
    for (const auto& a : report.archived) {
        archived.push_back({{"id", exp_id(a.id)}, {"superseded_by", exp_id(a.by)}});
    }
    Json templates = Json::array();
    for (const auto& t : report.templates) {
        Json group = Json::array();
        for (NodeId id : t.group) group.push_back(exp_id(id));
        templates.push_back({{"id", exp_id(t.id)}, {"group", group}, {"procedure_ref", t.procedure_ref}});
    }
    Json stale = Json::array();
    for (const auto& s : report.stale) {
        Json ents = Json::array();
        for (NodeId id : s.superseded_entities) ents.push_back(render_id(NodeKind::Entity, id));
        stale.push_back({{"id", exp_id(s.id)}, {"superseded_entities", ents}});
    }
    return {{"archived", archived}, {"templates", templates}, {"stale", stale}};
}

}  // namespace apex
