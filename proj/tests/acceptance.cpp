// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <bit>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

#include <spdlog/spdlog.h>

#include "apex/extraction.hpp"
#include "apex/maintenance.hpp"
#include "apex/sim.hpp"
#include "fixtures.hpp"

using namespace apex;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int number;
    std::string name;
    double budget_s;
    std::function<Verdict()> run;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

// 1. every pair of sequences of length <= 6 over 4 symbols
Verdict lcs_exhaustive() {
    std::vector<std::vector<std::string>> seqs{{}};
    for (std::size_t len = 1; len <= 6; ++len) {
        for (std::size_t code = 0; code < (1u << (2 * len)); ++code) {
            std::vector<std::string> s;
            for (std::size_t i = 0; i < len; ++i) s.push_back(std::string(1, char('a' + ((code >> (2 * i)) & 3))));
            seqs.push_back(std::move(s));
        }
    }
    std::map<std::vector<std::string>, std::size_t> index;
    for (std::size_t i = 0; i < seqs.size(); ++i) index[seqs[i]] = i;
    const std::size_t n = seqs.size(), words = (n + 63) / 64;

    // oracle: each sequence's full set of subsequences as a bitset over the
    // length-ordered enumeration, so the LCS is the length of the highest
    // common member
    std::vector<std::uint64_t> subs(n * words, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = seqs[i];
        for (std::uint32_t mask = 0; mask < (1u << s.size()); ++mask) {
            std::vector<std::string> sub;
            for (std::size_t k = 0; k < s.size(); ++k) {
                if (mask & (1u << k)) sub.push_back(s[k]);
            }
            const std::size_t j = index.at(sub);
            subs[i * words + j / 64] |= 1ull << (j % 64);
        }
    }
    std::vector<std::size_t> length_of(n);
    std::vector<StructuralSignature> sigs(n);
    for (std::size_t i = 0; i < n; ++i) {
        length_of[i] = seqs[i].size();
        sigs[i].ops = seqs[i];
    }

    // sequences of length <= L occupy indices [0, (4^(L+1) - 1) / 3)
    std::size_t top_word[7];
    for (std::size_t len = 0; len <= 6; ++len) top_word[len] = (((1ull << (2 * (len + 1))) - 1) / 3 - 1) / 64;

    // similarity is lcs / min exactly, so an exact match on every non-empty
    // pair pins lcs_length as well; pairs with an empty side call it directly
    std::size_t pairs = 0, mismatches = 0;
    for (std::size_t a = 0; a < n; ++a) {
        const std::uint64_t* sa = &subs[a * words];
        for (std::size_t b = 0; b < n; ++b) {
            const std::uint64_t* sb = &subs[b * words];
            const std::size_t m = std::min(length_of[a], length_of[b]);
            std::size_t oracle = 0;
            for (std::size_t w = top_word[m] + 1; w-- > 0;) {
                const std::uint64_t x = sa[w] & sb[w];
                if (x) {
                    oracle = length_of[w * 64 + 63 - std::countl_zero(x)];
                    break;
                }
            }
            if (m == 0) {
                if (lcs_length(seqs[a], seqs[b]) != 0 || structural_similarity(sigs[a], sigs[b]) != 0.0) ++mismatches;
            } else if (structural_similarity(sigs[a], sigs[b]) != double(oracle) / double(m)) {
                ++mismatches;
            }
            ++pairs;
        }
    }
    return {mismatches == 0, std::to_string(pairs) + " pairs, " + std::to_string(mismatches) + " mismatches"};
}

// 2. sports/business pair: structural match without lexical overlap
Verdict cross_domain_pair() {
    Memory mem;
    EntityResolver res(mem);
    auto fig = sim::cross_domain_fixture();
    auto sports = extract_signature(fig.sports.steps, res, "sports");
    auto business = hypothesize_signature(fig.business.steps, res);
    const double sim_sigma = structural_similarity(sports.signature, business);

    std::vector<IterationStep> trace{{Intent::Exploration, "artifact", "ok", true, ""}};
    AssemblyExtras x;
    x.task_embedding = mem.embedder().embed(fig.sports.task_description);
    const auto id = commit(res, assemble_experience(fig.sports, trace, fx::evaluation(1, 1, 1), sports.signature, x)).id;

    const auto e_t = mem.embedder().embed(fig.business.task_description);
    const double sim_sem = cosine(e_t, x.task_embedding);

    RetrievalConfig structural_only;
    structural_only.enable_semantic = structural_only.enable_graph = false;
    const auto hits = structural_candidates(mem, business, 0.6);
    const bool structural_found = hits.size() == 1 && hits[0].id == id && hits[0].score == 1.0;
    const auto full = retrieve(mem, e_t, business);
    const bool retrieved = full.positives.size() == 1 && full.positives[0].id == id &&
                           full.positives[0].score.sim_sigma == 1.0;

    RetrievalConfig semantic_only;
    semantic_only.weights.beta = semantic_only.weights.gamma = 0.0;
    semantic_only.enable_structural = semantic_only.enable_graph = false;
    semantic_only.semantic_floor = 0.3;
    const bool semantic_misses = retrieve(mem, e_t, business, semantic_only).empty();

    const bool pass = sim_sigma == 1.0 && sports.signature.size() == 5 && structural_found && retrieved &&
                      sim_sem < 0.3 && semantic_misses;
    return {pass, "sim_sigma=" + fmt(sim_sigma) + " sim_sem=" + fmt(sim_sem) +
                      " structural_hit=" + (retrieved ? "yes" : "no") +
                      " semantic_only_empty=" + (semantic_misses ? "yes" : "no")};
}

// 3. 10k random quality triples, the gate boundary and oracle override
Verdict quality_gate() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t bad = 0;
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double c = u(rng), eta = u(rng), kappa = u(rng);
        const double q = compute_quality({c, eta, kappa, "", false});
        const double err = std::abs(q - (0.9 * c + 0.05 * eta + 0.05 * kappa));
        worst = std::max(worst, err);
        if (err > 1e-12) ++bad;
        if (gate(q, 0.3, true) != Status::Failed) ++bad;
        if (gate(q, 0.3, false) != (q >= 0.3 ? Status::Successful : Status::Failed)) ++bad;
        if (gate(q, q, false) != Status::Successful) ++bad;
    }
    if (gate(0.3, 0.3, false) != Status::Successful) ++bad;
    if (gate(1.0, 0.3, true) != Status::Failed) ++bad;
    return {bad == 0, "10000 triples, max |dq|=" + std::to_string(worst) + ", violations=" + std::to_string(bad)};
}

// 4. retrieve() against a full independent recomputation
Verdict retrieval_oracle() {
    static const std::vector<std::string> words{"goals", "season", "revenue", "player", "company", "fiscal",
                                                "totals", "league", "market", "quarter", "striker", "profit"};
    static const std::vector<std::string> ops{"op:entity_resolution", "op:temporal_filter", "op:aggregation",
                                              "op:comparison", "op:join", "op:sorting"};
    std::size_t queries = 0, mismatches = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        Memory mem;
        fx::random_memory(mem, 1000 + seed, 50);
        std::mt19937_64 rng(seed);
        for (int q = 0; q < 4; ++q) {
            std::string text;
            for (int k = 0; k < 3; ++k) text += (k ? " " : "") + words[rng() % words.size()];
            StructuralSignature sig;
            for (std::size_t k = 0, len = 2 + rng() % 4; k < len; ++k) sig.ops.push_back(ops[rng() % ops.size()]);
            RetrievalConfig cfg;
            if (q == 3) {
                cfg.semantic_k = 5;
                cfg.semantic_floor = 0.1;
            }
            const auto e_t = mem.embedder().embed(text);
            const auto got = retrieve(mem, e_t, sig, cfg);
            const auto want = fx::oracle_retrieve(mem, e_t, sig, cfg);
            auto differs = [](const std::vector<BundleEntry>& a, const std::vector<fx::OracleEntry>& b) {
                if (a.size() != b.size()) return true;
                for (std::size_t i = 0; i < a.size(); ++i) {
                    if (a[i].id != b[i].id || std::abs(a[i].score.total - b[i].total) > 1e-9) return true;
                }
                return false;
            };
            if (differs(got.positives, want.positives) || differs(got.negatives, want.negatives)) ++mismatches;
            if (got.positives.size() > 3 || got.negatives.size() > 2) ++mismatches;
            ++queries;
        }
    }
    return {mismatches == 0, "100 fixtures x 50 experiences, " + std::to_string(queries) + " queries, " +
                                 std::to_string(mismatches) + " mismatches"};
}

// 5. versioned entity reaches every referencing experience; procedures untouched
Verdict world_change() {
    Memory mem;
    EntityResolver res(mem);
    static const std::vector<std::vector<std::string>> sigs{
        {"op:entity_resolution", "op:temporal_filter", "op:aggregation"},
        {"op:entity_resolution", "op:comparison"},
        {"op:join", "op:aggregation", "op:sorting"}};
    std::vector<NodeId> referencing;
    for (int i = 0; i < 12; ++i) {
        std::vector<std::string> ents{i % 3 == 0 ? "other club" : "club captain"};
        auto id = commit(res, fx::record("task number " + std::to_string(i), "sports", sigs[i % 3], 1.0, 1.0, 1.0,
                                         &mem.embedder(), ents))
                      .id;
        if (i % 3 != 0) referencing.push_back(id);
    }
    auto& g = mem.graph();
    const NodeId old_ent = g.out_edges(referencing[0], EdgeKind::UsesEntity).at(0)->to;
    // settle template promotion first so only the world change differs afterwards
    compact(mem);
    std::map<NodeId, std::string> procedure_before;
    for (const auto& [id, e] : mem.experiences()) procedure_before[id] = to_json(e.record)["procedure"].dump();
    std::map<NodeId, std::string> ref_before;
    RetrievalConfig all;
    all.k_pos = all.k_neg = 100;
    auto collect_refs = [&](const RetrievalBundle& b) {
        std::map<NodeId, std::string> out;
        for (const auto& e : b.positives) out[e.id] = e.procedure_ref;
        return out;
    };
    for (const auto& s : sigs) {
        auto b = retrieve(mem, mem.embedder().embed("club"), StructuralSignature{s}, all);
        for (auto& [id, ref] : collect_refs(b)) ref_before[id] = ref;
    }

    auto repl = g.node(old_ent);
    repl.title = "club captain (new season)";
    const NodeId fresh = g.version_entity(old_ent, repl);
    const auto report = compact(mem);

    std::size_t checked = 0, bad = 0;
    std::set<NodeId> seen;
    for (const auto& s : sigs) {
        auto b = retrieve(mem, mem.embedder().embed("club"), StructuralSignature{s}, all);
        for (const auto& e : b.positives) {
            if (std::find(referencing.begin(), referencing.end(), e.id) == referencing.end()) continue;
            seen.insert(e.id);
            ++checked;
            const bool bound = e.entity_bindings.size() == 1 && e.entity_bindings[0].latest == fresh &&
                               e.entity_bindings[0].title == "club captain (new season)";
            const bool same_proc = to_json(*e.record)["procedure"].dump() == procedure_before.at(e.id) &&
                                   e.procedure_ref == ref_before.at(e.id);
            if (!bound || !same_proc || !e.stale) ++bad;
        }
    }
    for (const auto& [id, e] : mem.experiences()) {
        if (to_json(e.record)["procedure"].dump() != procedure_before.at(id)) ++bad;
    }
    const bool pass = bad == 0 && seen.size() == referencing.size() && report.stale.size() == referencing.size();
    return {pass, std::to_string(seen.size()) + "/" + std::to_string(referencing.size()) +
                      " referencing experiences rebound, " + std::to_string(bad) + " violations"};
}

// 6. compaction idempotence and dominance safety
Verdict compaction() {
    std::size_t bad = 0, archived = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        Memory mem;
        fx::random_memory(mem, 5000 + seed, 30);
        {
            EntityResolver res(mem);
            std::mt19937_64 rng(seed);
            std::vector<NodeId> ids;
            for (const auto& [id, _] : mem.experiences()) ids.push_back(id);
            for (int k = 0; k < 15; ++k) {
                const auto& src = mem.experience(ids[rng() % ids.size()])->record;
                const double c = double(rng() % 5) / 4.0;
                commit(res, fx::record("duplicate " + std::to_string(k), src.goal.domain, src.signature.ops, c,
                                       double(rng() % 3) / 2.0, 1.0, &mem.embedder()));
            }
        }
        std::map<std::pair<std::string, std::string>, double> best;
        std::map<NodeId, std::string> content;
        for (const auto& [id, e] : mem.experiences()) {
            auto key = std::make_pair(e.record.goal.domain, e.record.goal.goal_signature);
            best[key] = std::max(best[key], e.record.evaluation.overall);
            content[id] = serialize_experience(e.record);
        }
        const auto first = compact(mem);
        archived += first.archived.size();
        if (!compact(mem).empty()) ++bad;
        for (const auto& [id, e] : mem.experiences()) {
            auto key = std::make_pair(e.record.goal.domain, e.record.goal.goal_signature);
            if (e.record.evaluation.overall == best[key] && mem.is_archived(id)) ++bad;
            if (serialize_experience(e.record) != content[id]) ++bad;
        }
        const auto b = retrieve(mem, mem.embedder().embed("goals revenue"),
                                StructuralSignature{{"op:aggregation", "op:comparison"}});
        for (const auto* list : {&b.positives, &b.negatives}) {
            for (const auto& e : *list) {
                if (mem.is_archived(e.id)) ++bad;
            }
        }
    }
    return {bad == 0, "100 fixtures, " + std::to_string(archived) + " archived, " + std::to_string(bad) + " violations"};
}

// 7. epoch-boundary commits: p=1 and p=4 agree bit for bit
Verdict determinism() {
    auto world = sim::World::generate(77);
    auto tasks = world.generate_tasks(200, 77);
    sim::SimHooks hooks(tasks, 77);
    std::vector<std::string> ledgers, logs;
    for (int p : {1, 4}) {
        Memory mem;
        auto cfg = preset("A2");
        cfg.parallelism = p;
        cfg.commit_mode = CommitMode::EpochBoundary;
        Orchestrator o(mem, cfg, hooks.hooks(), world.canon());
        ledgers.push_back(ledger_to_json(o.run_epochs(sim::specs(tasks), 3)).dump());
        logs.push_back(mem.export_text());
    }
    const bool pass = ledgers[0] == ledgers[1] && logs[0] == logs[1];
    return {pass, "200 tasks x 3 epochs, ledgers " + std::string(ledgers[0] == ledgers[1] ? "equal" : "differ") +
                      ", logs " + (logs[0] == logs[1] ? "equal" : "differ") + " (" +
                      std::to_string(logs[0].size()) + " bytes)"};
}

MetricsLedger sim_run(const std::string& name, int J, std::uint64_t seed) {
    auto world = sim::World::generate(seed);
    auto tasks = world.generate_tasks(200, seed);
    sim::SimHooks hooks(tasks, seed);
    Memory mem;
    auto cfg = preset(name);
    cfg.max_iterations = J;
    Orchestrator o(mem, cfg, hooks.hooks(), world.canon());
    return o.run_epochs(sim::specs(tasks), 10);
}

bool csr_sound(const MetricsLedger& l) {
    for (std::size_t e = 0; e < l.epochs.size(); ++e) {
        if (l.epochs[e].csr < l.epochs[e].sr) return false;
        if (e && l.epochs[e].csr < l.epochs[e - 1].csr) return false;
    }
    return true;
}

// 8. learning dynamics over 5 seeds
Verdict learning_dynamics() {
    std::ostringstream detail;
    bool pass = true;
    double min_gain = 1.0, max_a0_drift = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        for (const char* name : {"A1", "A2", "A5", "R1", "EG1"}) {
            const auto l = sim_run(name, 3, seed);
            const auto& first = l.epochs.front();
            const auto& last = l.epochs.back();
            min_gain = std::min(min_gain, last.sr - first.sr);
            pass = pass && last.sr >= first.sr + 0.15 && last.first_attempt_rate > first.first_attempt_rate &&
                   last.mean_iterations < first.mean_iterations && csr_sound(l);
        }
        const auto a0 = sim_run("A0", 3, seed);
        for (const auto& e : a0.epochs) max_a0_drift = std::max(max_a0_drift, std::abs(e.sr - a0.epochs.front().sr));
        pass = pass && max_a0_drift <= 0.05 && csr_sound(a0);

        const auto j10 = sim_run("A2", 10, seed);
        pass = pass && j10.epochs.back().mean_iterations < j10.epochs.front().mean_iterations && csr_sound(j10) &&
               j10.epochs.back().first_attempt_rate > j10.epochs.front().first_attempt_rate;
        if (seed == 1) {
            detail << "J=10 mean_iter " << fmt(j10.epochs.front().mean_iterations) << "->"
                   << fmt(j10.epochs.back().mean_iterations) << "; ";
        }
    }
    detail << "min memory-preset SR gain " << fmt(min_gain) << " (A1 A2 A5 R1 EG1 x 5 seeds), A0 max drift "
           << fmt(max_a0_drift);
    return {pass, detail.str()};
}

// 9. frozen memory from one domain, evaluated on another
Verdict cross_domain_transfer() {
    std::ostringstream detail;
    bool pass = true;
    double min_margin = 1.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto world = sim::World::generate(seed);
        auto train = world.generate_tasks(200, seed, {"sports"});
        auto test = world.generate_tasks(200, seed + 100, {"business"});
        auto all = train;
        all.insert(all.end(), test.begin(), test.end());
        sim::SimHooks hooks(all, seed);
        Memory mem;
        {
            Orchestrator o(mem, preset("A2"), hooks.hooks(), world.canon());
            o.run_epochs(sim::specs(train), 3);
        }
        const auto frozen = mem.commits_total();
        std::map<std::string, double> sr;
        for (const char* name : {"EG1", "EG2", "R1"}) {
            auto cfg = preset(name);
            cfg.enable_ingest = false;
            Orchestrator o(mem, cfg, hooks.hooks(), world.canon());
            sr[name] = o.run_epochs(sim::specs(test), 1).epochs[0].sr;
        }
        if (mem.commits_total() != frozen) pass = false;
        const double margin = std::min(sr["EG1"], sr["EG2"]) - sr["R1"];
        min_margin = std::min(min_margin, margin);
        pass = pass && margin >= 0.10;
        if (seed == 1) {
            detail << "seed 1 SR EG1=" << fmt(sr["EG1"]) << " EG2=" << fmt(sr["EG2"]) << " R1=" << fmt(sr["R1"])
                   << "; ";
        }
    }
    detail << "min structural-over-semantic margin " << fmt(min_margin) << " over 5 seeds";
    return {pass, detail.str()};
}

// 10. export -> import -> retrieve is byte-identical
Verdict persistence() {
    std::size_t bad = 0;
    fx::TempDir dir("accept-persist");
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto ns = dir.path / ("ns" + std::to_string(seed));
        std::string exported;
        std::vector<std::string> answers;
        const StructuralSignature sigs[] = {{{"op:entity_resolution", "op:aggregation"}},
                                            {{"op:join", "op:sorting", "op:comparison"}}};
        {
            auto mem = Memory::open(ns);
            fx::random_memory(*mem, 9000 + seed, 40);
            if (seed % 2 == 0) compact(*mem);
            exported = mem->export_text();
            for (const auto& s : sigs) {
                answers.push_back(bundle_to_json(retrieve(*mem, mem->embedder().embed("striker profit"), s)).dump());
            }
        }
        auto imported = Memory::import_text(exported);
        auto reopened = Memory::open(ns);
        if (imported->export_text() != exported || reopened->export_text() != exported) ++bad;
        for (std::size_t i = 0; i < std::size(sigs); ++i) {
            const auto a = bundle_to_json(retrieve(*imported, imported->embedder().embed("striker profit"), sigs[i])).dump();
            const auto b = bundle_to_json(retrieve(*reopened, reopened->embedder().embed("striker profit"), sigs[i])).dump();
            if (a != answers[i] || b != answers[i]) ++bad;
        }
    }
    return {bad == 0, "20 namespaces, " + std::to_string(bad) + " differences"};
}

// 11. scan every agent context of full simulated runs for the answer token
Verdict leakage() {
    std::size_t contexts = 0, hits = 0;
    for (const char* name : {"A2", "A5"}) {
        auto world = sim::World::generate(31);
        auto tasks = world.generate_tasks(200, 31);
        sim::SimHooks sim_hooks(tasks, 31);
        auto hooks = sim_hooks.hooks();
        std::map<std::string, std::string> answers;
        for (const auto& t : tasks) answers[t.id] = t.hidden_oracle;
        std::mutex mu;
        auto inner = hooks.agent;
        hooks.agent = [&, inner](const AgentContext& ctx) {
            const auto text = render_context(ctx);
            {
                std::lock_guard lock(mu);
                ++contexts;
                if (text.find(answers.at(ctx.task.id)) != std::string::npos) ++hits;
            }
            return inner(ctx);
        };
        Memory mem;
        Orchestrator o(mem, preset(name), hooks, world.canon());
        o.run_epochs(sim::specs(tasks), 3);
    }
    return {hits == 0 && contexts > 0, std::to_string(contexts) + " agent contexts scanned, " +
                                           std::to_string(hits) + " containing the answer"};
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::err);
    const std::vector<Criterion> criteria{
        {1, "LCS exhaustive oracle equivalence", 10, lcs_exhaustive},
        {2, "cross-domain pair structural match", 1, cross_domain_pair},
        {3, "quality score and gate", 1, quality_gate},
        {4, "retrieval recomputation", 30, retrieval_oracle},
        {5, "world-change propagation", 1, world_change},
        {6, "compaction idempotence and dominance safety", 30, compaction},
        {7, "determinism under parallelism", 120, determinism},
        {8, "learning dynamics", 600, learning_dynamics},
        {9, "cross-domain transfer", 300, cross_domain_transfer},
        {10, "persistence round trip", 60, persistence},
        {11, "answer-leakage guard", 120, leakage},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = v.pass && in_time;
        if (!pass) ++failed;
        std::printf("[%s] criterion %2d: %s (%.2fs, budget %.0fs%s) %s\n", pass ? "PASS" : "FAIL", c.number,
                    c.name.c_str(), secs, c.budget_s, in_time ? "" : ", over budget", v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
