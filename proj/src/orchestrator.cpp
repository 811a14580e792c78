#include "apex/orchestrator.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <thread>

#include <spdlog/spdlog.h>

#include "apex/extraction.hpp"

namespace apex {

std::string_view to_string(CommitMode m) {
    return m == CommitMode::Immediate ? "immediate" : "epoch_boundary";
}

CommitMode commit_mode_from_string(std::string_view text) {
    if (text == "immediate") return CommitMode::Immediate;
    if (text == "epoch_boundary") return CommitMode::EpochBoundary;
    throw Error(ErrorCode::InvalidArgument, "unknown commit mode '" + std::string(text) + "'");
}

std::vector<std::string> preset_names() {
    return {"A0", "A1", "A2", "A3", "R1", "EG1", "EG2", "A5"};
}

PrgiiConfig preset(std::string_view name) {
    PrgiiConfig cfg;
    cfg.name = std::string(name);
    if (name == "A0") {
        cfg.enable_planning = cfg.enable_retrieval = cfg.enable_iteration = false;
        cfg.enable_ingest = cfg.enable_judge = false;
    } else if (name == "A1") {
        cfg.enable_judge = false;
    } else if (name == "A2" || name == "A3" || name == "EG2") {
    } else if (name == "R1") {
        cfg.retrieval.enable_structural = cfg.retrieval.enable_graph = false;
    } else if (name == "EG1") {
        cfg.retrieval.enable_semantic = false;
    } else if (name == "A5") {
        cfg.judge_model = "strong";
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown preset '" + std::string(name) + "'");
    }
    return cfg;
}

Json config_to_json(const PrgiiConfig& cfg) {
    return {{"name", cfg.name},
            {"enable_planning", cfg.enable_planning},
            {"enable_retrieval", cfg.enable_retrieval},
            {"enable_iteration", cfg.enable_iteration},
            {"enable_ingest", cfg.enable_ingest},
            {"enable_judge", cfg.enable_judge},
            {"generate_tests", cfg.generate_tests},
            {"judge_model", cfg.judge_model},
            {"max_iterations", cfg.max_iterations},
            {"quality_threshold", cfg.quality_threshold},
            {"quality_weights",
             {{"correctness", cfg.quality_weights.correctness},
              {"efficiency", cfg.quality_weights.efficiency},
              {"completeness", cfg.quality_weights.completeness}}},
            {"retrieval", retrieval_config_to_json(cfg.retrieval)},
            {"parallelism", cfg.parallelism},
            {"commit_mode", to_string(cfg.commit_mode)},
            {"prompt_budget", cfg.prompt_budget}};
}

PrgiiConfig config_from_json(const Json& j) {
    PrgiiConfig cfg = j.contains("preset") ? preset(j["preset"].get<std::string>()) : PrgiiConfig{};
    try {
        cfg.name = j.value("name", cfg.name);
        cfg.enable_planning = j.value("enable_planning", cfg.enable_planning);
        cfg.enable_retrieval = j.value("enable_retrieval", cfg.enable_retrieval);
        cfg.enable_iteration = j.value("enable_iteration", cfg.enable_iteration);
        cfg.enable_ingest = j.value("enable_ingest", cfg.enable_ingest);
        cfg.enable_judge = j.value("enable_judge", cfg.enable_judge);
        cfg.generate_tests = j.value("generate_tests", cfg.generate_tests);
        cfg.judge_model = j.value("judge_model", cfg.judge_model);
        cfg.max_iterations = j.value("max_iterations", cfg.max_iterations);
        cfg.quality_threshold = j.value("quality_threshold", cfg.quality_threshold);
        if (j.contains("quality_weights")) {
            const auto& w = j["quality_weights"];
            cfg.quality_weights = {w.at("correctness").get<double>(), w.at("efficiency").get<double>(),
                                   w.at("completeness").get<double>()};
        }
        if (j.contains("retrieval")) cfg.retrieval = retrieval_config_from_json(j["retrieval"]);
        cfg.parallelism = j.value("parallelism", cfg.parallelism);
        if (j.contains("commit_mode")) {
            cfg.commit_mode = commit_mode_from_string(j["commit_mode"].get<std::string>());
        }
        cfg.prompt_budget = j.value("prompt_budget", cfg.prompt_budget);
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
    }
    if (cfg.max_iterations < 1 || cfg.parallelism < 1) {
        throw Error(ErrorCode::InvalidArgument, "max_iterations and parallelism must be >= 1");
    }
    check_weights(cfg.quality_weights);
    return cfg;
}

std::string render_context(const AgentContext& ctx) {
    std::string out = "TASK " + ctx.task.id + " [" + ctx.task.domain + "]: " + ctx.task.description + "\n";
    const auto& p = ctx.plan;
    if (!p.understanding.intent.empty()) out += "INTENT: " + p.understanding.intent + "\n";
    for (const auto& c : p.understanding.constraints) out += "CONSTRAINT: " + c + "\n";
    if (!p.understanding.output_format.empty()) out += "FORMAT: " + p.understanding.output_format + "\n";
    for (const auto& e : p.entities) out += "ENTITY: " + e + "\n";
    for (const auto& s : p.schema) out += "SCHEMA: " + s + "\n";
    for (const auto& s : p.steps) out += "STEP: " + s.text + "\n";
    if (!p.signature.empty()) {
        out += "SIGNATURE:";
        for (const auto& op : p.signature.ops) out += " " + op;
        out += "\n";
    }
    auto examples = [&](const char* label, const std::vector<ExampleView>& list) {
        for (const auto& ex : list) {
            out += std::string(label) + " " + ex.id + " (" + ex.procedure_ref + ")\n" + ex.rendering;
            for (const auto& b : ex.entity_bindings) out += "  binding: " + b + "\n";
        }
    };
    examples("POSITIVE", ctx.positives);
    examples("NEGATIVE", ctx.negatives);
    for (const auto& h : ctx.history) {
        out += "ITERATION " + std::to_string(h.iteration) + " " + std::string(to_string(h.intent)) +
               (h.valid ? " valid" : " invalid") + ": " + h.feedback + "\n";
    }
    out += "NOW: iteration " + std::to_string(ctx.iteration) + " " +
           std::string(to_string(ctx.intent)) + "\n";
    if (ctx.divergence) out += ctx.divergence_note + "\n";
    return out;
}

Orchestrator::Orchestrator(Memory& memory, PrgiiConfig cfg, Hooks hooks, const OperationCanon& canon)
    : memory_(memory), cfg_(std::move(cfg)), hooks_(std::move(hooks)), canon_(canon),
      resolver_(memory) {
    if (cfg_.max_iterations < 1 || cfg_.parallelism < 1) {
        throw Error(ErrorCode::InvalidArgument, "max_iterations and parallelism must be >= 1");
    }
    check_weights(cfg_.quality_weights);
}

PlanDecomposition Orchestrator::do_plan(const TaskView& view) {
    if (!hooks_.adapter) throw Error(ErrorCode::AdapterFailure, "no domain adapter installed");
    PlanDecomposition plan;
    try {
        plan = hooks_.adapter(view);
    } catch (const std::exception& e) {
        throw Error(ErrorCode::AdapterFailure, e.what());
    }
    plan.task_id = view.id;
    plan.task_description = view.description;
    if (plan.domain.empty()) plan.domain = view.domain;
    if (plan.steps.empty()) return plan;
    if (cfg_.commit_mode == CommitMode::Immediate) {
        plan.signature = memory_.write([&](Memory&) {
            return extract_signature(plan.steps, resolver_, plan.domain, canon_).signature;
        });
    } else {
        plan.signature = memory_.read(
            [&](const Memory&) { return hypothesize_signature(plan.steps, resolver_, canon_); });
    }
    return plan;
}

void Orchestrator::do_retrieve(const TaskSpec& task, const PlanDecomposition& plan,
                               AgentContext& ctx, std::vector<NodeId>& used) {
    const auto e_t = memory_.embedder().embed(task.description);
    memory_.read([&](const Memory& mem) {
        const auto bundle = retrieve(mem, e_t, plan.signature, cfg_.retrieval);
        auto view = [&](const BundleEntry& b) {
            ExampleView v;
            v.id = render_id(NodeKind::Experience, b.id);
            v.status = b.record->status;
            v.quality = b.record->evaluation.overall;
            v.signature = b.record->signature.ops;
            v.error_classes = b.record->retrieval_keys.failure_modes;
            v.procedure_ref = b.procedure_ref;
            for (const auto& eb : b.entity_bindings) {
                v.entity_bindings.push_back(mem.graph().node(eb.original).title + " -> " + eb.title);
            }
            v.rendering = compress_for_prompt(*b.record, std::max(cfg_.prompt_budget, kMinPromptBudget));
            return v;
        };
        for (const auto& b : bundle.positives) {
            ctx.positives.push_back(view(b));
            used.push_back(b.id);
        }
        for (const auto& b : bundle.negatives) ctx.negatives.push_back(view(b));
    });
}

ExecutionOutcome Orchestrator::run_task(const TaskSpec& task) {
    using clock = std::chrono::steady_clock;
    auto ms_since = [](clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    };
    ExecutionOutcome out;
    out.task_id = task.id;
    const TaskView view = task.view();

    PlanDecomposition plan;
    plan.task_id = task.id;
    plan.task_description = task.description;
    plan.domain = task.domain;
    auto t0 = clock::now();
    if (cfg_.enable_planning) {
        try {
            plan = do_plan(view);
        } catch (const Error& e) {
            spdlog::warn("task {}: planning failed: {}", task.id, e.what());
            out.hook_failure = true;
        }
    }
    out.phase_timings["plan"] = ms_since(t0);

    AgentContext ctx;
    ctx.task = view;
    ctx.plan = plan;
    std::vector<NodeId> used;
    t0 = clock::now();
    if (cfg_.enable_retrieval) do_retrieve(task, plan, ctx, used);
    out.positives = ctx.positives.size();
    out.negatives = ctx.negatives.size();
    out.phase_timings["retrieve"] = ms_since(t0);

    t0 = clock::now();
    std::vector<IterationStep> trace;
    const int budget = cfg_.enable_iteration ? cfg_.max_iterations : 1;
    bool had_failure_feedback = false;
    for (int j = 1; j <= budget; ++j) {
        ctx.iteration = j;
        ctx.intent = j == 1 ? Intent::Exploration
                            : (had_failure_feedback ? Intent::ErrorCorrection : Intent::Refinement);
        const std::size_t h = ctx.history.size();
        ctx.divergence = h >= 2 && !ctx.history[h - 1].feedback.empty() &&
                         ctx.history[h - 1].feedback == ctx.history[h - 2].feedback;
        ctx.divergence_note = ctx.divergence ? std::string(kDivergenceNote) : "";
        if (!task.hidden_oracle.empty() &&
            render_context(ctx).find(task.hidden_oracle) != std::string::npos) {
            throw Error(ErrorCode::InvariantViolation, "agent context would reveal the answer");
        }

        IterationStep step;
        step.intent = ctx.intent;
        bool generated = true;
        try {
            if (!hooks_.agent) throw Error(ErrorCode::HookFailure, "no agent installed");
            step.artifact = hooks_.agent(ctx);
        } catch (const std::exception& e) {
            generated = false;
            out.hook_failure = true;
            step.artifact = "<no artifact: generation failed>";
            step.result = "generation failed";
            step.valid = false;
            step.feedback = std::string("generation failed: ") + e.what();
            spdlog::warn("task {} iteration {}: {}", task.id, j, step.feedback);
        }
        if (generated) {
            try {
                if (!hooks_.validator) throw Error(ErrorCode::HookFailure, "no validator installed");
                auto v = hooks_.validator(task, step.artifact);
                step.result = std::move(v.result);
                step.valid = v.valid;
                step.feedback = std::move(v.feedback);
            } catch (const std::exception& e) {
                out.hook_failure = true;
                step.valid = false;
                step.result = "validation failed";
                step.feedback = std::string("validation failed: ") + e.what();
            }
        }
        if (!step.valid && !step.feedback.empty()) had_failure_feedback = true;
        ctx.history.push_back({j, step.intent, step.valid, step.feedback});
        trace.push_back(std::move(step));
        if (trace.back().valid) break;
    }
    out.iterations_used = static_cast<int>(trace.size());
    out.solved = trace.back().valid;
    out.phase_timings["generate_iterate"] = ms_since(t0);

    if (!cfg_.enable_ingest) return out;
    t0 = clock::now();
    if (plan.signature.empty()) {
        spdlog::warn("task {}: no structural signature; experience not ingested", task.id);
        return out;
    }
    const std::string& final_artifact = trace.back().artifact;
    double c = out.solved ? 1.0 : 0.0;
    if (hooks_.oracle) {
        try {
            c = std::clamp(hooks_.oracle(task, final_artifact), 0.0, 1.0);
        } catch (const std::exception& e) {
            out.hook_failure = true;
            c = 0.0;
            spdlog::warn("task {}: oracle failed: {}", task.id, e.what());
        }
    }
    Evaluation ev;
    ev.correctness = c;
    ev.efficiency = c;
    ev.completeness = c;
    ev.weights = cfg_.quality_weights;
    ev.threshold = cfg_.quality_threshold;
    if (cfg_.enable_judge && hooks_.teacher) {
        try {
            auto report = hooks_.teacher(TeacherInput{task, plan, trace, c, budget, cfg_.judge_model});
            ev.efficiency = std::clamp(report.efficiency, 0.0, 1.0);
            ev.completeness = std::clamp(report.completeness, 0.0, 1.0);
            ev.teacher_feedback = std::move(report.feedback);
        } catch (const std::exception& e) {
            out.hook_failure = true;
            spdlog::warn("task {}: teacher failed: {}", task.id, e.what());
        }
    }
    ev.overall = compute_quality({ev.correctness, ev.efficiency, ev.completeness,
                                  ev.teacher_feedback, false},
                                 ev.weights);

    std::string error_source = ev.teacher_feedback;
    if (error_source.empty()) {
        for (auto it = trace.rbegin(); it != trace.rend(); ++it) {
            if (!it->valid && !it->feedback.empty()) {
                error_source = it->feedback;
                break;
            }
        }
    }
    auto extracted = decompose_feedback(error_source, hooks_.extractor);
    for (auto& e : extracted.errors) {
        if (e.iteration == 0) e.iteration = out.iterations_used;
        if (out.solved) e.recovery_outcome = RecoveryOutcome::Recovered;
    }

    AssemblyExtras extras;
    extras.task_embedding = memory_.embedder().embed(task.description);
    extras.oracle_reject = c < 0.5;
    extras.errors = std::move(extracted.errors);
    extras.patches = std::move(extracted.patches);
    extras.max_iterations = budget;
    extras.ground_truth = task.hidden_oracle;
    try {
        out.experience = assemble_experience(plan, trace, ev, plan.signature, extras);
    } catch (const Error& e) {
        if (std::string_view(e.what()).find("answer-leakage") == std::string_view::npos) throw;
        spdlog::warn("task {}: teacher feedback dropped: {}", task.id, e.what());
        ev.teacher_feedback.clear();
        out.experience = assemble_experience(plan, trace, ev, plan.signature, extras);
    }

    CommitOptions opts;
    opts.derived_from = used;
    if (plan.steps.size() == plan.signature.size()) opts.steps = plan.steps;
    out.pending = PendingCommit{*out.experience, std::move(opts)};
    if (cfg_.commit_mode == CommitMode::Immediate) commit_pending(out);
    out.phase_timings["ingest"] = ms_since(t0);
    return out;
}

std::optional<NodeId> Orchestrator::commit_pending(ExecutionOutcome& outcome) {
    if (!outcome.pending) return std::nullopt;
    auto pending = std::move(*outcome.pending);
    outcome.pending.reset();
    try {
        auto result = memory_.write([&](Memory&) {
            return commit(resolver_, std::move(pending.record), pending.options);
        });
        outcome.committed = result.id;
        if (outcome.experience) outcome.experience->id = result.id;
        return result.id;
    } catch (const Error& e) {
        spdlog::warn("task {}: commit rejected: {}", outcome.task_id, e.what());
        return std::nullopt;
    }
}

Orchestrator::EpochResult Orchestrator::run_epoch(const std::vector<TaskSpec>& tasks) {
    EpochResult result;
    result.outcomes.resize(tasks.size());
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(cfg_.parallelism), std::max<std::size_t>(1, tasks.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) result.outcomes[i] = run_task(tasks[i]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
                        result.outcomes[i] = run_task(tasks[i]);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                    next.store(tasks.size());
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }
    if (cfg_.commit_mode == CommitMode::EpochBoundary) {
        for (auto& o : result.outcomes) commit_pending(o);
    }
    return result;
}

MetricsLedger Orchestrator::run_epochs(const std::vector<TaskSpec>& tasks, int epochs,
                                       std::vector<EpochResult>* details) {
    if (epochs < 1) throw Error(ErrorCode::InvalidArgument, "epochs must be >= 1");
    std::vector<std::string> ids;
    for (const auto& t : tasks) ids.push_back(t.id);
    std::vector<std::vector<TaskEpochOutcome>> matrix;
    for (int e = 0; e < epochs; ++e) {
        auto result = run_epoch(tasks);
        std::vector<TaskEpochOutcome> row;
        for (const auto& o : result.outcomes) row.push_back({o.solved, o.iterations_used});
        matrix.push_back(std::move(row));
        spdlog::debug("{} epoch {} done", cfg_.name, e + 1);
        if (details) details->push_back(std::move(result));
    }
    return compute_metrics(ids, matrix);
}

}  // namespace apex
