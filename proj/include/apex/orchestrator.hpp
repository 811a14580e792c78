#pragma once
// Plan -> Retrieve -> Generate -> Iterate -> Ingest over pluggable hooks.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "apex/ingest.hpp"
#include "apex/metrics.hpp"
#include "apex/plan.hpp"
#include "apex/resolver.hpp"
#include "apex/retrieval.hpp"

namespace apex {

enum class CommitMode { Immediate, EpochBoundary };
std::string_view to_string(CommitMode m);
CommitMode commit_mode_from_string(std::string_view text);

struct PrgiiConfig {
    std::string name = "custom";
    bool enable_planning = true;
    bool enable_retrieval = true;
    bool enable_iteration = true;
    bool enable_ingest = true;
    bool enable_judge = true;
    bool generate_tests = false;
    std::string judge_model = "standard";
    int max_iterations = 3;  // J
    double quality_threshold = kDefaultQualityThreshold;
    QualityWeights quality_weights;
    RetrievalConfig retrieval;
    int parallelism = 1;
    CommitMode commit_mode = CommitMode::EpochBoundary;
    std::size_t prompt_budget = 1200;  // characters per rendered example
};

// Named ablation presets: A0 A1 A2 A3 R1 EG1 EG2 A5.
PrgiiConfig preset(std::string_view name);
std::vector<std::string> preset_names();
Json config_to_json(const PrgiiConfig& cfg);
PrgiiConfig config_from_json(const Json& j);

struct TaskView {
    std::string id;
    std::string description;
    std::string domain;
};

struct TaskSpec {
    std::string id;
    std::string description;
    std::string domain;
    std::string hidden_oracle;  // validator / oracle / teacher only

    TaskView view() const { return {id, description, domain}; }
};

// Agent-visible rendering of one retrieved experience.
struct ExampleView {
    std::string id;
    Status status = Status::Failed;
    double quality = 0.0;
    std::vector<std::string> signature;
    std::vector<std::string> error_classes;
    std::vector<std::string> entity_bindings;  // "original -> latest title"
    std::string procedure_ref;
    std::string rendering;  // compressed summary
};

struct IterationFeedback {
    int iteration = 0;
    Intent intent = Intent::Exploration;
    bool valid = false;
    std::string feedback;
};

struct AgentContext {
    TaskView task;
    PlanDecomposition plan;  // TU, E, S, sigma-hat
    std::vector<ExampleView> positives;
    std::vector<ExampleView> negatives;
    std::vector<IterationFeedback> history;
    int iteration = 1;
    Intent intent = Intent::Exploration;
    bool divergence = false;
    std::string divergence_note;
};

// Flat text of everything the agent sees; used for leakage scanning.
std::string render_context(const AgentContext& ctx);

inline constexpr std::string_view kDivergenceNote =
    "DIVERGE: the last two attempts failed identically; change the approach.";

struct ValidationResult {
    std::string result;
    bool valid = false;
    std::string feedback;
};

struct TeacherInput {
    const TaskSpec& task;
    const PlanDecomposition& plan;
    const std::vector<IterationStep>& trace;
    double correctness = 0.0;
    int max_iterations = 1;
    std::string judge_model;
};

struct TeacherReport {
    double efficiency = 0.0;
    double completeness = 0.0;
    std::string feedback;
};

struct Hooks {
    std::function<PlanDecomposition(const TaskView&)> adapter;
    std::function<std::string(const AgentContext&)> agent;
    std::function<ValidationResult(const TaskSpec&, const std::string& artifact)> validator;
    std::function<double(const TaskSpec&, const std::string& artifact)> oracle;
    std::function<TeacherReport(const TeacherInput&)> teacher;
    FeedbackExtractor extractor = stub_feedback_extractor;
};

struct PendingCommit {
    ExperienceRecord record;
    CommitOptions options;
};

struct ExecutionOutcome {
    std::string task_id;
    std::optional<ExperienceRecord> experience;  // absent when nothing could be assembled
    int iterations_used = 0;
    bool solved = false;
    bool hook_failure = false;
    std::optional<NodeId> committed;
    std::optional<PendingCommit> pending;  // epoch-boundary mode
    std::size_t positives = 0;
    std::size_t negatives = 0;
    std::map<std::string, double> phase_timings;  // milliseconds
};

class Orchestrator {
public:
    Orchestrator(Memory& memory, PrgiiConfig cfg, Hooks hooks,
                 const OperationCanon& canon = OperationCanon::defaults());

    // Safe to call from several threads at once.
    ExecutionOutcome run_task(const TaskSpec& task);
    // Commits one deferred outcome (takes the write lock).
    std::optional<NodeId> commit_pending(ExecutionOutcome& outcome);

    struct EpochResult {
        std::vector<ExecutionOutcome> outcomes;  // task order
    };
    EpochResult run_epoch(const std::vector<TaskSpec>& tasks);
    MetricsLedger run_epochs(const std::vector<TaskSpec>& tasks, int epochs,
                             std::vector<EpochResult>* details = nullptr);

    const PrgiiConfig& config() const { return cfg_; }
    EntityResolver& resolver() { return resolver_; }

private:
    PlanDecomposition do_plan(const TaskView& view);
    void do_retrieve(const TaskSpec& task, const PlanDecomposition& plan, AgentContext& ctx,
                     std::vector<NodeId>& used);

    Memory& memory_;
    PrgiiConfig cfg_;
    Hooks hooks_;
    const OperationCanon& canon_;
    EntityResolver resolver_;
};

}  // namespace apex
