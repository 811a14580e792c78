#pragma once
// Synthetic task universe and scripted hooks (adapter, pseudo-agent,
// validator, oracle, teacher) that make the learning loop observable
// without a language model.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "apex/experience.hpp"
#include "apex/orchestrator.hpp"

namespace apex::sim {

struct SimParams {
    double boost_pos = 0.2;
    double boost_neg = 0.1;
    double boost_iter = 0.15;
    int pos_cap = 2;
    int neg_cap = 1;
    double tau_sigma = 0.6;
    double difficulty_min = 0.7;
    double difficulty_max = 1.0;
    // Fraction of templates without a planted failure mode.
    double clean_template_rate = 0.25;
};

struct Template {
    std::string id;  // "T07"
    StructuralSignature signature;
    std::optional<ErrorClass> failure_mode;
    int failure_step = 1;  // 1-based step the planted failure points at
};

struct DomainVocab {
    std::string name;
    std::vector<std::string> syllables;
    std::map<std::string, std::string> verbs;  // op id -> verb
};

struct SyntheticTask {
    std::string id;
    std::string template_id;
    std::string domain;
    double difficulty = 0.0;
    std::optional<ErrorClass> failure_mode;
    int failure_step = 1;
    StructuralSignature signature;
    std::vector<std::string> entities;  // one per step
    std::string description;            // "<verb> <entity>; <verb> <entity>; ..."
    std::string hidden_oracle;

    TaskSpec spec() const { return {id, description, domain, hidden_oracle}; }
};

// Deterministic from the seed: templates are pairwise structurally
// dissimilar (sim < 0.6) and domains use disjoint syllable alphabets, so
// cross-domain tasks share signatures but no tokens.
class World {
public:
    static World generate(std::uint64_t seed, std::size_t templates = 20,
                          std::vector<std::string> domains = {"sports", "business", "medicine"});

    std::uint64_t seed() const noexcept { return seed_; }
    const std::vector<Template>& templates() const noexcept { return templates_; }
    const std::vector<DomainVocab>& domains() const noexcept { return domains_; }
    const Template& template_by_id(const std::string& id) const;
    const DomainVocab& domain(const std::string& name) const;
    // Default canon plus every domain verb.
    const OperationCanon& canon() const noexcept { return *canon_; }

    // Entities and answer derive from (world seed, task id).
    SyntheticTask make_task(const std::string& id, const std::string& template_id,
                            const std::string& domain, double difficulty,
                            std::optional<ErrorClass> failure_mode) const;
    std::vector<SyntheticTask> generate_tasks(std::size_t n, std::uint64_t seed,
                                              const std::vector<std::string>& domains = {},
                                              const SimParams& params = {}) const;

private:
    std::uint64_t seed_ = 0;
    std::vector<Template> templates_;
    std::vector<DomainVocab> domains_;
    std::shared_ptr<OperationCanon> canon_;
};

// Task file: one task per line, `id,template,domain,difficulty,failure_mode|none`.
// Blank lines and '#' comments are skipped.
std::string tasks_to_text(const std::vector<SyntheticTask>& tasks);
std::vector<SyntheticTask> tasks_from_text(const World& world, std::string_view text);
std::vector<SyntheticTask> load_tasks(const World& world, const std::filesystem::path& file);
std::vector<TaskSpec> specs(const std::vector<SyntheticTask>& tasks);

// Splits "<verb> <entity>; ..." clauses into raw steps.
PlanDecomposition synthetic_adapter(const TaskView& view);

// Closed-form success probability of one pseudo-agent attempt.
double success_probability(const SyntheticTask& task, const AgentContext& ctx,
                           const SimParams& params = {});
// Uniform draw in [0,1) keyed by (seed, task id, iteration) only.
double attempt_draw(std::uint64_t seed, const std::string& task_id, int iteration);

struct ParsedArtifact {
    std::string answer;
    std::optional<ErrorClass> error_class;
    int step = 0;
};
std::optional<ParsedArtifact> parse_artifact(std::string_view artifact);

class SimHooks {
public:
    SimHooks(std::vector<SyntheticTask> tasks, std::uint64_t seed, SimParams params = {});

    // Every hook shares this object's task table; it must outlive the hooks.
    Hooks hooks();

    std::string agent(const AgentContext& ctx) const;
    ValidationResult validate(const TaskSpec& task, const std::string& artifact) const;
    double oracle(const TaskSpec& task, const std::string& artifact) const;
    TeacherReport teach(const TeacherInput& in) const;

    const SyntheticTask& task(const std::string& id) const;
    const SimParams& params() const noexcept { return params_; }

private:
    std::map<std::string, SyntheticTask> tasks_;
    std::uint64_t seed_;
    SimParams params_;
};

// The cross-domain pair from the sports/business illustration: identical
// operation sequences, disjoint wording.
struct CrossDomainFixture {
    PlanDecomposition sports;
    PlanDecomposition business;
};
CrossDomainFixture cross_domain_fixture();

}  // namespace apex::sim
