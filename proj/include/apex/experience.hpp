#pragma once
// The Experience record: one procedural-episodic trace with goal, procedure,
// evidence, execution trace, error registry, patches and evaluation.
//
// Successful and failed executions share this schema; only the gate outcome
// differs. Records are immutable once assembled.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "apex/common.hpp"
#include "apex/embedding.hpp"
#include "apex/plan.hpp"
#include "apex/quality.hpp"
#include "apex/signature.hpp"

namespace apex {

enum class Intent { Exploration, Refinement, ErrorCorrection };
enum class ErrorClass { ConstraintViolation, EntityDisambiguation, ToolFailure, SchemaMismatch };
enum class RecoveryProcedure { RetryWithPatch, FallbackSource, Escalate };
enum class RecoveryOutcome { Recovered, FailedRecovery, Escalated };
enum class EvidenceKind { Web, ToolOutput, DbResult, FileSnapshot };
enum class PatchKind { InsertStep, ReplaceLogic };

std::string_view to_string(Intent v);
std::string_view to_string(ErrorClass v);
std::string_view to_string(RecoveryProcedure v);
std::string_view to_string(RecoveryOutcome v);
std::string_view to_string(EvidenceKind v);
std::string_view to_string(PatchKind v);
std::optional<ErrorClass> error_class_from_string(std::string_view text);

struct GoalReflection {
    std::string task_description;
    EmbeddingVector task_embedding;
    std::string domain;
    std::vector<std::string> constraints;
    std::vector<std::string> verification_contract;
    std::string goal_signature;          // fingerprint of the structural signature
    std::vector<std::string> entities;   // mentions bound through uses_entity edges
};

struct ProcedureStep {
    std::string op;
    std::map<std::string, std::string> args;
    std::string stop_when;
};

struct Budgets {
    int max_tool_calls = 0;
    int max_retries = 0;
    int max_iterations = 0;
};

struct ProcedureReflection {
    std::string procedure_ref_id;  // proc:<Name>:v<k>
    std::map<std::string, std::string> params;
    std::vector<ProcedureStep> steps;
    Budgets budgets;
    std::vector<std::string> checkpoints;
};

struct ContentDigest {
    std::string sha256;
    std::size_t bytes = 0;
};

struct Trust {
    std::string source_type;
    double authority_score = 0.0;
};

struct EvidenceItem {
    EvidenceKind kind = EvidenceKind::ToolOutput;
    std::map<std::string, std::string> locator;
    std::string content;
    ContentDigest digest;
    Trust trust;
};

EvidenceItem make_evidence(EvidenceKind kind, std::map<std::string, std::string> locator,
                           std::string content, Trust trust);

struct IterationStep {
    Intent intent = Intent::Exploration;
    std::string artifact;
    std::string result;
    bool valid = false;
    std::string feedback;
};

struct ErrorEntry {
    ErrorClass error_class = ErrorClass::ConstraintViolation;
    int step = 0;
    int iteration = 0;
    std::string hypothesis;
    double confidence = 0.0;
    RecoveryProcedure recovery_procedure = RecoveryProcedure::RetryWithPatch;
    RecoveryOutcome recovery_outcome = RecoveryOutcome::FailedRecovery;
};

struct PatchEntry {
    std::string trigger_signature;
    PatchKind kind = PatchKind::ReplaceLogic;
    std::string location;
    std::string new_logic;
    std::string rationale;
    double reliability_delta = 0.0;
    double tool_cost_delta = 0.0;
};

struct Evaluation {
    double correctness = 0.0;
    double efficiency = 0.0;
    double completeness = 0.0;
    double overall = 0.0;  // q
    std::string teacher_feedback;
    QualityWeights weights;
    double threshold = kDefaultQualityThreshold;
};

struct RetrievalKeys {
    std::vector<std::string> goal_ops;
    std::vector<std::string> failure_modes;
    std::vector<std::string> domain_tags;
};

struct ExperienceRecord {
    NodeId id;
    StructuralSignature signature;
    GoalReflection goal;
    ProcedureReflection procedure;
    std::vector<EvidenceItem> evidence;
    std::vector<IterationStep> trace;
    std::vector<ErrorEntry> error_registry;
    std::vector<PatchEntry> patches;
    Evaluation evaluation;
    Status status = Status::Failed;
    bool oracle_overridden = false;
    RetrievalKeys retrieval_keys;
};

// Optional inputs to assembly beyond the four core parts.
struct AssemblyExtras {
    EmbeddingVector task_embedding;
    bool oracle_reject = false;
    std::vector<ErrorEntry> errors;
    std::vector<PatchEntry> patches;
    std::vector<EvidenceItem> evidence;
    int max_iterations = 3;
    // Used only by the leakage guard; never stored.
    std::optional<std::string> ground_truth;
};

ExperienceRecord assemble_experience(const PlanDecomposition& planning,
                                     std::vector<IterationStep> trace,
                                     const Evaluation& evaluation,
                                     StructuralSignature signature,
                                     const AssemblyExtras& extras = {});

struct Violation {
    std::string clause;
    std::string detail;
};
using ValidationReport = std::vector<Violation>;

// Never throws; an empty report means the record is valid.
ValidationReport validate_experience(const ExperienceRecord& rec);
RetrievalKeys derive_retrieval_keys(const ExperienceRecord& rec);

inline constexpr std::size_t kMinPromptBudget = 200;
std::string compress_for_prompt(const ExperienceRecord& rec, std::size_t budget_chars);

// Canonical document: fixed field order, vectors at 9 significant digits.
Json to_json(const ExperienceRecord& rec);
ExperienceRecord experience_from_json(const Json& doc);
std::string serialize_experience(const ExperienceRecord& rec);
ExperienceRecord parse_experience(std::string_view text);

Json embedding_to_json(const EmbeddingVector& v);
EmbeddingVector embedding_from_json(const Json& j);

}  // namespace apex
