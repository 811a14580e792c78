#include "apex/experience.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <regex>
#include <sstream>

#include "apex/digest.hpp"

namespace apex {

namespace {

template <typename E, std::size_t N>
std::string_view name_of(E v, const std::pair<E, std::string_view> (&table)[N]) {
    for (const auto& [value, name] : table) {
        if (value == v) return name;
    }
    return "unknown";
}

template <typename E, std::size_t N>
std::optional<E> value_of(std::string_view text, const std::pair<E, std::string_view> (&table)[N]) {
    for (const auto& [value, name] : table) {
        if (name == text) return value;
    }
    return std::nullopt;
}

template <typename E, std::size_t N>
E parse_enum(const Json& j, const std::pair<E, std::string_view> (&table)[N], const char* what) {
    const auto text = j.get<std::string>();
    if (auto v = value_of(text, table)) return *v;
    throw Error(ErrorCode::ParseError, std::string("unknown ") + what + " '" + text + "'");
}

constexpr std::pair<Intent, std::string_view> kIntents[] = {
    {Intent::Exploration, "exploration"},
    {Intent::Refinement, "refinement"},
    {Intent::ErrorCorrection, "error_correction"},
};
constexpr std::pair<ErrorClass, std::string_view> kErrorClasses[] = {
    {ErrorClass::ConstraintViolation, "constraint_violation"},
    {ErrorClass::EntityDisambiguation, "entity_disambiguation"},
    {ErrorClass::ToolFailure, "tool_failure"},
    {ErrorClass::SchemaMismatch, "schema_mismatch"},
};
constexpr std::pair<RecoveryProcedure, std::string_view> kRecoveryProcedures[] = {
    {RecoveryProcedure::RetryWithPatch, "retry_with_patch"},
    {RecoveryProcedure::FallbackSource, "fallback_source"},
    {RecoveryProcedure::Escalate, "escalate"},
};
constexpr std::pair<RecoveryOutcome, std::string_view> kRecoveryOutcomes[] = {
    {RecoveryOutcome::Recovered, "recovered"},
    {RecoveryOutcome::FailedRecovery, "failed"},
    {RecoveryOutcome::Escalated, "escalated"},
};
constexpr std::pair<EvidenceKind, std::string_view> kEvidenceKinds[] = {
    {EvidenceKind::Web, "web"},
    {EvidenceKind::ToolOutput, "tool_output"},
    {EvidenceKind::DbResult, "db_result"},
    {EvidenceKind::FileSnapshot, "file_snapshot"},
};
constexpr std::pair<PatchKind, std::string_view> kPatchKinds[] = {
    {PatchKind::InsertStep, "insert_step"},
    {PatchKind::ReplaceLogic, "replace_logic"},
};

std::string fmt_score(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string procedure_slug(const PlanDecomposition& planning, const StructuralSignature& sig) {
    std::string name;
    for (unsigned char c : planning.procedure_name) {
        if (std::isalnum(c) || c == '_' || c == '-') name.push_back(static_cast<char>(c));
    }
    if (name.empty()) name = "P" + sig.fingerprint().substr(0, 8);
    return name;
}

void add(ValidationReport& report, std::string clause, std::string detail) {
    report.push_back({std::move(clause), std::move(detail)});
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

std::string_view to_string(Intent v) { return name_of(v, kIntents); }
std::string_view to_string(ErrorClass v) { return name_of(v, kErrorClasses); }
std::string_view to_string(RecoveryProcedure v) { return name_of(v, kRecoveryProcedures); }
std::string_view to_string(RecoveryOutcome v) { return name_of(v, kRecoveryOutcomes); }
std::string_view to_string(EvidenceKind v) { return name_of(v, kEvidenceKinds); }
std::string_view to_string(PatchKind v) { return name_of(v, kPatchKinds); }

std::optional<ErrorClass> error_class_from_string(std::string_view text) {
    return value_of(text, kErrorClasses);
}

EvidenceItem make_evidence(EvidenceKind kind, std::map<std::string, std::string> locator,
                           std::string content, Trust trust) {
    EvidenceItem item;
    item.kind = kind;
    item.locator = std::move(locator);
    item.digest = {sha256_hex(content), content.size()};
    item.content = std::move(content);
    item.trust = std::move(trust);
    return item;
}

RetrievalKeys derive_retrieval_keys(const ExperienceRecord& rec) {
    RetrievalKeys keys;
    for (const auto& op : rec.signature.ops) {
        if (std::find(keys.goal_ops.begin(), keys.goal_ops.end(), op) == keys.goal_ops.end()) {
            keys.goal_ops.push_back(op);
        }
    }
    for (const auto& e : rec.error_registry) {
        std::string mode(to_string(e.error_class));
        if (std::find(keys.failure_modes.begin(), keys.failure_modes.end(), mode) ==
            keys.failure_modes.end()) {
            keys.failure_modes.push_back(std::move(mode));
        }
    }
    if (!rec.goal.domain.empty()) keys.domain_tags.push_back(rec.goal.domain);
    return keys;
}

ExperienceRecord assemble_experience(const PlanDecomposition& planning,
                                     std::vector<IterationStep> trace,
                                     const Evaluation& evaluation,
                                     StructuralSignature signature,
                                     const AssemblyExtras& extras) {
    if (trace.empty()) {
        throw Error(ErrorCode::InvariantViolation, "trace-non-empty: execution trace is empty");
    }
    if (extras.ground_truth && !extras.ground_truth->empty() &&
        evaluation.teacher_feedback.find(*extras.ground_truth) != std::string::npos) {
        throw Error(ErrorCode::InvariantViolation,
                    "answer-leakage: teacher feedback contains the ground-truth answer");
    }

    ExperienceRecord rec;
    rec.signature = std::move(signature);

    rec.goal.task_description = planning.task_description;
    rec.goal.task_embedding = extras.task_embedding;
    rec.goal.domain = planning.domain;
    rec.goal.constraints = planning.understanding.constraints;
    rec.goal.verification_contract.push_back("validator_pass");
    if (!planning.understanding.output_format.empty()) {
        rec.goal.verification_contract.push_back("output_format:" +
                                                 planning.understanding.output_format);
    }
    rec.goal.goal_signature = rec.signature.fingerprint();
    rec.goal.entities = planning.entities;

    auto& proc = rec.procedure;
    proc.procedure_ref_id = "proc:" + procedure_slug(planning, rec.signature) + ":v1";
    if (!planning.topic.empty()) proc.params["topic"] = planning.topic;
    for (std::size_t i = 0; i < rec.signature.ops.size(); ++i) {
        ProcedureStep step;
        step.op = rec.signature.ops[i];
        if (i < planning.steps.size()) step.args["text"] = planning.steps[i].text;
        step.stop_when = i + 1 == rec.signature.ops.size() ? "validator_pass" : "step_complete";
        proc.steps.push_back(std::move(step));
    }
    const int max_iter = std::max(1, extras.max_iterations);
    proc.budgets = {static_cast<int>(proc.steps.size()) * max_iter, max_iter - 1, max_iter};
    if (!rec.signature.empty()) proc.checkpoints.push_back("after:" + rec.signature.ops.back());

    rec.evidence = extras.evidence;
    rec.trace = std::move(trace);
    rec.error_registry = extras.errors;
    rec.patches = extras.patches;
    rec.evaluation = evaluation;
    rec.status = gate(evaluation.overall, evaluation.threshold, extras.oracle_reject);
    rec.oracle_overridden = extras.oracle_reject;
    rec.retrieval_keys = derive_retrieval_keys(rec);

    auto report = validate_experience(rec);
    if (!report.empty()) {
        std::string msg;
        for (const auto& v : report) {
            if (!msg.empty()) msg += "; ";
            msg += v.clause + ": " + v.detail;
        }
        throw Error(ErrorCode::InvariantViolation, msg);
    }
    return rec;
}

ValidationReport validate_experience(const ExperienceRecord& rec) {
    ValidationReport report;
    if (rec.goal.task_description.empty()) add(report, "self-contained", "empty task description");
    if (rec.goal.domain.empty()) add(report, "self-contained", "empty domain");
    if (rec.trace.empty()) add(report, "trace-non-empty", "execution trace is empty");
    for (std::size_t i = 1; i < rec.trace.size(); ++i) {
        if (rec.trace[i].intent < rec.trace[i - 1].intent) {
            add(report, "intent-ordering",
                "iteration " + std::to_string(i + 1) + " intent " +
                    std::string(to_string(rec.trace[i].intent)) + " follows " +
                    std::string(to_string(rec.trace[i - 1].intent)));
            break;
        }
    }

    const auto& ev = rec.evaluation;
    if (!in_unit(ev.correctness) || !in_unit(ev.efficiency) || !in_unit(ev.completeness) ||
        !in_unit(ev.overall)) {
        add(report, "evaluation-range", "scores must lie in [0,1]");
    }
    if (!in_unit(ev.threshold)) add(report, "evaluation-range", "threshold outside [0,1]");
    bool weights_ok = true;
    try {
        check_weights(ev.weights);
    } catch (const Error& e) {
        weights_ok = false;
        add(report, "weights", e.what());
    }
    if (weights_ok) {
        const double expect = ev.weights.correctness * ev.correctness +
                              ev.weights.efficiency * ev.efficiency +
                              ev.weights.completeness * ev.completeness;
        if (!(std::abs(expect - ev.overall) <= 1e-12)) {
            add(report, "evaluation-consistency",
                "q=" + std::to_string(ev.overall) + " but weighted sum is " +
                    std::to_string(expect));
        }
    }
    if (rec.status != gate(ev.overall, ev.threshold, rec.oracle_overridden)) {
        add(report, "status-gate", "status " + std::string(to_string(rec.status)) +
                                       " disagrees with the quality gate");
    }

    for (std::size_t i = 0; i < rec.evidence.size(); ++i) {
        const auto& item = rec.evidence[i];
        if (item.digest.sha256 != sha256_hex(item.content) ||
            item.digest.bytes != item.content.size()) {
            add(report, "content-address", "evidence " + std::to_string(i) + " digest mismatch");
        }
        if (!in_unit(item.trust.authority_score)) {
            add(report, "evidence-trust", "authority score outside [0,1]");
        }
    }
    for (const auto& e : rec.error_registry) {
        if (!in_unit(e.confidence)) {
            add(report, "error-confidence", "root-cause confidence outside [0,1]");
            break;
        }
    }

    if (rec.signature.empty()) add(report, "signature-non-empty", "structural signature is empty");
    for (const auto& op : rec.signature.ops) {
        if (!is_op_id(op)) {
            add(report, "signature-ops", "'" + op + "' is not an operation id");
            break;
        }
    }
    if (rec.goal.goal_signature != rec.signature.fingerprint()) {
        add(report, "fingerprint", "goal signature does not match the structural signature");
    }
    static const std::regex proc_re("^proc:[^:]+:v[0-9]+$");
    if (!std::regex_match(rec.procedure.procedure_ref_id, proc_re)) {
        add(report, "procedure-ref", "malformed procedure ref '" +
                                         rec.procedure.procedure_ref_id + "'");
    }
    const auto keys = derive_retrieval_keys(rec);
    if (keys.goal_ops != rec.retrieval_keys.goal_ops ||
        keys.failure_modes != rec.retrieval_keys.failure_modes ||
        keys.domain_tags != rec.retrieval_keys.domain_tags) {
        add(report, "retrieval-keys", "retrieval keys are not derived from the record");
    }
    for (float v : rec.goal.task_embedding.values) {
        if (!std::isfinite(v)) {
            add(report, "embedding-finite", "task embedding has a non-finite component");
            break;
        }
    }
    return report;
}

std::string compress_for_prompt(const ExperienceRecord& rec, std::size_t budget_chars) {
    if (budget_chars < kMinPromptBudget) {
        throw Error(ErrorCode::BudgetTooSmall, "budget " + std::to_string(budget_chars) +
                                                   " below " + std::to_string(kMinPromptBudget));
    }
    const std::string head = "TASK [" + std::string(to_string(rec.status)) + " q=" +
                             fmt_score(rec.evaluation.overall) + " " + rec.goal.domain + "]: ";
    std::string description = rec.goal.task_description;

    std::vector<std::string> sections;
    {
        std::string s = "SIGNATURE:";
        for (std::size_t i = 0; i < rec.signature.ops.size(); ++i) {
            s += i == 0 ? " " : " -> ";
            s += rec.signature.ops[i];
        }
        sections.push_back(s + "\n");
    }
    if (!rec.procedure.steps.empty()) {
        std::string s = "STEPS:\n";
        for (std::size_t i = 0; i < rec.procedure.steps.size(); ++i) {
            const auto& step = rec.procedure.steps[i];
            s += "  " + std::to_string(i + 1) + ". " + step.op;
            auto it = step.args.find("text");
            if (it != step.args.end() && !it->second.empty()) s += " (" + it->second + ")";
            s += "\n";
        }
        sections.push_back(s);
    }
    if (!rec.evaluation.teacher_feedback.empty()) {
        sections.push_back("FEEDBACK: " + rec.evaluation.teacher_feedback + "\n");
    }
    if (rec.status == Status::Failed && !rec.error_registry.empty()) {
        std::string s = "ERRORS:\n";
        for (const auto& e : rec.error_registry) {
            s += "  error_class=" + std::string(to_string(e.error_class)) + " @step " +
                 std::to_string(e.step) + ": " + e.hypothesis + "\n";
        }
        sections.push_back(s);
    }
    if (rec.status == Status::Failed && !rec.patches.empty()) {
        std::string s = "PATCHES:\n";
        for (const auto& p : rec.patches) {
            s += "  " + std::string(to_string(p.kind)) + " " + p.location + ": " + p.new_logic +
                 "\n";
        }
        sections.push_back(s);
    }

    auto total = [&](std::size_t keep) {
        std::size_t n = head.size() + description.size() + 1;
        for (std::size_t i = 0; i < keep; ++i) n += sections[i].size();
        return n;
    };
    std::size_t keep = sections.size();
    // The signature (index 0) is never dropped; shorten the description instead.
    while (keep > 1 && total(keep) > budget_chars) --keep;
    if (total(keep) > budget_chars) {
        const std::size_t fixed = total(keep) - description.size();
        const std::size_t room = fixed + 3 < budget_chars ? budget_chars - fixed - 3 : 0;
        description = description.substr(0, room) + "...";
    }
    std::string out = head + description + "\n";
    for (std::size_t i = 0; i < keep; ++i) out += sections[i];
    if (out.size() > budget_chars) out.resize(budget_chars);
    return out;
}

Json embedding_to_json(const EmbeddingVector& v) {
    Json arr = Json::array();
    char buf[32];
    for (float x : v.values) {
        std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(x));
        arr.push_back(std::strtod(buf, nullptr));
    }
    return arr;
}

EmbeddingVector embedding_from_json(const Json& j) {
    EmbeddingVector v;
    v.values.reserve(j.size());
    for (const auto& x : j) v.values.push_back(static_cast<float>(x.get<double>()));
    return v;
}

Json to_json(const ExperienceRecord& rec) {
    Json doc;
    doc["id"] = rec.id.valid() ? render_id(NodeKind::Experience, rec.id) : "";
    doc["signature"] = {{"ops", rec.signature.ops}, {"fingerprint", rec.signature.fingerprint()}};

    const auto& g = rec.goal;
    doc["goal"] = {{"task_description", g.task_description},
                   {"task_embedding", embedding_to_json(g.task_embedding)},
                   {"domain", g.domain},
                   {"constraints", g.constraints},
                   {"verification_contract", g.verification_contract},
                   {"goal_signature", g.goal_signature},
                   {"entities", g.entities}};

    const auto& p = rec.procedure;
    Json steps = Json::array();
    for (const auto& s : p.steps) {
        steps.push_back({{"op", s.op}, {"args", s.args}, {"stop_when", s.stop_when}});
    }
    doc["procedure"] = {{"procedure_ref_id", p.procedure_ref_id},
                        {"params", p.params},
                        {"steps", steps},
                        {"budgets",
                         {{"max_tool_calls", p.budgets.max_tool_calls},
                          {"max_retries", p.budgets.max_retries},
                          {"max_iterations", p.budgets.max_iterations}}},
                        {"checkpoints", p.checkpoints}};

    Json evidence = Json::array();
    for (const auto& e : rec.evidence) {
        evidence.push_back({{"kind", to_string(e.kind)},
                            {"locator", e.locator},
                            {"content", e.content},
                            {"content_digest", {{"sha256", e.digest.sha256}, {"bytes", e.digest.bytes}}},
                            {"trust",
                             {{"source_type", e.trust.source_type},
                              {"authority_score", e.trust.authority_score}}}});
    }
    doc["evidence"] = evidence;

    Json trace = Json::array();
    for (const auto& t : rec.trace) {
        trace.push_back({{"intent", to_string(t.intent)},
                         {"artifact", t.artifact},
                         {"result", t.result},
                         {"valid", t.valid ? 1 : 0},
                         {"feedback", t.feedback}});
    }
    doc["trace"] = trace;

    Json errors = Json::array();
    for (const auto& e : rec.error_registry) {
        errors.push_back({{"error_class", to_string(e.error_class)},
                          {"occurred_at", {{"step", e.step}, {"iteration", e.iteration}}},
                          {"root_cause", {{"hypothesis", e.hypothesis}, {"confidence", e.confidence}}},
                          {"recovery_procedure", to_string(e.recovery_procedure)},
                          {"recovery_outcome", to_string(e.recovery_outcome)}});
    }
    doc["error_registry"] = errors;

    Json patches = Json::array();
    for (const auto& pe : rec.patches) {
        patches.push_back({{"trigger_signature", pe.trigger_signature},
                           {"patch",
                            {{"kind", to_string(pe.kind)},
                             {"location", pe.location},
                             {"new_logic", pe.new_logic}}},
                           {"rationale", pe.rationale},
                           {"utility_delta",
                            {{"reliability", pe.reliability_delta},
                             {"tool_cost", pe.tool_cost_delta}}}});
    }
    doc["patches"] = patches;

    const auto& ev = rec.evaluation;
    doc["evaluation"] = {{"correctness", ev.correctness},
                         {"efficiency", ev.efficiency},
                         {"completeness", ev.completeness},
                         {"overall", ev.overall},
                         {"teacher_feedback", ev.teacher_feedback},
                         {"weights",
                          {{"correctness", ev.weights.correctness},
                           {"efficiency", ev.weights.efficiency},
                           {"completeness", ev.weights.completeness}}},
                         {"threshold", ev.threshold}};
    doc["status"] = to_string(rec.status);
    doc["oracle_overridden"] = rec.oracle_overridden;
    doc["retrieval_keys"] = {{"goal_ops", rec.retrieval_keys.goal_ops},
                             {"failure_modes", rec.retrieval_keys.failure_modes},
                             {"domain_tags", rec.retrieval_keys.domain_tags}};
    return doc;
}

ExperienceRecord experience_from_json(const Json& doc) {
    try {
        ExperienceRecord rec;
        const auto id = doc.at("id").get<std::string>();
        if (!id.empty()) rec.id = parse_node_id(id);
        rec.signature.ops = doc.at("signature").at("ops").get<std::vector<std::string>>();
        if (doc.at("signature").contains("fingerprint") &&
            doc["signature"]["fingerprint"].get<std::string>() != rec.signature.fingerprint()) {
            throw Error(ErrorCode::ParseError, "signature fingerprint does not match its ops");
        }

        const auto& g = doc.at("goal");
        rec.goal.task_description = g.at("task_description").get<std::string>();
        rec.goal.task_embedding = embedding_from_json(g.at("task_embedding"));
        rec.goal.domain = g.at("domain").get<std::string>();
        rec.goal.constraints = g.value("constraints", std::vector<std::string>{});
        rec.goal.verification_contract = g.value("verification_contract", std::vector<std::string>{});
        rec.goal.goal_signature = g.at("goal_signature").get<std::string>();
        rec.goal.entities = g.value("entities", std::vector<std::string>{});

        const auto& p = doc.at("procedure");
        rec.procedure.procedure_ref_id = p.at("procedure_ref_id").get<std::string>();
        rec.procedure.params = p.value("params", std::map<std::string, std::string>{});
        for (const auto& s : p.at("steps")) {
            rec.procedure.steps.push_back({s.at("op").get<std::string>(),
                                           s.value("args", std::map<std::string, std::string>{}),
                                           s.value("stop_when", std::string{})});
        }
        if (p.contains("budgets")) {
            const auto& b = p["budgets"];
            rec.procedure.budgets = {b.value("max_tool_calls", 0), b.value("max_retries", 0),
                                     b.value("max_iterations", 0)};
        }
        rec.procedure.checkpoints = p.value("checkpoints", std::vector<std::string>{});

        for (const auto& e : doc.value("evidence", Json::array())) {
            EvidenceItem item;
            item.kind = parse_enum(e.at("kind"), kEvidenceKinds, "evidence kind");
            item.locator = e.value("locator", std::map<std::string, std::string>{});
            item.content = e.at("content").get<std::string>();
            item.digest.sha256 = e.at("content_digest").at("sha256").get<std::string>();
            item.digest.bytes = e.at("content_digest").at("bytes").get<std::size_t>();
            item.trust.source_type = e.at("trust").value("source_type", std::string{});
            item.trust.authority_score = e.at("trust").value("authority_score", 0.0);
            rec.evidence.push_back(std::move(item));
        }
        for (const auto& t : doc.at("trace")) {
            IterationStep step;
            step.intent = parse_enum(t.at("intent"), kIntents, "intent");
            step.artifact = t.value("artifact", std::string{});
            step.result = t.value("result", std::string{});
            step.valid = t.at("valid").get<int>() != 0;
            step.feedback = t.value("feedback", std::string{});
            rec.trace.push_back(std::move(step));
        }
        for (const auto& e : doc.value("error_registry", Json::array())) {
            ErrorEntry entry;
            entry.error_class = parse_enum(e.at("error_class"), kErrorClasses, "error class");
            entry.step = e.at("occurred_at").value("step", 0);
            entry.iteration = e.at("occurred_at").value("iteration", 0);
            entry.hypothesis = e.at("root_cause").value("hypothesis", std::string{});
            entry.confidence = e.at("root_cause").value("confidence", 0.0);
            entry.recovery_procedure =
                parse_enum(e.at("recovery_procedure"), kRecoveryProcedures, "recovery procedure");
            entry.recovery_outcome =
                parse_enum(e.at("recovery_outcome"), kRecoveryOutcomes, "recovery outcome");
            rec.error_registry.push_back(std::move(entry));
        }
        for (const auto& pe : doc.value("patches", Json::array())) {
            PatchEntry entry;
            entry.trigger_signature = pe.value("trigger_signature", std::string{});
            entry.kind = parse_enum(pe.at("patch").at("kind"), kPatchKinds, "patch kind");
            entry.location = pe.at("patch").value("location", std::string{});
            entry.new_logic = pe.at("patch").value("new_logic", std::string{});
            entry.rationale = pe.value("rationale", std::string{});
            if (pe.contains("utility_delta")) {
                entry.reliability_delta = pe["utility_delta"].value("reliability", 0.0);
                entry.tool_cost_delta = pe["utility_delta"].value("tool_cost", 0.0);
            }
            rec.patches.push_back(std::move(entry));
        }

        const auto& ev = doc.at("evaluation");
        rec.evaluation.correctness = ev.at("correctness").get<double>();
        rec.evaluation.efficiency = ev.at("efficiency").get<double>();
        rec.evaluation.completeness = ev.at("completeness").get<double>();
        rec.evaluation.overall = ev.at("overall").get<double>();
        rec.evaluation.teacher_feedback = ev.value("teacher_feedback", std::string{});
        if (ev.contains("weights")) {
            const auto& w = ev["weights"];
            rec.evaluation.weights = {w.at("correctness").get<double>(),
                                      w.at("efficiency").get<double>(),
                                      w.at("completeness").get<double>()};
        }
        rec.evaluation.threshold = ev.value("threshold", kDefaultQualityThreshold);
        rec.status = status_from_string(doc.at("status").get<std::string>());
        rec.oracle_overridden = doc.value("oracle_overridden", false);
        if (doc.contains("retrieval_keys")) {
            const auto& k = doc["retrieval_keys"];
            rec.retrieval_keys.goal_ops = k.value("goal_ops", std::vector<std::string>{});
            rec.retrieval_keys.failure_modes = k.value("failure_modes", std::vector<std::string>{});
            rec.retrieval_keys.domain_tags = k.value("domain_tags", std::vector<std::string>{});
        } else {
            rec.retrieval_keys = derive_retrieval_keys(rec);
        }
        return rec;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("experience document: ") + e.what());
    }
}

std::string serialize_experience(const ExperienceRecord& rec) { return to_json(rec).dump(); }

ExperienceRecord parse_experience(std::string_view text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    return experience_from_json(doc);
}

}  // namespace apex
