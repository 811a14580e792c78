#include "apex/ingest.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "apex/extraction.hpp"

namespace apex {

namespace {

std::vector<std::string> words(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

int parse_int(const std::string& s, const char* what) {
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0' || v < 0) {
        throw Error(ErrorCode::ParseError, std::string("bad ") + what + " '" + s + "'");
    }
    return static_cast<int>(v);
}

template <typename E>
E parse_named(const std::string& text, std::initializer_list<E> values, const char* what) {
    for (E v : values) {
        if (to_string(v) == text) return v;
    }
    throw Error(ErrorCode::ParseError, std::string("unknown ") + what + " '" + text + "'");
}

}  // namespace

ExtractedFeedback stub_feedback_extractor(std::string_view feedback) {
    ExtractedFeedback out;
    std::istringstream in{std::string(feedback)};
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind("ERROR:", 0) == 0) {
            auto w = words(std::string_view(line).substr(6));
            if (w.empty()) throw Error(ErrorCode::ParseError, "ERROR line without a class");
            auto cls = error_class_from_string(w[0]);
            if (!cls) throw Error(ErrorCode::ParseError, "unknown error class '" + w[0] + "'");
            ErrorEntry e;
            e.error_class = *cls;
            bool have_step = false;
            for (std::size_t i = 1; i < w.size(); ++i) {
                if (w[i] == "@step" && i + 1 < w.size()) {
                    e.step = parse_int(w[++i], "step");
                    have_step = true;
                } else if (w[i] == "@iter" && i + 1 < w.size()) {
                    e.iteration = parse_int(w[++i], "iteration");
                } else if (w[i].rfind("recovery=", 0) == 0) {
                    e.recovery_procedure = parse_named(
                        w[i].substr(9),
                        {RecoveryProcedure::RetryWithPatch, RecoveryProcedure::FallbackSource,
                         RecoveryProcedure::Escalate},
                        "recovery procedure");
                } else if (w[i].rfind("outcome=", 0) == 0) {
                    e.recovery_outcome = parse_named(
                        w[i].substr(8),
                        {RecoveryOutcome::Recovered, RecoveryOutcome::FailedRecovery,
                         RecoveryOutcome::Escalated},
                        "recovery outcome");
                } else {
                    throw Error(ErrorCode::ParseError, "unexpected ERROR token '" + w[i] + "'");
                }
            }
            if (!have_step) throw Error(ErrorCode::ParseError, "ERROR line without @step");
            out.errors.push_back(std::move(e));
        } else if (line.rfind("CAUSE:", 0) == 0) {
            if (out.errors.empty()) throw Error(ErrorCode::ParseError, "CAUSE before any ERROR");
            auto w = words(std::string_view(line).substr(6));
            if (w.size() < 2) throw Error(ErrorCode::ParseError, "CAUSE needs text and confidence");
            char* end = nullptr;
            const double conf = std::strtod(w.back().c_str(), &end);
            if (*end != '\0' || !(conf >= 0.0 && conf <= 1.0)) {
                throw Error(ErrorCode::ParseError, "bad confidence '" + w.back() + "'");
            }
            std::string hyp;
            for (std::size_t i = 0; i + 1 < w.size(); ++i) hyp += (i ? " " : "") + w[i];
            out.errors.back().hypothesis = hyp;
            out.errors.back().confidence = conf;
        } else if (line.rfind("PATCH:", 0) == 0) {
            auto w = words(std::string_view(line).substr(6));
            if (w.size() < 3) throw Error(ErrorCode::ParseError, "PATCH needs kind, location, logic");
            PatchEntry p;
            p.kind = parse_named(w[0], {PatchKind::InsertStep, PatchKind::ReplaceLogic}, "patch kind");
            p.location = w[1];
            for (std::size_t i = 2; i < w.size(); ++i) p.new_logic += (i > 2 ? " " : "") + w[i];
            if (!out.errors.empty()) {
                const auto& e = out.errors.back();
                p.trigger_signature = std::string(to_string(e.error_class)) + "@step" +
                                      std::to_string(e.step);
                p.rationale = e.hypothesis;
            }
            out.patches.push_back(std::move(p));
        }
    }
    return out;
}

ExtractedFeedback decompose_feedback(std::string_view feedback, const FeedbackExtractor& extractor) {
    if (feedback.empty()) return {};
    try {
        return extractor(feedback);
    } catch (const std::exception& e) {
        spdlog::warn("feedback extractor failed: {}", e.what());
        return {};
    }
}

CommitResult commit(EntityResolver& resolver, ExperienceRecord rec, const CommitOptions& opts) {
    auto report = validate_experience(rec);
    if (!report.empty()) {
        std::string msg;
        for (const auto& v : report) msg += (msg.empty() ? "" : "; ") + v.clause + ": " + v.detail;
        throw Error(ErrorCode::InvalidRecord, msg);
    }
    Memory& mem = resolver.memory();
    GraphStore& g = mem.graph();

    std::vector<NodeId> entities;
    try {
        const auto ops = materialize_signature(rec.signature, resolver);
        if (!opts.steps.empty()) link_step_metadata(opts.steps, ops, resolver, rec.goal.domain);
        for (const auto& mention : rec.goal.entities) {
            entities.push_back(resolver.resolve(mention, NodeKind::Entity, rec.goal.domain).node);
        }
        resolver.flush();
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidRecord, std::string("cannot bind record: ") + e.what());
    }

    const double q = rec.evaluation.overall;
    const std::string domain = rec.goal.domain;
    const StructuralSignature sig = rec.signature;
    const EmbeddingVector embedding = rec.goal.task_embedding;

    CommitResult out;
    out.id = mem.add_experience(std::move(rec));

    for (NodeId e : entities) {
        g.add_edge_if_absent(out.id, g.resolve_latest(e), EdgeKind::UsesEntity);
        ++out.entity_edges;
    }

    const auto& order = mem.commit_order();
    const std::size_t n_prev = order.size() - 1;
    const std::size_t window_start = n_prev > opts.similar_window ? n_prev - opts.similar_window : 0;
    if (n_prev > window_start) {
        const NodeId first = order[window_start];
        auto hits = mem.experience_index().search(embedding, n_prev - window_start, [&](NodeId id) {
            return id >= first && id != out.id;
        });
        std::sort(hits.begin(), hits.end(), [](const ScoredId& a, const ScoredId& b) { return a.id < b.id; });
        for (const auto& h : hits) {
            if (h.score > kSimilarToThreshold) {
                g.add_edge(out.id, h.id, EdgeKind::SimilarTo, std::min(h.score, 1.0));
                ++out.similar_edges;
            }
        }
    }

    std::unordered_map<std::string, double> sim_by_fingerprint;
    for (std::size_t i = 0; i < n_prev; ++i) {
        const NodeId other_id = order[i];
        if (mem.is_archived(other_id)) continue;
        const auto& other = mem.experience(other_id)->record;
        auto fp = other.goal.goal_signature;
        auto it = sim_by_fingerprint.find(fp);
        if (it == sim_by_fingerprint.end()) {
            it = sim_by_fingerprint.emplace(fp, structural_similarity(sig, other.signature)).first;
        }
        const double s = it->second;
        if (s >= kStructuralEdgeThreshold) {
            g.add_edge(out.id, other_id, EdgeKind::StructurallySimilarTo, s);
            ++out.structural_edges;
        }
        // equal length keeps subsequence matches (sim 1.0) from archiving another signature class
        if (s > kExperienceSupersedeThreshold && other.signature.size() == sig.size() &&
            other.goal.domain == domain &&
            other.evaluation.overall < q && !g.is_superseded(other_id)) {
            g.add_edge(out.id, other_id, EdgeKind::Supersedes, s);
            NodeFlags flags = g.node(other_id).flags;
            flags.archived = true;
            g.set_flags(other_id, flags);
            out.archived.push_back(other_id);
        }
    }

    for (NodeId src : opts.derived_from) {
        if (src != out.id && g.contains(src) && g.node(src).kind == NodeKind::Experience) {
            g.add_edge_if_absent(out.id, src, EdgeKind::DerivedFrom);
        }
    }
    return out;
}

}  // namespace apex
