#include "apex/memory.hpp"

#include <cmath>
#include <sstream>

#include <spdlog/spdlog.h>

namespace apex {

namespace {

constexpr std::size_t kTitleChars = 80;

std::string short_title(const std::string& text) {
    if (text.size() <= kTitleChars) return text;
    return text.substr(0, kTitleChars - 3) + "...";
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        lines.emplace_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

}  // namespace

Memory::Memory(std::shared_ptr<const EmbeddingProvider> embedder)
    : embedder_(embedder ? std::move(embedder) : std::make_shared<HashingEmbedder>()) {
    log_.push_back(header_line(embedder_->dim()));
    GraphListener listener;
    listener.node_added = [this](const GraphNode& n) {
        append(node_to_json(n).dump());
        if (n.kind == NodeKind::Entity || n.kind == NodeKind::Operation) {
            try {
                mention_index_.insert(n.id, embedder_->embed(n.title));
            } catch (const Error& e) {
                spdlog::warn("node {} not indexed for resolution: {}", render_id(n.kind, n.id),
                             e.what());
            }
        }
    };
    listener.edge_added = [this](const GraphEdge& e) { append(edge_to_json(e).dump()); };
    listener.flags_changed = [this](const GraphNode& n) {
        Json j;
        j["record"] = "flags";
        j["id"] = render_id(n.kind, n.id);
        j["flags"] = flags_to_json(n.flags);
        append(j.dump());
    };
    graph_.set_listener(std::move(listener));
}

std::string Memory::header_line(std::size_t dim) {
    Json j;
    j["record"] = "header";
    j["format"] = "apex-pkg-log";
    j["schema_version"] = kLogSchemaVersion;
    j["embedding_dim"] = dim;
    return j.dump();
}

Json Memory::flags_to_json(const NodeFlags& f) {
    return {{"archived", f.archived},
            {"stale", f.stale},
            {"is_template", f.is_template},
            {"procedure_bump", f.procedure_bump}};
}

NodeFlags Memory::flags_from_json(const Json& j) {
    NodeFlags f;
    f.archived = j.at("archived").get<bool>();
    f.stale = j.at("stale").get<bool>();
    f.is_template = j.at("is_template").get<bool>();
    f.procedure_bump = j.at("procedure_bump").get<int>();
    return f;
}

Json Memory::node_to_json(const GraphNode& n) {
    Json j;
    j["record"] = "node";
    j["id"] = render_id(n.kind, n.id);
    j["kind"] = to_string(n.kind);
    j["title"] = n.title;
    j["description"] = n.description;
    j["domain_tag"] = n.domain_tag;
    j["payload"] = n.payload;
    j["created_at"] = n.created_at;
    j["version"] = n.version;
    j["flags"] = flags_to_json(n.flags);
    return j;
}

GraphNode Memory::node_from_json(const Json& j) {
    GraphNode n;
    n.id = parse_node_id(j.at("id").get<std::string>());
    n.kind = node_kind_from_string(j.at("kind").get<std::string>());
    n.title = j.at("title").get<std::string>();
    n.description = j.at("description").get<std::string>();
    n.domain_tag = j.at("domain_tag").get<std::string>();
    n.payload = j.at("payload").get<std::string>();
    n.created_at = j.at("created_at").get<std::uint64_t>();
    n.version = j.at("version").get<std::uint32_t>();
    n.flags = flags_from_json(j.at("flags"));
    return n;
}

Json Memory::edge_to_json(const GraphEdge& e) {
    Json j;
    j["record"] = "edge";
    j["id"] = render_edge_id(e.id);
    j["from"] = e.from.value;
    j["to"] = e.to.value;
    j["kind"] = to_string(e.kind);
    j["weight"] = e.weight ? Json(*e.weight) : Json(nullptr);
    j["created_at"] = e.created_at;
    return j;
}

GraphEdge Memory::edge_from_json(const Json& j) {
    GraphEdge e;
    const auto id = j.at("id").get<std::string>();
    if (id.rfind("edge:", 0) != 0) throw Error(ErrorCode::ParseError, "bad edge id " + id);
    e.id = EdgeId{std::stoull(id.substr(5))};
    e.from = NodeId{j.at("from").get<std::uint64_t>()};
    e.to = NodeId{j.at("to").get<std::uint64_t>()};
    e.kind = edge_kind_from_string(j.at("kind").get<std::string>());
    if (!j.at("weight").is_null()) e.weight = j["weight"].get<double>();
    e.created_at = j.at("created_at").get<std::uint64_t>();
    return e;
}

void Memory::append(std::string line) {
    if (sink_) {
        *sink_ << line << '\n';
        sink_->flush();
        if (!*sink_) throw Error(ErrorCode::IoError, "failed to append to namespace log");
    }
    log_.push_back(std::move(line));
}

NodeId Memory::add_experience(ExperienceRecord rec) {
    const auto& v = rec.goal.task_embedding;
    if (v.dim() != embedder_->dim()) {
        throw Error(ErrorCode::DimMismatch, "experience embedding has dim " +
                                                std::to_string(v.dim()) + ", namespace uses " +
                                                std::to_string(embedder_->dim()));
    }
    bool nonzero = false;
    for (float x : v.values) {
        if (!std::isfinite(x)) throw Error(ErrorCode::InvalidRecord, "non-finite embedding");
        nonzero = nonzero || x != 0.0f;
    }
    if (!nonzero) throw Error(ErrorCode::ZeroVector, "experience embedding is zero");

    GraphNode node;
    node.kind = NodeKind::Experience;
    node.title = short_title(rec.goal.task_description);
    node.description = rec.goal.task_description;
    node.domain_tag = rec.goal.domain;
    node.payload = rec.procedure.procedure_ref_id;
    const NodeId id = graph_.add_node(std::move(node));
    rec.id = id;
    attach_experience(id, std::move(rec), commits_total() + 1);
    return id;
}

void Memory::attach_experience(NodeId id, ExperienceRecord rec, std::uint64_t commit_seq) {
    const GraphNode* node = graph_.find(id);
    if (!node || node->kind != NodeKind::Experience) {
        throw Error(ErrorCode::InvalidRecord, "experience record without an Experience node");
    }
    if (experiences_.count(id)) throw Error(ErrorCode::DuplicateId, "record already attached");
    experience_index_.insert(id, rec.goal.task_embedding);
    Json j;
    j["record"] = "experience";
    j["id"] = render_id(NodeKind::Experience, id);
    j["commit_seq"] = commit_seq;
    j["document"] = to_json(rec);
    append(j.dump());
    commit_order_.push_back(id);
    experiences_.emplace(id, ExperienceEntry{std::move(rec), commit_seq});
}

const ExperienceEntry* Memory::experience(NodeId id) const {
    auto it = experiences_.find(id);
    return it == experiences_.end() ? nullptr : &it->second;
}

bool Memory::is_archived(NodeId id) const {
    const GraphNode* n = graph_.find(id);
    return n && n->flags.archived;
}

std::string Memory::export_text() const {
    std::string out;
    for (const auto& line : log_) {
        out += line;
        out.push_back('\n');
    }
    return out;
}

void Memory::export_to(const std::filesystem::path& file) const {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + file.string());
    out << export_text();
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + file.string());
}

void Memory::apply_line(const std::string& line, std::size_t lineno) {
    const std::string where = "log line " + std::to_string(lineno);
    Json j;
    try {
        j = Json::parse(line);
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::InvalidRecord, where + ": " + e.what());
    }
    const std::size_t before = log_.size();
    try {
        const auto kind = j.at("record").get<std::string>();
        if (kind == "node") {
            graph_.restore_node(node_from_json(j));
        } else if (kind == "edge") {
            graph_.restore_edge(edge_from_json(j));
        } else if (kind == "flags") {
            graph_.set_flags(parse_node_id(j.at("id").get<std::string>()),
                             flags_from_json(j.at("flags")));
        } else if (kind == "experience") {
            const NodeId id = parse_node_id(j.at("id").get<std::string>());
            const auto seq = j.at("commit_seq").get<std::uint64_t>();
            if (seq != commits_total() + 1) {
                throw Error(ErrorCode::InvalidRecord, "commit_seq out of order");
            }
            ExperienceRecord rec = experience_from_json(j.at("document"));
            if (rec.id != id) throw Error(ErrorCode::InvalidRecord, "record id mismatch");
            attach_experience(id, std::move(rec), seq);
        } else {
            throw Error(ErrorCode::InvalidRecord, "unknown record type '" + kind + "'");
        }
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::InvalidRecord, where + ": " + e.what());
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidRecord, where + ": " + e.what());
    }
    if (log_.size() != before + 1 || log_.back() != line) {
        throw Error(ErrorCode::InvalidRecord, where + " is not in canonical form");
    }
}

std::unique_ptr<Memory> Memory::import_text(std::string_view text,
                                            std::shared_ptr<const EmbeddingProvider> embedder) {
    auto mem = std::make_unique<Memory>(std::move(embedder));
    auto lines = split_lines(text);
    if (lines.empty()) throw Error(ErrorCode::InvalidRecord, "log is empty");
    if (lines.front() != mem->log_.front()) {
        throw Error(ErrorCode::InvalidRecord, "log header mismatch: " + lines.front());
    }
    for (std::size_t i = 1; i < lines.size(); ++i) mem->apply_line(lines[i], i + 1);
    return mem;
}

std::unique_ptr<Memory> Memory::open(const std::filesystem::path& dir,
                                     std::shared_ptr<const EmbeddingProvider> embedder) {
    std::filesystem::create_directories(dir);
    const auto file = dir / "log.jsonl";
    std::unique_ptr<Memory> mem;
    if (std::filesystem::exists(file)) {
        std::ifstream in(file, std::ios::binary);
        if (!in) throw Error(ErrorCode::IoError, "cannot read " + file.string());
        std::stringstream ss;
        ss << in.rdbuf();
        mem = import_text(ss.str(), std::move(embedder));
        mem->sink_ = std::make_unique<std::ofstream>(file, std::ios::binary | std::ios::app);
    } else {
        mem = std::make_unique<Memory>(std::move(embedder));
        mem->sink_ = std::make_unique<std::ofstream>(file, std::ios::binary | std::ios::trunc);
        for (const auto& line : mem->log_) *mem->sink_ << line << '\n';
        mem->sink_->flush();
    }
    if (!*mem->sink_) throw Error(ErrorCode::IoError, "cannot append to " + file.string());
    return mem;
}

}  // namespace apex
