#pragma once
// One namespace of experience memory: the graph, the vector indexes, the
// experience records and the append-only record log that persists them.
//
// All accessors are unsynchronized; wrap calls in read() / write() to take
// the namespace lock. read() callers may run concurrently; write() callers
// are serialized.

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "apex/embedding.hpp"
#include "apex/experience.hpp"
#include "apex/graph_store.hpp"

namespace apex {

inline constexpr int kLogSchemaVersion = 1;

struct ExperienceEntry {
    ExperienceRecord record;
    std::uint64_t commit_seq = 0;  // 1-based position in the namespace's commit order
};

class Memory {
public:
    explicit Memory(std::shared_ptr<const EmbeddingProvider> embedder = nullptr);
    Memory(const Memory&) = delete;
    Memory& operator=(const Memory&) = delete;

    // File-backed namespace: replays <dir>/log.jsonl when present, then
    // appends every further mutation to it.
    static std::unique_ptr<Memory> open(const std::filesystem::path& dir,
                                        std::shared_ptr<const EmbeddingProvider> embedder = nullptr);
    // Rebuilds a namespace from exported log text; throws InvalidRecord when a
    // line does not re-serialize to itself.
    static std::unique_ptr<Memory> import_text(std::string_view text,
                                               std::shared_ptr<const EmbeddingProvider> embedder = nullptr);

    template <typename F>
    decltype(auto) read(F&& f) const {
        std::shared_lock lock(mutex_);
        return f(*this);
    }
    template <typename F>
    decltype(auto) write(F&& f) {
        std::unique_lock lock(mutex_);
        return f(*this);
    }

    GraphStore& graph() { return graph_; }
    const GraphStore& graph() const { return graph_; }
    const EmbeddingProvider& embedder() const { return *embedder_; }
    std::shared_ptr<const EmbeddingProvider> embedder_ptr() const { return embedder_; }
    const VectorIndex& experience_index() const { return experience_index_; }
    // Embeddings of Entity and Operation titles, used by the entity resolver.
    const VectorIndex& mention_index() const { return mention_index_; }

    // Adds the Experience node and its record; returns the node id.
    NodeId add_experience(ExperienceRecord rec);
    const ExperienceEntry* experience(NodeId id) const;
    const std::map<NodeId, ExperienceEntry>& experiences() const { return experiences_; }
    // Experience ids in commit order.
    const std::vector<NodeId>& commit_order() const { return commit_order_; }
    std::uint64_t commits_total() const { return commit_order_.size(); }
    bool is_archived(NodeId id) const;

    const std::vector<std::string>& log_lines() const { return log_; }
    std::string export_text() const;
    void export_to(const std::filesystem::path& file) const;

    // Exact line encodings used by the log.
    static std::string header_line(std::size_t dim);
    static Json node_to_json(const GraphNode& n);
    static Json edge_to_json(const GraphEdge& e);
    static Json flags_to_json(const NodeFlags& f);
    static GraphNode node_from_json(const Json& j);
    static GraphEdge edge_from_json(const Json& j);
    static NodeFlags flags_from_json(const Json& j);

private:
    void append(std::string line);
    void attach_experience(NodeId id, ExperienceRecord rec, std::uint64_t commit_seq);
    void apply_line(const std::string& line, std::size_t lineno);

    std::shared_ptr<const EmbeddingProvider> embedder_;
    GraphStore graph_;
    VectorIndex experience_index_;
    VectorIndex mention_index_;
    std::map<NodeId, ExperienceEntry> experiences_;
    std::vector<NodeId> commit_order_;
    std::vector<std::string> log_;
    std::unique_ptr<std::ofstream> sink_;
    mutable std::shared_mutex mutex_;
};

}  // namespace apex
