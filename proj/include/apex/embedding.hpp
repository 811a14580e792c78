#pragma once
// Embedding providers and an exact cosine index over stored vectors.

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "apex/common.hpp"

namespace apex {

inline constexpr std::size_t kDefaultEmbeddingDim = 1024;

struct EmbeddingVector {
    std::vector<float> values;

    std::size_t dim() const noexcept { return values.size(); }
    bool operator==(const EmbeddingVector&) const = default;
};

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual EmbeddingVector embed(std::string_view text) const = 0;
    virtual std::size_t dim() const = 0;
};

// Signed feature hashing over lowercase whitespace tokens, L2-normalised.
// Order-insensitive and monotone in lexical overlap; stands in for a real
// embedding service so the engine runs offline.
class HashingEmbedder final : public EmbeddingProvider {
public:
    explicit HashingEmbedder(std::size_t dim = kDefaultEmbeddingDim);

    EmbeddingVector embed(std::string_view text) const override;
    std::size_t dim() const override { return dim_; }

private:
    std::size_t dim_;
};

// Lowercased tokens with leading/trailing punctuation stripped.
std::vector<std::string> tokenize(std::string_view text);

std::uint64_t fnv1a64(std::string_view text);

struct ScoredId {
    NodeId id;
    double score = 0.0;
};

// Exact linear-scan cosine index. Results are ordered by score descending,
// ties by ascending id; the filter is applied before ranking.
class VectorIndex {
public:
    using Filter = std::function<bool(NodeId)>;

    void insert(NodeId id, EmbeddingVector v);
    std::vector<ScoredId> search(const EmbeddingVector& query, std::size_t k,
                                 const Filter& filter = {}) const;

    const EmbeddingVector* get(NodeId id) const;
    std::size_t size() const noexcept { return ids_.size(); }
    std::size_t dim() const noexcept { return dim_; }

private:
    std::size_t dim_ = 0;
    std::vector<NodeId> ids_;
    std::vector<EmbeddingVector> vectors_;
    std::vector<double> norms_;
    std::unordered_map<NodeId, std::size_t> positions_;
};

}  // namespace apex
