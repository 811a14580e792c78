#include "apex/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>

namespace apex {

namespace {

double dot(const std::vector<float>& a, const std::vector<float>& b) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    const std::size_t n = a.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        for (std::size_t j = 0; j < 4; ++j) {
            acc[j] += static_cast<double>(a[i + j]) * static_cast<double>(b[i + j]);
        }
    }
    for (; i < n; ++i) acc[0] += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

}  // namespace

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw Error(ErrorCode::DimMismatch, std::to_string(a.dim()) + " vs " +
                                                std::to_string(b.dim()));
    }
    const double na = std::sqrt(dot(a.values, a.values));
    const double nb = std::sqrt(dot(b.values, b.values));
    if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
    return std::clamp(dot(a.values, b.values) / (na * nb), -1.0, 1.0);
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        std::string_view raw = text.substr(i, j - i);
        std::size_t b = 0, e = raw.size();
        while (b < e && std::ispunct(static_cast<unsigned char>(raw[b]))) ++b;
        while (e > b && std::ispunct(static_cast<unsigned char>(raw[e - 1]))) --e;
        if (e > b) {
            std::string tok(raw.substr(b, e - b));
            for (char& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            tokens.push_back(std::move(tok));
        }
        i = j;
    }
    return tokens;
}

HashingEmbedder::HashingEmbedder(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw Error(ErrorCode::InvalidArgument, "embedding dim must be positive");
}

EmbeddingVector HashingEmbedder::embed(std::string_view text) const {
    auto tokens = tokenize(text);
    if (tokens.empty()) throw Error(ErrorCode::EmptyText, "cannot embed empty text");
    std::vector<double> acc(dim_, 0.0);
    for (const auto& tok : tokens) {
        const std::uint64_t h = fnv1a64(tok);
        const std::size_t bucket = static_cast<std::size_t>(h % dim_);
        acc[bucket] += ((h >> 63) & 1u) ? -1.0 : 1.0;
    }
    double norm = 0.0;
    for (double x : acc) norm += x * x;
    if (norm == 0.0) {
        // Opposite-signed collisions cancelled out; fall back to the whole text.
        const std::uint64_t h = fnv1a64(text);
        acc[static_cast<std::size_t>(h % dim_)] = 1.0;
        norm = 1.0;
    }
    norm = std::sqrt(norm);
    EmbeddingVector out;
    out.values.resize(dim_);
    for (std::size_t i = 0; i < dim_; ++i) out.values[i] = static_cast<float>(acc[i] / norm);
    return out;
}

void VectorIndex::insert(NodeId id, EmbeddingVector v) {
    if (v.dim() == 0) throw Error(ErrorCode::DimMismatch, "empty vector");
    if (dim_ == 0) dim_ = v.dim();
    if (v.dim() != dim_) {
        throw Error(ErrorCode::DimMismatch, "index dim " + std::to_string(dim_) + ", got " +
                                                std::to_string(v.dim()));
    }
    const double norm = std::sqrt(dot(v.values, v.values));
    if (norm == 0.0) throw Error(ErrorCode::ZeroVector, "cannot index a zero vector");
    if (!positions_.emplace(id, ids_.size()).second) {
        throw Error(ErrorCode::DuplicateId, "vector already indexed for node " +
                                                std::to_string(id.value));
    }
    ids_.push_back(id);
    vectors_.push_back(std::move(v));
    norms_.push_back(norm);
}

std::vector<ScoredId> VectorIndex::search(const EmbeddingVector& query, std::size_t k,
                                          const Filter& filter) const {
    if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    std::vector<ScoredId> scored;
    if (ids_.empty()) return scored;
    if (query.dim() != dim_) {
        throw Error(ErrorCode::DimMismatch, "query dim " + std::to_string(query.dim()) +
                                                ", index dim " + std::to_string(dim_));
    }
    const double qn = std::sqrt(dot(query.values, query.values));
    if (qn == 0.0) throw Error(ErrorCode::ZeroVector, "zero query vector");
    scored.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (filter && !filter(ids_[i])) continue;
        const double s = dot(query.values, vectors_[i].values) / (qn * norms_[i]);
        scored.push_back({ids_[i], std::clamp(s, -1.0, 1.0)});
    }
    auto better = [](const ScoredId& a, const ScoredId& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    };
    if (scored.size() > k) {
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k),
                          scored.end(), better);
        scored.resize(k);
    } else {
        std::sort(scored.begin(), scored.end(), better);
    }
    return scored;
}

const EmbeddingVector* VectorIndex::get(NodeId id) const {
    auto it = positions_.find(id);
    return it == positions_.end() ? nullptr : &vectors_[it->second];
}

}  // namespace apex
