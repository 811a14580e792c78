#include <doctest.h>

#include <cmath>

#include "apex/embedding.hpp"
#include "fixtures.hpp"

using namespace apex;

namespace {

EmbeddingVector vec(std::vector<float> v) { return {std::move(v)}; }

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("cosine examples") {
    CHECK(cosine(vec({1, 0, 0}), vec({1, 0, 0})) == doctest::Approx(1.0));
    CHECK(cosine(vec({1, 0, 0}), vec({0, 1, 0})) == doctest::Approx(0.0));
    CHECK(cosine(vec({1, 1, 0}), vec({1, 0, 0})) == doctest::Approx(0.70710678).epsilon(1e-8));
    CHECK(code_of([] { cosine(vec({1, 0}), vec({1, 0, 0})); }) == ErrorCode::DimMismatch);
    CHECK(code_of([] { cosine(vec({0, 0}), vec({1, 0})); }) == ErrorCode::ZeroVector);
}

TEST_CASE("hashing embedder is deterministic, normalised and overlap-monotone") {
    HashingEmbedder e;
    CHECK(e.dim() == kDefaultEmbeddingDim);
    const auto a = e.embed("group csv by category");
    CHECK(a == e.embed("group csv by category"));
    CHECK(cosine(a, a) == doctest::Approx(1.0).epsilon(1e-9));
    double norm = 0.0;
    for (float x : a.values) norm += static_cast<double>(x) * x;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-6));
    const auto four = e.embed("group csv by category today");
    const auto base = e.embed("group csv by category yesterday");
    const auto none = e.embed("plot revenue per quarter now");
    CHECK(cosine(base, four) > cosine(base, none));
    CHECK(code_of([&] { e.embed(""); }) == ErrorCode::EmptyText);
    CHECK(code_of([&] { e.embed("   "); }) == ErrorCode::EmptyText);
    CHECK(tokenize("Hello, World!") == std::vector<std::string>{"hello", "world"});
}

TEST_CASE("index search equals a brute-force sort") {
    std::mt19937_64 rng(11);
    std::normal_distribution<float> gauss;
    for (int round = 0; round < 20; ++round) {
        VectorIndex idx;
        std::vector<std::pair<NodeId, EmbeddingVector>> all;
        const int n = 1 + static_cast<int>(rng() % 300);
        for (int i = 0; i < n; ++i) {
            EmbeddingVector v;
            for (int d = 0; d < 16; ++d) v.values.push_back(gauss(rng));
            // Duplicate some vectors to exercise id tie-breaking.
            if (i > 0 && rng() % 5 == 0) v = all[rng() % all.size()].second;
            all.emplace_back(NodeId{static_cast<std::uint64_t>(i + 1)}, v);
            idx.insert(all.back().first, v);
        }
        EmbeddingVector q;
        for (int d = 0; d < 16; ++d) q.values.push_back(gauss(rng));
        std::vector<ScoredId> oracle;
        for (auto& [id, v] : all) oracle.push_back({id, cosine(q, v)});
        std::stable_sort(oracle.begin(), oracle.end(), [](const ScoredId& a, const ScoredId& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.id < b.id;
        });
        const auto got = idx.search(q, all.size() + 5);
        REQUIRE(got.size() == oracle.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].id == oracle[i].id);
            CHECK(got[i].score == doctest::Approx(oracle[i].score).epsilon(1e-12));
        }
        const std::size_t k = 1 + rng() % 10;
        const auto top = idx.search(q, k);
        CHECK(top.size() == std::min<std::size_t>(k, all.size()));
        for (std::size_t i = 0; i < top.size(); ++i) CHECK(top[i].id == oracle[i].id);
        const auto self = idx.search(all[0].second, 1);
        CHECK(self[0].score == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("index filter applies before ranking; empty index and bad k") {
    VectorIndex idx;
    CHECK(idx.search(vec({1, 0}), 3).empty());
    idx.insert(NodeId{1}, vec({1, 0}));
    idx.insert(NodeId{2}, vec({0.9f, 0.1f}));
    idx.insert(NodeId{3}, vec({0, 1}));
    auto r = idx.search(vec({1, 0}), 1, [](NodeId id) { return id.value != 1; });
    REQUIRE(r.size() == 1);
    CHECK(r[0].id == NodeId{2});
    CHECK(code_of([&] { idx.search(vec({1, 0}), 0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { idx.search(vec({1, 0, 0}), 1); }) == ErrorCode::DimMismatch);
    CHECK(code_of([&] { idx.insert(NodeId{4}, vec({1, 0, 0})); }) == ErrorCode::DimMismatch);
}
