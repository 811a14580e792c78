#include <doctest.h>

#include <cmath>
#include <thread>

#include "apex/resolver.hpp"
#include "fixtures.hpp"

using namespace apex;

namespace {

// Fixed vectors for chosen texts; everything else falls back to hashing.
class TableEmbedder final : public EmbeddingProvider {
public:
    explicit TableEmbedder(std::map<std::string, std::vector<float>> table) : table_(std::move(table)) {}
    EmbeddingVector embed(std::string_view text) const override {
        auto it = table_.find(std::string(text));
        if (it != table_.end()) return {it->second};
        auto v = fallback_.embed(text);
        v.values.resize(3);
        v.values[2] += 0.001f;  // keep it non-zero
        return v;
    }
    std::size_t dim() const override { return 3; }

private:
    std::map<std::string, std::vector<float>> table_;
    HashingEmbedder fallback_{64};
};

std::vector<float> at_cos(double c, int axis) {
    std::vector<float> v{static_cast<float>(c), 0.0f, 0.0f};
    v[static_cast<std::size_t>(axis)] = static_cast<float>(std::sqrt(1.0 - c * c));
    return v;
}

}  // namespace

TEST_CASE("cold start creates, repeat hits the cache") {
    Memory mem;
    EntityResolver r(mem);
    auto first = r.resolve("pandas dataframe", NodeKind::Entity, "data");
    CHECK(first.action == ResolutionAction::CreatedNew);
    CHECK(r.pending() == 1);
    r.flush();
    CHECK(r.pending() == 0);
    CHECK(mem.graph().contains(first.node));
    const auto& n = mem.graph().node(first.node);
    CHECK(n.title == "pandas dataframe");
    CHECK(n.domain_tag == "data");
    const auto misses = r.cache_misses();
    auto second = r.resolve("pandas dataframe", NodeKind::Entity, "data");
    CHECK(second.node == first.node);
    CHECK(r.cache_hits() == 1);
    CHECK(r.cache_misses() == misses);
    CHECK_THROWS_AS(r.resolve("", NodeKind::Entity, "data"), Error);
    CHECK_THROWS_AS(r.resolve("x", NodeKind::Experience, "data"), Error);
}

TEST_CASE("matching is restricted to kind and domain") {
    Memory mem;
    EntityResolver r(mem);
    auto a = r.resolve("lionel messi", NodeKind::Entity, "sports");
    auto b = r.resolve("lionel messi", NodeKind::Entity, "business");
    CHECK(a.node != b.node);
    r.flush();
    EntityResolver fresh(mem);
    auto c = fresh.resolve("lionel messi", NodeKind::Entity, "sports");
    CHECK(c.action == ResolutionAction::MatchedExisting);
    CHECK(c.node == a.node);
    CHECK(c.score >= fresh.config().tau_r);
}

TEST_CASE("near ties inside the ambiguity band go to the disambiguator") {
    auto emb = std::make_shared<TableEmbedder>(std::map<std::string, std::vector<float>>{
        {"query", {1.0f, 0.0f, 0.0f}}, {"alpha", at_cos(0.91, 1)}, {"beta", at_cos(0.90, 2)}});
    Memory mem(emb);
    auto a = mem.graph().add_node(fx::node(NodeKind::Entity, "alpha", "", "d"));
    auto b = mem.graph().add_node(fx::node(NodeKind::Entity, "beta", "", "d"));
    std::vector<ResolutionCandidate> seen;
    EntityResolver r(mem, {}, [&](std::string_view, const std::vector<ResolutionCandidate>& c) {
        seen = c;
        return DisambiguationChoice{b, "picked the second"};
    });
    auto out = r.resolve("query", NodeKind::Entity, "d");
    CHECK(out.action == ResolutionAction::Disambiguated);
    CHECK(out.node == b);
    REQUIRE(seen.size() == 2);
    CHECK(seen[0].id == a);

    // Outside the band the top candidate wins outright.
    EntityResolver narrow(mem, {.tau_r = 0.85, .delta_amb = 0.005});
    auto m = narrow.resolve("query", NodeKind::Entity, "d");
    CHECK(m.action == ResolutionAction::MatchedExisting);
    CHECK(m.node == a);

    // A failing hook falls back to creating a node.
    EntityResolver failing(mem, {}, [](std::string_view, const std::vector<ResolutionCandidate>&) -> DisambiguationChoice {
        throw std::runtime_error("hook down");
    });
    auto f = failing.resolve("query", NodeKind::Entity, "d");
    CHECK(f.action == ResolutionAction::CreatedNew);
}

TEST_CASE("lexical disambiguator prefers overlap, then lowest id") {
    std::vector<ResolutionCandidate> c{{NodeId{5}, "red apple", 0.9}, {NodeId{3}, "green pear", 0.9},
                                       {NodeId{7}, "apple pie", 0.9}};
    CHECK(lexical_disambiguator("apple", c).chosen == NodeId{5});
    CHECK(lexical_disambiguator("banana", c).chosen == NodeId{3});
}

TEST_CASE("synonymous mentions collapse to one operation node") {
    std::map<std::string, std::vector<float>> table;
    const std::vector<std::string> mentions{"group rows", "group the rows", "rows grouped", "grouping rows",
                                            "group all rows"};
    for (std::size_t i = 0; i < mentions.size(); ++i) table[mentions[i]] = at_cos(0.999 - 0.001 * i, 1);
    Memory mem(std::make_shared<TableEmbedder>(table));
    EntityResolver r(mem);
    const auto before = mem.graph().nodes_of_kind(NodeKind::Operation).size();
    for (const auto& m : mentions) r.resolve(m, NodeKind::Operation, "ignored");
    r.flush();
    CHECK(mem.graph().nodes_of_kind(NodeKind::Operation).size() == before + 1);
}

TEST_CASE("resolving N times creates at most one node; cache does not change outcomes") {
    std::mt19937_64 rng(4);
    const std::vector<std::string> vocab{"alpha", "beta", "gamma", "delta", "omega", "sigma"};
    std::vector<std::tuple<std::string, NodeKind, std::string>> requests;
    for (int i = 0; i < 300; ++i) {
        std::string m = vocab[rng() % vocab.size()] + " " + vocab[rng() % vocab.size()];
        requests.emplace_back(m, rng() % 2 ? NodeKind::Entity : NodeKind::Operation, rng() % 2 ? "x" : "y");
    }
    auto run = [&](bool cache) {
        Memory mem;
        ResolverConfig cfg;
        cfg.cache_enabled = cache;
        cfg.cache_capacity = 8;  // force evictions
        EntityResolver r(mem, cfg);
        std::vector<std::uint64_t> ids;
        for (std::size_t i = 0; i < requests.size(); ++i) {
            auto& [m, k, d] = requests[i];
            ids.push_back(r.resolve(m, k, d).node.value);
            if (i % 17 == 0) r.flush();
        }
        r.flush();
        return std::make_pair(ids, mem.graph().node_count());
    };
    const auto with = run(true);
    const auto without = run(false);
    CHECK(with == without);
    Memory mem;
    EntityResolver r(mem);
    for (int i = 0; i < 10; ++i) r.resolve("same mention", NodeKind::Entity, "d");
    r.flush();
    CHECK(mem.graph().nodes_of_kind(NodeKind::Entity).size() == 1);
}

TEST_CASE("resolve_operation is exact, probe is read only") {
    Memory mem;
    EntityResolver r(mem);
    auto a = r.resolve_operation("op:aggregation");
    auto b = r.resolve_operation("op:aggregation");
    CHECK(a.node == b.node);
    CHECK_THROWS_AS(r.resolve_operation("aggregation"), Error);
    r.flush();
    CHECK(mem.graph().node(a.node).payload == "op:aggregation");
    const auto nodes = mem.graph().node_count();
    CHECK_FALSE(r.probe("completely unseen thing", NodeKind::Entity, "d").has_value());
    CHECK(r.pending() == 0);
    CHECK(mem.graph().node_count() == nodes);
    auto p = r.probe("aggregation", NodeKind::Operation, "d");
    REQUIRE(p.has_value());
    CHECK(p->node == a.node);
}

TEST_CASE("resolution follows entity versions") {
    Memory mem;
    EntityResolver r(mem);
    auto v1 = r.resolve("payments api", NodeKind::Entity, "ops");
    r.flush();
    auto v2 = mem.graph().version_entity(v1.node, fx::node(NodeKind::Entity, "payments api v2", "", "ops"));
    CHECK(r.resolve("payments api", NodeKind::Entity, "ops").node == v2);
}

TEST_CASE("concurrent resolves stay consistent") {
    Memory mem;
    EntityResolver r(mem);
    std::vector<std::thread> pool;
    std::vector<std::vector<NodeId>> seen(4);
    for (int t = 0; t < 4; ++t) {
        pool.emplace_back([&, t] {
            for (int i = 0; i < 50; ++i) {
                seen[static_cast<std::size_t>(t)].push_back(
                    r.resolve("mention " + std::to_string(i % 10), NodeKind::Entity, "d").node);
            }
        });
    }
    for (auto& th : pool) th.join();
    for (int t = 1; t < 4; ++t) CHECK(seen[static_cast<std::size_t>(t)] == seen[0]);
    mem.write([&](Memory&) { r.flush(); });
    CHECK(mem.graph().nodes_of_kind(NodeKind::Entity).size() == 10);
}
