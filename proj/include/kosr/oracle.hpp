#pragma once

// Reference fixtures, seeded random instances, synthetic graphs and the
// enumeration oracle that the engines are checked against.

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kosr/dijkstra.hpp"
#include "kosr/engines.hpp"
#include "kosr/graph.hpp"

namespace kosr {

struct Fixture {
    Graph graph;
    CategoryMap categories{0};
    VertexNames names;

    VertexId vertex(std::string_view name) const {
        auto v = names.find(name);
        if (!v) throw Error(ErrorCode::unknown_vertex, std::string(name));
        return *v;
    }
    CategoryId category(std::string_view name) const { return categories.require(name); }
};

/// The running example road network, as the complete digraph whose arc
/// weights are its pairwise shortest distances. Vertex ids follow the order
/// s, a, b, c, d, e, f, t.
inline Fixture fixture_fig1() {
    static constexpr std::array<const char*, 8> kNames{"s", "a", "b", "c", "d", "e", "f", "t"};
    static constexpr Cost kDist[8][8] = {
        {0, 8, 13, 10, 13, 14, 24, 17},  {10, 0, 5, 20, 8, 6, 16, 12},  {5, 13, 0, 15, 3, 17, 27, 7},
        {10, 18, 5, 0, 3, 17, 27, 7},    {29, 37, 24, 19, 0, 14, 24, 4}, {32, 40, 27, 22, 3, 0, 10, 7},
        {28, 36, 23, 18, 16, 13, 0, 3},  {25, 33, 20, 15, 13, 10, 20, 0},
    };
    Fixture fx;
    for (const char* n : kNames) fx.names.intern(n);
    std::vector<ArcRecord> arcs;
    for (VertexId u = 0; u < 8; ++u)
        for (VertexId v = 0; v < 8; ++v)
            if (u != v) arcs.push_back({u, v, kDist[u][v]});
    fx.graph = Graph::from_arcs(8, arcs, true);
    fx.categories = CategoryMap(8);
    const std::array<std::pair<const char*, std::array<const char*, 2>>, 3> cats{{
        {"MA", {"a", "c"}}, {"RE", {"b", "e"}}, {"CI", {"d", "f"}}}};
    for (const auto& [cat, members] : cats) {
        const CategoryId c = fx.categories.add_category(cat);
        for (const char* m : members) fx.categories.insert(fx.vertex(m), c);
    }
    return fx;
}

struct RandomInstance {
    Graph graph;
    CategoryMap categories{0};
    Query query;
};

struct RandomInstanceParams {
    VertexId max_vertices = 60;
    std::size_t max_categories = 4;
    std::size_t max_members = 5;
    std::size_t max_k = 5;
};

/// Sparse random digraph (weights 1..100, usually with a Hamiltonian ring)
/// with a few small categories and a query over them.
inline RandomInstance random_instance(std::uint64_t seed, RandomInstanceParams p = {}) {
    std::mt19937_64 rng(seed);
    auto uniform = [&](std::uint64_t lo, std::uint64_t hi) {
        return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
    };
    const auto n = static_cast<VertexId>(uniform(std::min<VertexId>(6, p.max_vertices), p.max_vertices));
    std::vector<ArcRecord> arcs;
    if (uniform(0, 9) < 7)
        for (VertexId v = 0; v < n; ++v) arcs.push_back({v, (v + 1) % n, static_cast<Cost>(uniform(1, 100))});
    const auto extra = uniform(n, 3 * static_cast<std::uint64_t>(n));
    for (std::uint64_t i = 0; i < extra; ++i)
        arcs.push_back({static_cast<VertexId>(uniform(0, n - 1)), static_cast<VertexId>(uniform(0, n - 1)),
                        static_cast<Cost>(uniform(1, 100))});

    RandomInstance inst;
    inst.graph = Graph::from_arcs(n, arcs, true);
    inst.categories = CategoryMap(n);
    const auto num_categories = uniform(1, p.max_categories);
    for (std::size_t c = 0; c < num_categories; ++c) {
        const CategoryId id = inst.categories.add_category(generated_category_name(c));
        const auto size = uniform(1, p.max_members);
        while (inst.categories.members(id).size() < size) inst.categories.insert(static_cast<VertexId>(uniform(0, n - 1)), id);
    }
    inst.query.source = static_cast<VertexId>(uniform(0, n - 1));
    inst.query.target = static_cast<VertexId>(uniform(0, n - 1));
    const auto length = uniform(1, num_categories);
    for (std::size_t i = 0; i < length; ++i)
        inst.query.categories.push_back(static_cast<CategoryId>(uniform(0, num_categories - 1)));
    inst.query.k = uniform(1, p.max_k);
    return inst;
}

/// Brute-force reference: per-source Dijkstra tables, exhaustive witness
/// enumeration, and exact best completions of partial witnesses.
class BruteForce {
public:
    static constexpr std::uint64_t kEnumerationLimit = 1'000'000;

    BruteForce(const Graph& g, const CategoryMap& cm) : graph_(g), categories_(cm) {}

    std::optional<Cost> distance(VertexId u, VertexId v) {
        auto [it, inserted] = tables_.try_emplace(u);
        if (inserted) it->second = dijkstra_distances(graph_, u);
        return it->second.at(v);
    }

    /// Every feasible witness, sorted by (cost, vertex sequence), first k kept.
    std::vector<Witness> topk(const Query& q) {
        if (q.k == 0) return {};
        std::uint64_t product = 1;
        for (CategoryId c : q.categories) {
            product *= std::max<std::size_t>(1, categories_.members(c).size());
            if (product > kEnumerationLimit) throw Error(ErrorCode::enumeration_limit, "witness space too large");
        }
        std::vector<Witness> all;
        std::vector<VertexId> prefix{q.source};
        enumerate(q, prefix, 0, all);
        std::sort(all.begin(), all.end(), [](const Witness& a, const Witness& b) {
            return a.cost != b.cost ? a.cost < b.cost : a.vertices < b.vertices;
        });
        if (all.size() > q.k) all.resize(q.k);
        return all;
    }

    /// Least cost of any feasible witness extending `prefix` (which starts at
    /// the source and has passed prefix.size()-1 stages).
    std::optional<Cost> best_completion(const Query& q, std::span<const VertexId> prefix) {
        if (memo_target_ != q.target || memo_categories_ != q.categories) {
            memo_.clear();
            memo_target_ = q.target;
            memo_categories_ = q.categories;
        }
        Cost base = 0;
        for (std::size_t i = 0; i + 1 < prefix.size(); ++i) {
            auto d = distance(prefix[i], prefix[i + 1]);
            if (!d) return std::nullopt;
            base += *d;
        }
        auto rest = remaining(q, prefix.back(), prefix.size() - 1);
        if (!rest) return std::nullopt;
        return base + *rest;
    }

private:
    void enumerate(const Query& q, std::vector<VertexId>& prefix, Cost cost, std::vector<Witness>& out) {
        const std::size_t stage = prefix.size();
        if (stage == q.categories.size() + 2) {
            out.push_back({prefix, cost});
            return;
        }
        auto step = [&](VertexId next) {
            auto d = distance(prefix.back(), next);
            if (!d) return;
            prefix.push_back(next);
            enumerate(q, prefix, cost + *d, out);
            prefix.pop_back();
        };
        if (stage <= q.categories.size()) {
            for (VertexId u : categories_.members(q.categories[stage - 1])) step(u);
        } else {
            step(q.target);
        }
    }

    /// Cheapest cost from v (having finished `depth` stages) to t through the remaining stages.
    std::optional<Cost> remaining(const Query& q, VertexId v, std::size_t depth) {
        const std::size_t stages = q.categories.size() + 1;
        if (depth == stages) return Cost{0};
        const auto key = std::make_pair(v, depth);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        std::optional<Cost> best;
        auto consider = [&](VertexId u) {
            auto d = distance(v, u);
            if (!d) return;
            auto r = remaining(q, u, depth + 1);
            if (r && (!best || *d + *r < *best)) best = *d + *r;
        };
        if (depth + 1 == stages) {
            consider(q.target);
        } else {
            for (VertexId u : categories_.members(q.categories[depth])) consider(u);
        }
        memo_[key] = best;
        return best;
    }

    const Graph& graph_;
    const CategoryMap& categories_;
    std::map<VertexId, DistanceTable> tables_;
    std::map<std::pair<VertexId, std::size_t>, std::optional<Cost>> memo_;
    VertexId memo_target_ = kNoVertex;
    std::vector<CategoryId> memo_categories_;
};

inline std::vector<Witness> oracle_topk(const Graph& g, const CategoryMap& cm, const Query& q) {
    return BruteForce(g, cm).topk(q);
}

/// Counter bounds for PruningKOSR: examined routes ≤ M, extended routes ≤ N.
struct SearchBounds {
    std::uint64_t examined;
    std::uint64_t extended;
};

inline SearchBounds pruning_bounds(const CategoryMap& cm, const Query& q) {
    std::vector<std::uint64_t> sizes{1};
    for (CategoryId c : q.categories) sizes.push_back(cm.members(c).size());
    sizes.push_back(1);
    const std::uint64_t k1 = q.k - 1;
    SearchBounds b{0, 0};
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        b.examined += sizes[i] * sizes[i + 1];
        b.extended += sizes[i];
    }
    for (std::size_t i = 2; i < sizes.size(); ++i) b.examined += k1 * sizes[i];
    b.extended += k1 * q.categories.size();
    return b;
}

/// Undirected rows x cols grid with random integer weights in [1, max_weight].
inline Graph grid_graph(VertexId rows, VertexId cols, std::uint64_t seed, Cost max_weight = 100) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Cost> weight(1, max_weight);
    std::vector<ArcRecord> arcs;
    auto id = [&](VertexId r, VertexId c) { return r * cols + c; };
    for (VertexId r = 0; r < rows; ++r)
        for (VertexId c = 0; c < cols; ++c) {
            if (c + 1 < cols) arcs.push_back({id(r, c), id(r, c + 1), weight(rng)});
            if (r + 1 < rows) arcs.push_back({id(r, c), id(r + 1, c), weight(rng)});
        }
    return Graph::from_arcs(rows * cols, arcs, false);
}

/// Undirected random graph grown by preferential attachment: every new vertex
/// links to `links` earlier vertices chosen proportionally to degree.
inline Graph random_graph(VertexId n, std::size_t links, std::uint64_t seed, Cost max_weight = 100) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Cost> weight(1, max_weight);
    std::vector<ArcRecord> arcs;
    std::vector<VertexId> endpoints;
    for (VertexId v = 1; v < n; ++v) {
        const std::size_t count = std::min<std::size_t>(links, v);
        for (std::size_t i = 0; i < count; ++i) {
            VertexId u = endpoints.empty() ? 0
                                           : endpoints[std::uniform_int_distribution<std::size_t>(0, endpoints.size() - 1)(rng)];
            if (u == v) u = 0;
            arcs.push_back({v, u, weight(rng)});
            endpoints.push_back(u);
            endpoints.push_back(v);
        }
    }
    return Graph::from_arcs(n, arcs, false);
}

}  // namespace kosr
