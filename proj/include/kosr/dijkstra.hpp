#pragma once

// Plain label-setting searches: the all-distances reference used by oracles,
// the per-query distance-to-destination table of the -Dij engines, and the
// from-scratch x-th nearest neighbor search.

#include <algorithm>
#include <functional>
#include <optional>
#include <queue>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kosr/graph.hpp"
#include "kosr/neighbors.hpp"

namespace kosr {

enum class Direction { forward, backward };

class DistanceTable {
public:
    DistanceTable() = default;
    explicit DistanceTable(VertexId n) : dist_(n, kUnset) {}

    std::optional<Cost> at(VertexId v) const {
        if (dist_[v] == kUnset) return std::nullopt;
        return dist_[v];
    }
    bool reached(VertexId v) const { return dist_[v] != kUnset; }
    VertexId size() const { return static_cast<VertexId>(dist_.size()); }

private:
    template <class Visit>
    friend DistanceTable dijkstra_search(const Graph&, VertexId, Direction, Visit&&);

    static constexpr Cost kUnset = -1;
    std::vector<Cost> dist_;
};

using QueueItem = std::pair<Cost, VertexId>;
using MinQueue = std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>>;

/// Settles vertices in (distance, id) order. `visit(v, d)` is called once per
/// settled vertex and returns false to stop the search early.
template <class Visit>
DistanceTable dijkstra_search(const Graph& g, VertexId source, Direction dir, Visit&& visit) {
    DistanceTable table(g.vertex_count());
    std::vector<Cost> tentative(g.vertex_count(), DistanceTable::kUnset);
    MinQueue queue;
    tentative[source] = 0;
    queue.emplace(0, source);
    while (!queue.empty()) {
        const auto [d, u] = queue.top();
        queue.pop();
        if (table.dist_[u] != DistanceTable::kUnset || d != tentative[u]) continue;
        table.dist_[u] = d;
        if (!visit(u, d)) break;
        const auto arcs = dir == Direction::forward ? g.out_arcs(u) : g.in_arcs(u);
        for (const auto& a : arcs) {
            if (a.target == u) continue;
            const Cost nd = d + a.weight;
            if (tentative[a.target] == DistanceTable::kUnset || nd < tentative[a.target]) {
                tentative[a.target] = nd;
                queue.emplace(nd, a.target);
            }
        }
    }
    return table;
}

inline DistanceTable dijkstra_distances(const Graph& g, VertexId source, Direction dir = Direction::forward) {
    return dijkstra_search(g, source, dir, [](VertexId, Cost) { return true; });
}

/// The first `count` members of c by (distance, id), found by a single search
/// that stops once the count-th member's distance is final.
inline std::vector<Neighbor> dijkstra_nearest_members(const Graph& g, const CategoryMap& cm, VertexId v,
                                                      CategoryId c, std::size_t count,
                                                      const CandidateFilter& filter = {}) {
    std::vector<Neighbor> found;
    if (count == 0) return found;
    (void)cm.members(c);
    std::optional<Cost> cutoff;
    dijkstra_search(g, v, Direction::forward, [&](VertexId u, Cost d) {
        if (cutoff && d > *cutoff) return false;
        if (cm.contains(c, u) && (!filter || filter(c, u))) {
            found.push_back({u, d});
            if (!cutoff && found.size() == count) cutoff = d;
        }
        return true;
    });
    std::sort(found.begin(), found.end());
    if (found.size() > count) found.resize(count);
    return found;
}

/// x-th nearest member of c from v by a from-scratch search.
inline std::optional<Neighbor> dijkstra_nn(const Graph& g, const CategoryMap& cm, VertexId v, CategoryId c,
                                           std::size_t rank, const CandidateFilter& filter = {}) {
    if (rank == 0) throw Error(ErrorCode::invalid_argument, "rank must be >= 1");
    const auto found = dijkstra_nearest_members(g, cm, v, c, rank, filter);
    if (found.size() < rank) return std::nullopt;
    return found[rank - 1];
}

/// NN source for the -Dij engine variants: each uncached request reruns the
/// search from scratch.
class DijkstraNearestNeighbors final : public NearestNeighborFinder {
public:
    DijkstraNearestNeighbors(const Graph& g, const CategoryMap& cm, CandidateFilter filter = {})
        : graph_(g), categories_(cm), filter_(std::move(filter)) {}

    std::optional<Neighbor> find_nn(VertexId v, CategoryId c, std::size_t rank) override {
        if (rank == 0) throw Error(ErrorCode::invalid_argument, "rank must be >= 1");
        auto& cached = cache_[key(v, c)];
        if (cached.neighbors.size() >= rank) return cached.neighbors[rank - 1];
        if (cached.exhausted) return std::nullopt;
        ++nn_queries_;
        cached.neighbors = dijkstra_nearest_members(graph_, categories_, v, c, rank, filter_);
        if (cached.neighbors.size() < rank) {
            cached.exhausted = true;
            return std::nullopt;
        }
        return cached.neighbors[rank - 1];
    }

    std::uint64_t nn_queries() const override { return nn_queries_; }

private:
    struct Cached {
        std::vector<Neighbor> neighbors;
        bool exhausted = false;
    };
    static std::uint64_t key(VertexId v, CategoryId c) { return (std::uint64_t{v} << 32) | c; }

    const Graph& graph_;
    const CategoryMap& categories_;
    CandidateFilter filter_;
    std::unordered_map<std::uint64_t, Cached> cache_;
    std::uint64_t nn_queries_ = 0;
};

}  // namespace kosr
