#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>

#include "kosr/types.hpp"

namespace kosr {

/// A category member together with its distance (or estimated cost) from the
/// query vertex. Ordered by (cost, vertex id), the tie order used everywhere.
struct Neighbor {
    VertexId vertex = kNoVertex;
    Cost cost = 0;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
    friend auto operator<=>(const Neighbor& a, const Neighbor& b) {
        if (auto c = a.cost <=> b.cost; c != 0) return c;
        return a.vertex <=> b.vertex;
    }
};

/// Optional preference hook: a member is eligible as a neighbor in category c
/// only when the filter returns true.
using CandidateFilter = std::function<bool(CategoryId, VertexId)>;

/// Incremental x-th nearest neighbor source. Implementations cache every
/// neighbor they produce; only requests that need new work count as NN queries.
class NearestNeighborFinder {
public:
    virtual ~NearestNeighborFinder() = default;

    /// x-th (1-based) nearest member of category c from v, or nothing when
    /// fewer than x members are reachable.
    virtual std::optional<Neighbor> find_nn(VertexId v, CategoryId c, std::size_t rank) = 0;

    virtual std::uint64_t nn_queries() const = 0;
};

}  // namespace kosr
