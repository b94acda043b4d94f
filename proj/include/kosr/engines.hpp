#pragma once

// Top-k optimal sequenced route engines.
//
// All three engines walk the same generation tree: a partial witness ending at
// the x-th neighbor of its predecessor spawns (a) its extension through the
// nearest neighbor in the next category and (b) its sibling through the
// (x+1)-th neighbor. KPNE examines everything in cost order; PruningKOSR parks
// partial witnesses that reach an already-extended (vertex, length) slot until
// the dominating witness completes; StarKOSR additionally orders by
// cost + dis(last, t) and picks siblings by that estimate.

#include <chrono>
#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "kosr/category_index.hpp"
#include "kosr/dijkstra.hpp"
#include "kosr/graph.hpp"
#include "kosr/hop_labeling.hpp"
#include "kosr/neighbors.hpp"

namespace kosr {

enum class Algorithm { kpne, pruning, star };
enum class NeighborMethod { labels, dijkstra };

struct EngineKind {
    Algorithm algorithm = Algorithm::star;
    NeighborMethod method = NeighborMethod::labels;

    friend bool operator==(const EngineKind&, const EngineKind&) = default;
};

inline std::string to_string(EngineKind e) {
    std::string name = e.algorithm == Algorithm::kpne ? "kpne" : e.algorithm == Algorithm::pruning ? "pk" : "sk";
    if (e.method == NeighborMethod::dijkstra) name += "-dij";
    return name;
}

inline std::optional<EngineKind> parse_engine(std::string_view name) {
    EngineKind e;
    if (name.ends_with("-dij")) {
        e.method = NeighborMethod::dijkstra;
        name.remove_suffix(4);
    }
    if (name == "kpne") e.algorithm = Algorithm::kpne;
    else if (name == "pk") e.algorithm = Algorithm::pruning;
    else if (name == "sk") e.algorithm = Algorithm::star;
    else return std::nullopt;
    return e;
}

inline std::vector<EngineKind> all_engines() {
    std::vector<EngineKind> out;
    for (auto m : {NeighborMethod::labels, NeighborMethod::dijkstra})
        for (auto a : {Algorithm::kpne, Algorithm::pruning, Algorithm::star}) out.push_back({a, m});
    return out;
}

struct Query {
    VertexId source = 0;
    VertexId target = 0;
    std::vector<CategoryId> categories;
    std::size_t k = 1;
};

struct Witness {
    std::vector<VertexId> vertices;
    Cost cost = 0;

    friend bool operator==(const Witness&, const Witness&) = default;
};

struct QueryStats {
    std::uint64_t examined_routes = 0;  // frontier extractions
    std::uint64_t extended_routes = 0;  // extractions extended via the next category
    std::uint64_t nn_queries = 0;       // uncached nearest-neighbor computations
    std::chrono::nanoseconds runtime{0};
    std::vector<Cost> result_costs;
    bool timed_out = false;
};

struct QueryResult {
    std::vector<Witness> witnesses;
    QueryStats stats;
};

/// Observation hook for traces and property checks.
struct SearchEvent {
    enum class Kind { inserted, extracted, parked, reinserted, emitted };

    Kind kind;
    std::vector<VertexId> witness;
    Cost cost = 0;
    Cost key = 0;
    std::optional<std::size_t> rank;  // empty: no sibling left to generate
    std::vector<VertexId> dominating;  // parked only
    Cost dominating_key = 0;
};

struct QueryOptions {
    CandidateFilter filter;
    std::function<void(const SearchEvent&)> observer;
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

/// Borrowed, read-only indexes a query runs against. Label engines need
/// `labels` and `inverted`; -Dij engines need `graph`. `categories` is always required.
struct IndexView {
    const Graph* graph = nullptr;
    const CategoryMap* categories = nullptr;
    const LabelIndex* labels = nullptr;
    const InvertedLabelIndex* inverted = nullptr;
};

struct EstimatedNeighbor {
    VertexId vertex;
    Cost distance;  // dis(v, member)
    Cost estimate;  // dis(v, member) + dis(member, t)
};

/// x-th nearest estimated neighbor of v in c toward a fixed destination,
/// pulling plain neighbors from `nn` only until the queue head is final.
class EstimatedNeighborFinder {
public:
    using DistanceToTarget = std::function<std::optional<Cost>(VertexId)>;

    EstimatedNeighborFinder(NearestNeighborFinder& nn, DistanceToTarget to_target)
        : nn_(nn), to_target_(std::move(to_target)) {}

    std::optional<EstimatedNeighbor> find_nen(VertexId v, CategoryId c, std::size_t rank) {
        if (rank == 0) throw Error(ErrorCode::invalid_argument, "rank must be >= 1");
        auto& cur = cursors_[(std::uint64_t{v} << 32) | c];
        while (cur.produced.size() < rank) {
            for (;;) {
                std::optional<Neighbor> next;
                if (!cur.nn_exhausted) {
                    next = nn_.find_nn(v, c, cur.fetched + 1);
                    cur.nn_exhausted = !next;
                }
                if (!cur.queue.empty() && (cur.nn_exhausted || next->cost > cur.queue.top().estimate)) break;
                if (cur.nn_exhausted) break;
                ++cur.fetched;
                if (auto h = to_target_(next->vertex)) cur.queue.push({next->vertex, next->cost, next->cost + *h});
            }
            if (cur.queue.empty()) return std::nullopt;
            cur.produced.push_back(cur.queue.top());
            cur.queue.pop();
        }
        return cur.produced[rank - 1];
    }

private:
    struct Later {
        bool operator()(const EstimatedNeighbor& a, const EstimatedNeighbor& b) const {
            return a.estimate != b.estimate ? a.estimate > b.estimate : a.vertex > b.vertex;
        }
    };
    struct Cursor {
        std::vector<EstimatedNeighbor> produced;
        std::priority_queue<EstimatedNeighbor, std::vector<EstimatedNeighbor>, Later> queue;
        std::size_t fetched = 0;
        bool nn_exhausted = false;
    };

    NearestNeighborFinder& nn_;
    DistanceToTarget to_target_;
    std::unordered_map<std::uint64_t, Cursor> cursors_;
};

namespace detail {

inline constexpr std::uint32_t kNoParent = 0xffffffffU;
inline constexpr std::uint32_t kNoRank = 0;

struct SearchNode {
    VertexId vertex;
    std::uint32_t parent;
    std::uint32_t rank;  // x: vertex is the x-th neighbor of its predecessor; kNoRank for '-'
    std::uint32_t depth;  // q, number of vertices minus one
    Cost cost;
    Cost key;
};

class SequencedRouteSearch {
public:
    SequencedRouteSearch(const IndexView& view, EngineKind engine, const Query& query, const QueryOptions& options)
        : view_(view), engine_(engine), query_(query), options_(options),
          frontier_(NodeAfter{this}) {
        validate();
        if (engine_.method == NeighborMethod::labels) {
            nn_ = std::make_unique<LabelNearestNeighbors>(*view_.labels, *view_.inverted, options_.filter);
        } else {
            nn_ = std::make_unique<DijkstraNearestNeighbors>(*view_.graph, *view_.categories, options_.filter);
        }
        nen_.emplace(*nn_, [this](VertexId v) { return to_target(v); });
    }

    QueryResult run() {
        const auto started = std::chrono::steady_clock::now();
        QueryResult result;
        run_loop(result);
        stats_.nn_queries = nn_->nn_queries() + destination_queries_;
        stats_.runtime = std::chrono::steady_clock::now() - started;
        for (const auto& w : result.witnesses) stats_.result_costs.push_back(w.cost);
        result.stats = stats_;
        return result;
    }

private:
    struct NodeAfter {
        const SequencedRouteSearch* search;
        bool operator()(std::uint32_t a, std::uint32_t b) const { return search->before(b, a); }
    };

    bool pruning() const { return engine_.algorithm != Algorithm::kpne; }
    bool star() const { return engine_.algorithm == Algorithm::star; }
    std::size_t final_depth() const { return query_.categories.size() + 1; }

    void validate() const {
        if (!view_.categories) throw Error(ErrorCode::invalid_argument, "category map required");
        if (engine_.method == NeighborMethod::labels && (!view_.labels || !view_.inverted))
            throw Error(ErrorCode::invalid_argument, "label engines need the label and inverted indexes");
        if (engine_.method == NeighborMethod::dijkstra && !view_.graph)
            throw Error(ErrorCode::invalid_argument, "-Dij engines need the graph");
        if (query_.k == 0) throw Error(ErrorCode::invalid_argument, "k must be >= 1");
        if (query_.categories.empty()) throw Error(ErrorCode::invalid_argument, "category sequence is empty");
        for (CategoryId c : query_.categories)
            if (c >= view_.categories->category_count())
                throw Error(ErrorCode::unknown_category, "category id " + std::to_string(c));
        const VertexId n = view_.categories->vertex_count();
        if (query_.source >= n) throw Error(ErrorCode::unknown_vertex, "source " + std::to_string(query_.source));
        if (query_.target >= n) throw Error(ErrorCode::unknown_vertex, "target " + std::to_string(query_.target));
    }

    std::optional<Cost> to_target(VertexId v) {
        if (engine_.method == NeighborMethod::dijkstra) {
            if (!target_table_) target_table_ = dijkstra_distances(*view_.graph, query_.target, Direction::backward);
            return target_table_->at(v);
        }
        auto [it, inserted] = target_cache_.try_emplace(v);
        if (inserted) it->second = dist(*view_.labels, v, query_.target);
        return it->second;
    }

    /// Leg from `from` into stage `stage` (1..|C|+1; the last stage is {t}).
    /// Returns (vertex, leg cost, ordering increment).
    struct Step {
        VertexId vertex;
        Cost leg;
        Cost key_increment;
    };

    std::optional<Step> next_step(VertexId from, std::size_t stage, std::size_t rank) {
        if (stage == final_depth()) {
            if (rank != 1) return std::nullopt;
            if (destination_asked_.insert(from).second) ++destination_queries_;
            const auto d = to_target(from);
            if (!d) return std::nullopt;
            return Step{query_.target, *d, *d};
        }
        const CategoryId c = query_.categories[stage - 1];
        if (star()) {
            const auto n = nen_->find_nen(from, c, rank);
            if (!n) return std::nullopt;
            return Step{n->vertex, n->distance, n->estimate};
        }
        const auto n = nn_->find_nn(from, c, rank);
        if (!n) return std::nullopt;
        return Step{n->vertex, n->cost, n->cost};
    }

    std::uint32_t add_node(std::uint32_t parent, const Step& step, std::uint32_t rank) {
        const SearchNode& p = nodes_[parent];
        // For A* ordering, p.key = p.cost + dis(p, t) while the increment already includes dis(child, t).
        const Cost base_key = star() ? p.cost : p.key;
        nodes_.push_back(SearchNode{step.vertex, parent, rank, p.depth + 1, p.cost + step.leg,
                                    base_key + step.key_increment});
        return static_cast<std::uint32_t>(nodes_.size() - 1);
    }

    void push(std::uint32_t id, SearchEvent::Kind kind = SearchEvent::Kind::inserted) {
        frontier_.push(id);
        notify(kind, id);
    }

    void run_loop(QueryResult& result) {
        Cost root_key = 0;
        if (star()) {
            const auto h = to_target(query_.source);
            if (!h) return;
            root_key = *h;
        }
        nodes_.push_back(SearchNode{query_.source, kNoParent, 1, 0, 0, root_key});
        push(0);

        std::set<std::vector<VertexId>> emitted;
        std::uint64_t iterations = 0;
        while (!frontier_.empty() && result.witnesses.size() < query_.k) {
            if (options_.deadline && (++iterations & 0xffU) == 0 &&
                std::chrono::steady_clock::now() > *options_.deadline) {
                stats_.timed_out = true;
                break;
            }
            const std::uint32_t id = frontier_.top();
            frontier_.pop();
            ++stats_.examined_routes;
            notify(SearchEvent::Kind::extracted, id);
            const SearchNode node = nodes_[id];

            if (node.depth == final_depth()) {
                auto vertices = witness(id);
                if (emitted.insert(vertices).second) {
                    result.witnesses.push_back(Witness{std::move(vertices), node.cost});
                    notify(SearchEvent::Kind::emitted, id);
                }
                if (pruning()) reconsider(id);
                continue;
            }

            bool extend = true;
            if (pruning()) {
                const auto slot = slot_key(node.vertex, node.depth + 1);
                auto it = dominating_.find(slot);
                if (it != dominating_.end()) {
                    extend = false;
                    parked_.try_emplace(slot, NodeAfter{this}).first->second.push(id);
                    notify_parked(id, it->second);
                } else {
                    dominating_.emplace(slot, id);
                }
            }
            if (extend) {
                ++stats_.extended_routes;
                if (auto step = next_step(node.vertex, node.depth + 1, 1)) push(add_node(id, *step, 1));
            }
            if (node.depth > 0 && node.rank != kNoRank) {
                const SearchNode& parent = nodes_[node.parent];
                if (auto step = next_step(parent.vertex, node.depth, node.rank + 1))
                    push(add_node(node.parent, *step, node.rank + 1));
            }
        }
    }

    /// After a result: every prefix that is still the dominating witness of its
    /// slot releases the cheapest parked witness and gives up the slot.
    void reconsider(std::uint32_t result_id) {
        std::vector<std::uint32_t> chain;
        for (std::uint32_t cur = result_id; cur != kNoParent; cur = nodes_[cur].parent) chain.push_back(cur);
        std::reverse(chain.begin(), chain.end());  // chain[i] has depth i
        for (std::size_t i = 1; i + 1 < chain.size(); ++i) {
            const auto slot = slot_key(nodes_[chain[i]].vertex, static_cast<std::uint32_t>(i + 1));
            auto it = dominating_.find(slot);
            if (it == dominating_.end() || witness(it->second) != witness(chain[i])) continue;
            auto pq = parked_.find(slot);
            if (pq != parked_.end() && !pq->second.empty()) {
                const std::uint32_t released = pq->second.top();
                pq->second.pop();
                nodes_[released].rank = kNoRank;
                push(released, SearchEvent::Kind::reinserted);
            }
            dominating_.erase(it);
        }
    }

    static std::uint64_t slot_key(VertexId v, std::uint32_t length) { return (std::uint64_t{v} << 32) | length; }

    std::vector<VertexId> witness(std::uint32_t id) const {
        std::vector<VertexId> w(nodes_[id].depth + 1);
        for (std::uint32_t cur = id; cur != kNoParent; cur = nodes_[cur].parent) w[nodes_[cur].depth] = nodes_[cur].vertex;
        return w;
    }

    /// Frontier order: key, then lexicographic witness.
    bool before(std::uint32_t a, std::uint32_t b) const {
        if (nodes_[a].key != nodes_[b].key) return nodes_[a].key < nodes_[b].key;
        return witness(a) < witness(b);
    }

    void notify(SearchEvent::Kind kind, std::uint32_t id) const {
        if (!options_.observer) return;
        SearchEvent e{kind, witness(id), nodes_[id].cost, nodes_[id].key, {}, {}, 0};
        if (nodes_[id].rank != kNoRank) e.rank = nodes_[id].rank;
        options_.observer(e);
    }

    void notify_parked(std::uint32_t id, std::uint32_t dominating_id) const {
        if (!options_.observer) return;
        SearchEvent e{SearchEvent::Kind::parked, witness(id), nodes_[id].cost, nodes_[id].key, {}, witness(dominating_id),
                      nodes_[dominating_id].key};
        if (nodes_[id].rank != kNoRank) e.rank = nodes_[id].rank;
        options_.observer(e);
    }

    using Frontier = std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, NodeAfter>;

    const IndexView& view_;
    EngineKind engine_;
    const Query& query_;
    const QueryOptions& options_;

    std::unique_ptr<NearestNeighborFinder> nn_;
    std::optional<EstimatedNeighborFinder> nen_;
    std::optional<DistanceTable> target_table_;
    std::unordered_map<VertexId, std::optional<Cost>> target_cache_;
    std::unordered_set<VertexId> destination_asked_;
    std::uint64_t destination_queries_ = 0;

    std::vector<SearchNode> nodes_;
    Frontier frontier_;
    std::unordered_map<std::uint64_t, std::uint32_t> dominating_;
    std::unordered_map<std::uint64_t, Frontier> parked_;
    QueryStats stats_;
};

}  // namespace detail

inline QueryResult run_query(const IndexView& view, EngineKind engine, const Query& query,
                             const QueryOptions& options = {}) {
    detail::SequencedRouteSearch search(view, engine, query, options);
    return search.run();
}

inline QueryResult kpne(const IndexView& view, const Query& query, NeighborMethod method = NeighborMethod::labels,
                        const QueryOptions& options = {}) {
    return run_query(view, {Algorithm::kpne, method}, query, options);
}

inline QueryResult pruning_kosr(const IndexView& view, const Query& query,
                                NeighborMethod method = NeighborMethod::labels, const QueryOptions& options = {}) {
    return run_query(view, {Algorithm::pruning, method}, query, options);
}

inline QueryResult star_kosr(const IndexView& view, const Query& query, NeighborMethod method = NeighborMethod::labels,
                             const QueryOptions& options = {}) {
    return run_query(view, {Algorithm::star, method}, query, options);
}

/// One-shot FindNEN over the label indexes with a fresh cursor store.
inline std::optional<EstimatedNeighbor> find_nen(const LabelIndex& labels, const InvertedLabelIndex& inverted,
                                                 VertexId v, CategoryId c, std::size_t rank, VertexId target) {
    LabelNearestNeighbors nn(labels, inverted);
    EstimatedNeighborFinder nen(nn, [&](VertexId u) { return dist(labels, u, target); });
    return nen.find_nen(v, c, rank);
}

}  // namespace kosr
