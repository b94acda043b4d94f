#pragma once

// 2-hop labels built by pruned landmark labeling. Each entry keeps the first
// hop out of the labelled vertex along the stored shortest path.

#include <algorithm>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <vector>

#include "kosr/binary_io.hpp"
#include "kosr/dijkstra.hpp"
#include "kosr/graph.hpp"

namespace kosr {

/// In L_in(v): hub reaches v at `dist`, `parent` is v's predecessor on that path.
/// In L_out(v): v reaches hub at `dist`, `parent` is v's successor on that path.
struct LabelEntry {
    VertexId hub;
    VertexId parent;
    Cost dist;

    friend bool operator==(const LabelEntry&, const LabelEntry&) = default;
};

struct HubMatch {
    VertexId hub;
    Cost dist;
};

/// Per-vertex label lists in CSR form, each sorted by hub id. Undirected
/// graphs keep a single list serving as both L_in and L_out.
class LabelIndex {
public:
    LabelIndex() = default;

    /// Takes per-vertex lists (any order) and sorts them by hub. An empty
    /// `out` means the index is symmetric.
    LabelIndex(std::vector<std::vector<LabelEntry>> in, std::vector<std::vector<LabelEntry>> out,
               std::vector<VertexId> landmark_order, bool symmetric)
        : vertex_count_(static_cast<VertexId>(in.size())), symmetric_(symmetric),
          landmark_order_(std::move(landmark_order)) {
        flatten(in, in_offsets_, in_entries_);
        if (!symmetric_) flatten(out, out_offsets_, out_entries_);
    }

    VertexId vertex_count() const { return vertex_count_; }
    bool symmetric() const { return symmetric_; }
    std::span<const VertexId> landmark_order() const { return landmark_order_; }

    std::span<const LabelEntry> in(VertexId v) const { return slice(in_offsets_, in_entries_, v); }
    std::span<const LabelEntry> out(VertexId v) const {
        return symmetric_ ? in(v) : slice(out_offsets_, out_entries_, v);
    }

    std::size_t in_entry_count() const { return in_entries_.size(); }
    std::size_t out_entry_count() const { return symmetric_ ? in_entries_.size() : out_entries_.size(); }

    /// Cheapest common hub of L_out(s) and L_in(t); ties go to the smaller hub id.
    std::optional<HubMatch> best_hub(VertexId s, VertexId t) const {
        const auto a = out(s);
        const auto b = in(t);
        std::optional<HubMatch> best;
        std::size_t i = 0, j = 0;
        while (i < a.size() && j < b.size()) {
            if (a[i].hub < b[j].hub) {
                ++i;
            } else if (b[j].hub < a[i].hub) {
                ++j;
            } else {
                const Cost d = a[i].dist + b[j].dist;
                if (!best || d < best->dist) best = HubMatch{a[i].hub, d};
                ++i;
                ++j;
            }
        }
        return best;
    }

    friend bool operator==(const LabelIndex&, const LabelIndex&) = default;

    void write(io::ByteWriter& w) const {
        w.raw("KOSRLAB1");
        w.u32(kFormatVersion);
        w.u32(vertex_count_);
        w.u8(symmetric_ ? 1 : 0);
        w.u32(static_cast<std::uint32_t>(landmark_order_.size()));
        for (VertexId v : landmark_order_) w.u32(v);
        for (VertexId v = 0; v < vertex_count_; ++v) write_list(w, in(v));
        if (!symmetric_)
            for (VertexId v = 0; v < vertex_count_; ++v) write_list(w, out(v));
    }

    static LabelIndex read(io::ByteReader& r) {
        if (r.raw(8) != "KOSRLAB1") throw Error(ErrorCode::format_error, "not a label file");
        if (r.u32() != kFormatVersion) throw Error(ErrorCode::format_error, "unsupported label format version");
        const VertexId n = r.u32();
        const bool symmetric = r.u8() != 0;
        std::vector<VertexId> order(r.u32());
        for (auto& v : order) v = r.u32();
        std::vector<std::vector<LabelEntry>> in(n), out;
        for (auto& list : in) list = read_list(r);
        if (!symmetric) {
            out.resize(n);
            for (auto& list : out) list = read_list(r);
        }
        return LabelIndex(std::move(in), std::move(out), std::move(order), symmetric);
    }

    static void write_list(io::ByteWriter& w, std::span<const LabelEntry> list) {
        w.u32(static_cast<std::uint32_t>(list.size()));
        for (const auto& e : list) {
            w.u32(e.hub);
            w.i64(e.dist);
            w.u32(e.parent);
        }
    }

    static std::vector<LabelEntry> read_list(io::ByteReader& r) {
        std::vector<LabelEntry> list(r.u32());
        for (auto& e : list) {
            e.hub = r.u32();
            e.dist = r.i64();
            e.parent = r.u32();
        }
        return list;
    }

    static constexpr std::uint32_t kFormatVersion = 1;

private:
    static void flatten(std::vector<std::vector<LabelEntry>>& lists, std::vector<std::size_t>& offsets,
                        std::vector<LabelEntry>& entries) {
        offsets.assign(lists.size() + 1, 0);
        for (std::size_t v = 0; v < lists.size(); ++v) offsets[v + 1] = offsets[v] + lists[v].size();
        entries.clear();
        entries.reserve(offsets.back());
        for (auto& list : lists) {
            std::sort(list.begin(), list.end(), [](const LabelEntry& a, const LabelEntry& b) { return a.hub < b.hub; });
            entries.insert(entries.end(), list.begin(), list.end());
            list = {};
        }
    }

    static std::span<const LabelEntry> slice(const std::vector<std::size_t>& offsets,
                                             const std::vector<LabelEntry>& entries, VertexId v) {
        if (offsets.empty()) return {};
        return {entries.data() + offsets[v], entries.data() + offsets[v + 1]};
    }

    VertexId vertex_count_ = 0;
    bool symmetric_ = false;
    std::vector<VertexId> landmark_order_;
    std::vector<std::size_t> in_offsets_;
    std::vector<LabelEntry> in_entries_;
    std::vector<std::size_t> out_offsets_;
    std::vector<LabelEntry> out_entries_;
};

/// Descending total degree, ties by vertex id.
inline std::vector<VertexId> degree_landmark_order(const Graph& g) {
    std::vector<VertexId> order(g.vertex_count());
    std::iota(order.begin(), order.end(), VertexId{0});
    auto degree = [&](VertexId v) { return g.out_arcs(v).size() + g.in_arcs(v).size(); };
    std::stable_sort(order.begin(), order.end(), [&](VertexId a, VertexId b) { return degree(a) > degree(b); });
    return order;
}

namespace detail {

/// One pruned Dijkstra from `root`. `labels` receives the new entries,
/// `root_side` holds the root's labels on the opposite side used for pruning.
class PrunedSearch {
public:
    explicit PrunedSearch(VertexId n) : tentative_(n, kUnset), parent_(n, kNoVertex), settled_(n, 0), hub_dist_(n, kUnset) {}

    void run(const Graph& g, VertexId root, Direction dir, std::vector<std::vector<LabelEntry>>& labels,
             const std::vector<LabelEntry>& root_side) {
        for (const auto& e : root_side) hub_dist_[e.hub] = e.dist;
        tentative_[root] = 0;
        parent_[root] = root;
        touched_.push_back(root);
        queue_.emplace(0, root);
        while (!queue_.empty()) {
            const auto [d, u] = queue_.top();
            queue_.pop();
            if (settled_[u] || d != tentative_[u]) continue;
            settled_[u] = 1;
            if (covered(labels[u], d)) continue;
            labels[u].push_back(LabelEntry{root, parent_[u], d});
            const auto arcs = dir == Direction::forward ? g.out_arcs(u) : g.in_arcs(u);
            for (const auto& a : arcs) {
                if (a.target == u || settled_[a.target]) continue;
                const Cost nd = d + a.weight;
                if (tentative_[a.target] == kUnset || nd < tentative_[a.target]) {
                    if (tentative_[a.target] == kUnset) touched_.push_back(a.target);
                    tentative_[a.target] = nd;
                    parent_[a.target] = u;
                    queue_.emplace(nd, a.target);
                }
            }
        }
        for (VertexId v : touched_) {
            tentative_[v] = kUnset;
            parent_[v] = kNoVertex;
            settled_[v] = 0;
        }
        touched_.clear();
        for (const auto& e : root_side) hub_dist_[e.hub] = kUnset;
    }

private:
    bool covered(const std::vector<LabelEntry>& list, Cost d) const {
        for (const auto& e : list)
            if (hub_dist_[e.hub] != kUnset && hub_dist_[e.hub] + e.dist <= d) return true;
        return false;
    }

    static constexpr Cost kUnset = -1;
    std::vector<Cost> tentative_;
    std::vector<VertexId> parent_;
    std::vector<std::uint8_t> settled_;
    std::vector<Cost> hub_dist_;
    std::vector<VertexId> touched_;
    MinQueue queue_;
};

}  // namespace detail

/// Pruned landmark labeling over `order` (degree order by default). A vertex
/// settled by a landmark's search is skipped when the labels built so far
/// already certify its tentative distance.
inline LabelIndex build_labels(const Graph& g, std::vector<VertexId> order) {
    const VertexId n = g.vertex_count();
    if (order.size() != n) throw Error(ErrorCode::invalid_argument, "landmark order must list every vertex");
    const bool symmetric = !g.directed();
    std::vector<std::vector<LabelEntry>> in(n), out(symmetric ? 0 : n);
    detail::PrunedSearch search(n);
    for (VertexId root : order) {
        if (symmetric) {
            search.run(g, root, Direction::forward, in, in[root]);
        } else {
            search.run(g, root, Direction::forward, in, out[root]);
            search.run(g, root, Direction::backward, out, in[root]);
        }
    }
    return LabelIndex(std::move(in), std::move(out), std::move(order), symmetric);
}

inline LabelIndex build_labels(const Graph& g) { return build_labels(g, degree_landmark_order(g)); }

/// Exact shortest-path cost by merge-join of L_out(s) and L_in(t).
inline std::optional<Cost> dist(const LabelIndex& idx, VertexId s, VertexId t) {
    if (auto m = idx.best_hub(s, t)) return m->dist;
    return std::nullopt;
}

namespace detail {

inline const LabelEntry& entry_for_hub(std::span<const LabelEntry> list, VertexId hub) {
    auto it = std::lower_bound(list.begin(), list.end(), hub,
                               [](const LabelEntry& e, VertexId h) { return e.hub < h; });
    if (it == list.end() || it->hub != hub) throw Error(ErrorCode::format_error, "broken parent chain in label index");
    return *it;
}

}  // namespace detail

/// Vertex sequence s..t realizing dist(s, t), unrolled through the minimizing hub.
inline std::optional<std::vector<VertexId>> reconstruct_path(const LabelIndex& idx, VertexId s, VertexId t) {
    const auto match = idx.best_hub(s, t);
    if (!match) return std::nullopt;
    std::vector<VertexId> path{s};
    for (VertexId cur = s; cur != match->hub;) {
        cur = detail::entry_for_hub(idx.out(cur), match->hub).parent;
        path.push_back(cur);
    }
    std::vector<VertexId> tail;
    for (VertexId cur = t; cur != match->hub;) {
        tail.push_back(cur);
        cur = detail::entry_for_hub(idx.in(cur), match->hub).parent;
    }
    path.insert(path.end(), tail.rbegin(), tail.rend());
    return path;
}

/// Full route for a witness: consecutive sub-routes joined at shared endpoints.
inline std::vector<VertexId> expand_witness(const LabelIndex& idx, std::span<const VertexId> witness) {
    if (witness.empty()) return {};
    std::vector<VertexId> route{witness.front()};
    for (std::size_t i = 0; i + 1 < witness.size(); ++i) {
        auto leg = reconstruct_path(idx, witness[i], witness[i + 1]);
        if (!leg) throw Error(ErrorCode::unreachable, "witness leg has no path");
        route.insert(route.end(), leg->begin() + 1, leg->end());
    }
    return route;
}

}  // namespace kosr
