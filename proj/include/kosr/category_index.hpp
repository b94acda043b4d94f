#pragma once

// Inverted label index per category and the incremental nearest-neighbor
// cursor running over it.

#include <algorithm>
#include <functional>
#include <optional>
#include <queue>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kosr/binary_io.hpp"
#include "kosr/graph.hpp"
#include "kosr/hop_labeling.hpp"
#include "kosr/neighbors.hpp"

namespace kosr {

struct InvertedEntry {
    VertexId member;
    Cost dist;  // hub -> member

    friend bool operator==(const InvertedEntry&, const InvertedEntry&) = default;
};

inline bool inverted_less(const InvertedEntry& a, const InvertedEntry& b) {
    return a.dist != b.dist ? a.dist < b.dist : a.member < b.member;
}

/// IL(C_i): for each hub u', the members u of C_i with (u', d) in L_in(u),
/// sorted by (d, member).
class CategoryInvertedIndex {
public:
    std::span<const InvertedEntry> list(VertexId hub) const {
        auto it = lists_.find(hub);
        if (it == lists_.end()) return {};
        return it->second;
    }

    void insert(VertexId hub, InvertedEntry e) {
        auto& l = lists_[hub];
        l.insert(std::lower_bound(l.begin(), l.end(), e, inverted_less), e);
    }

    bool erase(VertexId hub, InvertedEntry e) {
        auto it = lists_.find(hub);
        if (it == lists_.end()) return false;
        auto& l = it->second;
        auto pos = std::lower_bound(l.begin(), l.end(), e, inverted_less);
        if (pos == l.end() || !(*pos == e)) return false;
        l.erase(pos);
        if (l.empty()) lists_.erase(it);
        return true;
    }

    /// Hubs in ascending id order.
    std::vector<VertexId> hubs() const {
        std::vector<VertexId> h;
        h.reserve(lists_.size());
        for (const auto& [hub, _] : lists_) h.push_back(hub);
        std::sort(h.begin(), h.end());
        return h;
    }

    std::size_t hub_count() const { return lists_.size(); }
    std::size_t entry_count() const {
        std::size_t n = 0;
        for (const auto& [_, l] : lists_) n += l.size();
        return n;
    }
    bool empty() const { return lists_.empty(); }

    /// Bulk load of one hub list that is already in sorted order.
    void assign(VertexId hub, std::vector<InvertedEntry> entries) {
        if (entries.empty()) {
            lists_.erase(hub);
            return;
        }
        lists_[hub] = std::move(entries);
    }

    friend bool operator==(const CategoryInvertedIndex&, const CategoryInvertedIndex&) = default;

private:
    std::unordered_map<VertexId, std::vector<InvertedEntry>> lists_;
};

inline CategoryInvertedIndex build_inverted_index(const LabelIndex& idx, const CategoryMap& cm, CategoryId c) {
    std::unordered_map<VertexId, std::vector<InvertedEntry>> grouped;
    for (VertexId u : cm.members(c))
        for (const auto& e : idx.in(u)) grouped[e.hub].push_back({u, e.dist});
    CategoryInvertedIndex il;
    for (auto& [hub, entries] : grouped) {
        std::sort(entries.begin(), entries.end(), inverted_less);
        il.assign(hub, std::move(entries));
    }
    return il;
}

/// IL(C_i) for every category of a CategoryMap, indexed by category id.
class InvertedLabelIndex {
public:
    InvertedLabelIndex() = default;
    explicit InvertedLabelIndex(std::size_t category_count) : per_category_(category_count) {}

    static InvertedLabelIndex build(const LabelIndex& idx, const CategoryMap& cm) {
        InvertedLabelIndex il;
        il.per_category_.reserve(cm.category_count());
        for (CategoryId c = 0; c < cm.category_count(); ++c) il.per_category_.push_back(build_inverted_index(idx, cm, c));
        return il;
    }

    const CategoryInvertedIndex& at(CategoryId c) const {
        if (c >= per_category_.size()) throw Error(ErrorCode::unknown_category, "category id " + std::to_string(c));
        return per_category_[c];
    }
    CategoryInvertedIndex& at(CategoryId c) {
        if (c >= per_category_.size()) throw Error(ErrorCode::unknown_category, "category id " + std::to_string(c));
        return per_category_[c];
    }
    void set(CategoryId c, CategoryInvertedIndex il) {
        if (c >= per_category_.size()) per_category_.resize(c + 1);
        per_category_[c] = std::move(il);
    }

    std::size_t category_count() const { return per_category_.size(); }

    friend bool operator==(const InvertedLabelIndex&, const InvertedLabelIndex&) = default;

private:
    std::vector<CategoryInvertedIndex> per_category_;
};

enum class UpdateOutcome { applied, no_change };

/// Adds v to V_c and threads (v, d) into IL(u) for every (u, d) in L_in(v).
inline UpdateOutcome add_vertex_category(CategoryMap& cm, InvertedLabelIndex& il, const LabelIndex& idx,
                                         VertexId v, CategoryId c) {
    if (!cm.insert(v, c)) return UpdateOutcome::no_change;
    auto& cat = il.at(c);
    for (const auto& e : idx.in(v)) cat.insert(e.hub, {v, e.dist});
    return UpdateOutcome::applied;
}

inline UpdateOutcome remove_vertex_category(CategoryMap& cm, InvertedLabelIndex& il, const LabelIndex& idx,
                                            VertexId v, CategoryId c) {
    if (!cm.erase(v, c)) return UpdateOutcome::no_change;
    auto& cat = il.at(c);
    for (const auto& e : idx.in(v)) cat.erase(e.hub, {v, e.dist});
    return UpdateOutcome::applied;
}

/// Per-(v, c) state of the incremental nearest-neighbor search: the neighbors
/// produced so far and a heap holding the current head of every matching
/// hub list IL(v') with (v', d) in L_out(v).
class NearestNeighborCursor {
public:
    struct Candidate {
        Cost cost;  // d(v, v') + d(v', member)
        VertexId member;
        VertexId hub;
        Cost hub_dist;  // d(v, v')
        std::uint32_t position;

        friend bool operator>(const Candidate& a, const Candidate& b) {
            if (a.cost != b.cost) return a.cost > b.cost;
            if (a.member != b.member) return a.member > b.member;
            return a.hub > b.hub;
        }
    };

    std::span<const Neighbor> produced() const { return produced_; }
    bool exhausted() const { return initialized_ && queue_.empty(); }
    std::size_t pending() const { return queue_.size(); }

private:
    friend class LabelNearestNeighbors;

    bool initialized_ = false;
    std::vector<Neighbor> produced_;
    std::unordered_set<VertexId> produced_set_;
    std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> queue_;
};

/// Query-scoped cursor store answering find_nn from the label and inverted
/// label indexes.
class LabelNearestNeighbors final : public NearestNeighborFinder {
public:
    LabelNearestNeighbors(const LabelIndex& labels, const InvertedLabelIndex& inverted, CandidateFilter filter = {})
        : labels_(labels), inverted_(inverted), filter_(std::move(filter)) {}

    std::optional<Neighbor> find_nn(VertexId v, CategoryId c, std::size_t rank) override {
        if (rank == 0) throw Error(ErrorCode::invalid_argument, "rank must be >= 1");
        const auto& il = inverted_.at(c);
        auto& cursor = cursors_[key(v, c)];
        if (cursor.produced_.size() >= rank) return cursor.produced_[rank - 1];
        if (cursor.exhausted()) return std::nullopt;
        ++nn_queries_;
        if (!cursor.initialized_) {
            cursor.initialized_ = true;
            for (const auto& e : labels_.out(v)) push_from(cursor, il, e.hub, e.dist, 0);
        }
        while (cursor.produced_.size() < rank && !cursor.queue_.empty()) {
            const auto top = cursor.queue_.top();
            cursor.queue_.pop();
            push_from(cursor, il, top.hub, top.hub_dist, top.position + 1);
            if (cursor.produced_set_.contains(top.member)) continue;
            if (filter_ && !filter_(c, top.member)) continue;
            cursor.produced_set_.insert(top.member);
            cursor.produced_.push_back({top.member, top.cost});
        }
        if (cursor.produced_.size() < rank) return std::nullopt;
        return cursor.produced_[rank - 1];
    }

    std::uint64_t nn_queries() const override { return nn_queries_; }

    /// Inverted-list entries moved into the heap so far, across all cursors.
    std::uint64_t positions_consumed() const { return positions_consumed_; }

    const NearestNeighborCursor* cursor(VertexId v, CategoryId c) const {
        auto it = cursors_.find(key(v, c));
        return it == cursors_.end() ? nullptr : &it->second;
    }

private:
    void push_from(NearestNeighborCursor& cursor, const CategoryInvertedIndex& il, VertexId hub, Cost hub_dist,
                   std::uint32_t position) {
        const auto list = il.list(hub);
        if (position >= list.size()) return;
        ++positions_consumed_;
        const auto& e = list[position];
        cursor.queue_.push({hub_dist + e.dist, e.member, hub, hub_dist, position});
    }

    static std::uint64_t key(VertexId v, CategoryId c) { return (std::uint64_t{v} << 32) | c; }

    const LabelIndex& labels_;
    const InvertedLabelIndex& inverted_;
    CandidateFilter filter_;
    std::unordered_map<std::uint64_t, NearestNeighborCursor> cursors_;
    std::uint64_t nn_queries_ = 0;
    std::uint64_t positions_consumed_ = 0;
};

/// One-shot helper over a fresh cursor store.
inline std::optional<Neighbor> find_nn(const LabelIndex& labels, const InvertedLabelIndex& inverted, VertexId v,
                                       CategoryId c, std::size_t rank) {
    LabelNearestNeighbors finder(labels, inverted);
    return finder.find_nn(v, c, rank);
}

}  // namespace kosr
