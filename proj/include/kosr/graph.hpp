#pragma once

// Directed weighted graph with per-vertex category sets, text ingestion,
// synthetic category generation and binary round-tripping.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kosr/binary_io.hpp"
#include "kosr/types.hpp"

namespace kosr {

struct Arc {
    VertexId target;  // head for out-arcs, tail for in-arcs
    Cost weight;

    friend bool operator==(const Arc&, const Arc&) = default;
};

struct ArcRecord {
    VertexId from;
    VertexId to;
    Cost weight;
};

/// Immutable CSR graph holding both the forward and the transposed adjacency.
class Graph {
public:
    Graph() : out_offsets_(1, 0), in_offsets_(1, 0) {}

    /// `directed == false` expands each record into two arcs.
    static Graph from_arcs(VertexId vertex_count, std::span<const ArcRecord> records, bool directed) {
        std::vector<ArcRecord> arcs;
        arcs.reserve(records.size() * (directed ? 1 : 2));
        for (const auto& r : records) {
            if (r.from >= vertex_count || r.to >= vertex_count)
                throw Error(ErrorCode::unknown_vertex, "arc endpoint out of range");
            if (r.weight < 0) throw Error(ErrorCode::negative_weight, "arc weight below zero");
            arcs.push_back(r);
            if (!directed) arcs.push_back({r.to, r.from, r.weight});
        }
        Graph g;
        g.directed_ = directed;
        g.vertex_count_ = vertex_count;
        fill_csr(vertex_count, arcs, false, g.out_offsets_, g.out_arcs_);
        fill_csr(vertex_count, arcs, true, g.in_offsets_, g.in_arcs_);
        return g;
    }

    VertexId vertex_count() const { return vertex_count_; }
    std::size_t arc_count() const { return out_arcs_.size(); }
    bool directed() const { return directed_; }

    std::span<const Arc> out_arcs(VertexId v) const {
        return {out_arcs_.data() + out_offsets_[v], out_arcs_.data() + out_offsets_[v + 1]};
    }
    std::span<const Arc> in_arcs(VertexId v) const {
        return {in_arcs_.data() + in_offsets_[v], in_arcs_.data() + in_offsets_[v + 1]};
    }

    /// Cheapest arc u->v, self-loops included.
    std::optional<Cost> arc_weight(VertexId u, VertexId v) const {
        std::optional<Cost> best;
        for (const auto& a : out_arcs(u))
            if (a.target == v && (!best || a.weight < *best)) best = a.weight;
        return best;
    }

    friend bool operator==(const Graph&, const Graph&) = default;

    void write(io::ByteWriter& w) const {
        w.raw("KOSRGRF1");
        w.u8(directed_ ? 1 : 0);
        w.u32(vertex_count_);
        w.u64(out_arcs_.size());
        for (VertexId v = 0; v < vertex_count_; ++v) {
            for (const auto& a : out_arcs(v)) {
                w.u32(v);
                w.u32(a.target);
                w.i64(a.weight);
            }
        }
    }

    static Graph read(io::ByteReader& r) {
        if (r.raw(8) != "KOSRGRF1") throw Error(ErrorCode::format_error, "not a graph file");
        const bool directed = r.u8() != 0;
        const VertexId n = r.u32();
        const std::uint64_t m = r.u64();
        std::vector<ArcRecord> arcs;
        arcs.reserve(m);
        for (std::uint64_t i = 0; i < m; ++i) {
            ArcRecord a{};
            a.from = r.u32();
            a.to = r.u32();
            a.weight = r.i64();
            arcs.push_back(a);
        }
        // Stored arcs are already expanded; rebuild as directed and restore the flag.
        Graph g = from_arcs(n, arcs, true);
        g.directed_ = directed;
        return g;
    }

private:
    static void fill_csr(VertexId n, const std::vector<ArcRecord>& arcs, bool reverse,
                         std::vector<std::size_t>& offsets, std::vector<Arc>& out) {
        offsets.assign(static_cast<std::size_t>(n) + 1, 0);
        for (const auto& a : arcs) ++offsets[(reverse ? a.to : a.from) + 1];
        std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
        out.assign(arcs.size(), Arc{0, 0});
        std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
        for (const auto& a : arcs) {
            const VertexId tail = reverse ? a.to : a.from;
            out[cursor[tail]++] = Arc{reverse ? a.from : a.to, a.weight};
        }
        for (VertexId v = 0; v < n; ++v) {
            std::sort(out.begin() + static_cast<std::ptrdiff_t>(offsets[v]),
                      out.begin() + static_cast<std::ptrdiff_t>(offsets[v + 1]),
                      [](const Arc& x, const Arc& y) {
                          return std::pair(x.target, x.weight) < std::pair(y.target, y.weight);
                      });
        }
    }

    bool directed_ = true;
    VertexId vertex_count_ = 0;
    std::vector<std::size_t> out_offsets_;
    std::vector<Arc> out_arcs_;
    std::vector<std::size_t> in_offsets_;
    std::vector<Arc> in_arcs_;
};

/// Dense id <-> original identifier remap table produced at load time.
class VertexNames {
public:
    VertexId intern(std::string_view name) {
        auto it = ids_.find(std::string(name));
        if (it != ids_.end()) return it->second;
        const auto id = static_cast<VertexId>(names_.size());
        names_.emplace_back(name);
        ids_.emplace(names_.back(), id);
        return id;
    }

    std::optional<VertexId> find(std::string_view name) const {
        auto it = ids_.find(std::string(name));
        if (it == ids_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& name(VertexId v) const { return names_.at(v); }
    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

    static VertexNames identity(VertexId n) {
        VertexNames names;
        for (VertexId v = 0; v < n; ++v) names.intern(std::to_string(v));
        return names;
    }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, VertexId> ids_;
};

struct LoadedGraph {
    Graph graph;
    VertexNames names;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) tokens.push_back(line.substr(start, i - start));
    }
    return tokens;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
    std::int64_t v = 0;
    const char* first = s.data();
    if (!s.empty() && s[0] == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || first == s.data() + s.size()) return std::nullopt;
    return v;
}

[[noreturn]] inline void fail_line(ErrorCode code, std::size_t line_no, const std::string& msg) {
    throw Error(code, "line " + std::to_string(line_no) + ": " + msg);
}

}  // namespace detail

/// Reads "u v w" records (or DIMACS "a u v w" arcs). Comments start with '#';
/// a DIMACS "p sp n m" header switches to DIMACS mode, where 'c' lines are
/// comments and vertices 1..n are pre-registered in order.
inline LoadedGraph load_graph(std::istream& in, bool directed) {
    LoadedGraph out;
    std::vector<ArcRecord> records;
    bool dimacs = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tokens = detail::split_ws(line);
        if (tokens.empty() || tokens[0][0] == '#') continue;
        if (tokens[0] == "c" && (dimacs || tokens.size() != 3)) continue;
        if (tokens[0] == "p") {
            if (tokens.size() != 4) detail::fail_line(ErrorCode::parse_error, line_no, "malformed problem line");
            const auto n = detail::parse_int(tokens[2]);
            if (!n || *n < 0) detail::fail_line(ErrorCode::parse_error, line_no, "bad vertex count");
            dimacs = true;
            for (std::int64_t v = 1; v <= *n; ++v) out.names.intern(std::to_string(v));
            continue;
        }
        std::span<const std::string_view> fields(tokens);
        if (tokens[0] == "a" && tokens.size() == 4) {
            fields = fields.subspan(1);
        } else if (dimacs || tokens.size() != 3) {
            detail::fail_line(ErrorCode::parse_error, line_no, "expected \"u v w\"");
        }
        const auto w = detail::parse_int(fields[2]);
        if (!w) detail::fail_line(ErrorCode::parse_error, line_no, "weight is not an integer");
        if (*w < 0) detail::fail_line(ErrorCode::negative_weight, line_no, "negative weight");
        const VertexId u = out.names.intern(fields[0]);
        const VertexId v = out.names.intern(fields[1]);
        records.push_back({u, v, *w});
    }
    out.graph = Graph::from_arcs(static_cast<VertexId>(out.names.size()), records, directed);
    return out;
}

inline LoadedGraph load_graph_string(std::string_view text, bool directed) {
    std::istringstream in{std::string(text)};
    return load_graph(in, directed);
}

/// V_{C_i} per category and F(v) per vertex, kept mutually consistent.
class CategoryMap {
public:
    CategoryMap() = default;
    explicit CategoryMap(VertexId vertex_count) : vertex_categories_(vertex_count) {}

    CategoryId add_category(std::string_view name) {
        if (auto found = find(name)) return *found;
        const auto id = static_cast<CategoryId>(names_.size());
        names_.emplace_back(name);
        ids_.emplace(names_.back(), id);
        members_.emplace_back();
        return id;
    }

    std::optional<CategoryId> find(std::string_view name) const {
        auto it = ids_.find(std::string(name));
        if (it == ids_.end()) return std::nullopt;
        return it->second;
    }

    CategoryId require(std::string_view name) const {
        if (auto c = find(name)) return *c;
        throw Error(ErrorCode::unknown_category, std::string(name));
    }

    const std::string& name(CategoryId c) const { return names_.at(c); }
    std::size_t category_count() const { return names_.size(); }
    VertexId vertex_count() const { return static_cast<VertexId>(vertex_categories_.size()); }

    std::span<const VertexId> members(CategoryId c) const {
        check(c);
        return members_[c];
    }
    std::span<const CategoryId> categories_of(VertexId v) const { return vertex_categories_.at(v); }

    bool contains(CategoryId c, VertexId v) const {
        check(c);
        return std::binary_search(members_[c].begin(), members_[c].end(), v);
    }

    /// Returns false when v already belongs to c.
    bool insert(VertexId v, CategoryId c) {
        check(c);
        check_vertex(v);
        auto& m = members_[c];
        auto it = std::lower_bound(m.begin(), m.end(), v);
        if (it != m.end() && *it == v) return false;
        m.insert(it, v);
        auto& f = vertex_categories_[v];
        f.insert(std::lower_bound(f.begin(), f.end(), c), c);
        return true;
    }

    /// Returns false when v was not a member of c.
    bool erase(VertexId v, CategoryId c) {
        check(c);
        check_vertex(v);
        auto& m = members_[c];
        auto it = std::lower_bound(m.begin(), m.end(), v);
        if (it == m.end() || *it != v) return false;
        m.erase(it);
        auto& f = vertex_categories_[v];
        f.erase(std::lower_bound(f.begin(), f.end(), c));
        return true;
    }

    friend bool operator==(const CategoryMap& a, const CategoryMap& b) {
        return a.names_ == b.names_ && a.members_ == b.members_ && a.vertex_categories_ == b.vertex_categories_;
    }

    void write(io::ByteWriter& w) const {
        w.raw("KOSRCAT1");
        w.u32(vertex_count());
        w.u32(static_cast<std::uint32_t>(names_.size()));
        for (CategoryId c = 0; c < names_.size(); ++c) {
            w.str(names_[c]);
            w.u32(static_cast<std::uint32_t>(members_[c].size()));
            for (VertexId v : members_[c]) w.u32(v);
        }
    }

    static CategoryMap read(io::ByteReader& r) {
        if (r.raw(8) != "KOSRCAT1") throw Error(ErrorCode::format_error, "not a category file");
        CategoryMap cm(r.u32());
        const std::uint32_t count = r.u32();
        for (std::uint32_t i = 0; i < count; ++i) {
            const CategoryId c = cm.add_category(r.str());
            const std::uint32_t size = r.u32();
            for (std::uint32_t j = 0; j < size; ++j) cm.insert(r.u32(), c);
        }
        return cm;
    }

private:
    void check(CategoryId c) const {
        if (c >= members_.size()) throw Error(ErrorCode::unknown_category, "category id " + std::to_string(c));
    }
    void check_vertex(VertexId v) const {
        if (v >= vertex_categories_.size()) throw Error(ErrorCode::unknown_vertex, "vertex id " + std::to_string(v));
    }

    std::vector<std::string> names_;
    std::unordered_map<std::string, CategoryId> ids_;
    std::vector<std::vector<VertexId>> members_;
    std::vector<std::vector<CategoryId>> vertex_categories_;
};

/// Reads "v c" lines; category ids follow first appearance order.
inline CategoryMap load_categories(std::istream& in, const VertexNames& names, VertexId vertex_count) {
    CategoryMap cm(vertex_count);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tokens = detail::split_ws(line);
        if (tokens.empty() || tokens[0][0] == '#') continue;
        if (tokens.size() != 2) detail::fail_line(ErrorCode::parse_error, line_no, "expected \"v c\"");
        const auto v = names.find(tokens[0]);
        if (!v) detail::fail_line(ErrorCode::unknown_vertex, line_no, "unknown vertex " + std::string(tokens[0]));
        cm.insert(*v, cm.add_category(tokens[1]));
    }
    return cm;
}

inline std::string generated_category_name(std::size_t i) { return "C" + std::to_string(i); }

/// Seeded sample without replacement: categories C0..C{n-1}, each with exactly
/// `size_per_category` distinct members and no vertex in two categories.
inline CategoryMap assign_uniform_categories(const Graph& g, std::size_t num_categories,
                                             std::size_t size_per_category, std::uint64_t seed) {
    if (num_categories * size_per_category > g.vertex_count())
        throw Error(ErrorCode::insufficient_vertices, "need " + std::to_string(num_categories * size_per_category) +
                                                          " vertices, graph has " + std::to_string(g.vertex_count()));
    std::vector<VertexId> order(g.vertex_count());
    std::iota(order.begin(), order.end(), VertexId{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    CategoryMap cm(g.vertex_count());
    std::size_t next = 0;
    for (std::size_t i = 0; i < num_categories; ++i) {
        const CategoryId c = cm.add_category(generated_category_name(i));
        for (std::size_t j = 0; j < size_per_category; ++j) cm.insert(order[next++], c);
    }
    return cm;
}

/// Category sizes for the rank-power law: size_i proportional to i^(-1/f),
/// each at least one, summing to `total`.
inline std::vector<std::size_t> zipf_category_sizes(std::size_t total, std::size_t num_categories, double factor_f) {
    if (num_categories == 0) throw Error(ErrorCode::invalid_argument, "need at least one category");
    if (factor_f < 1.0) throw Error(ErrorCode::invalid_argument, "factor f must be >= 1");
    if (total < num_categories)
        throw Error(ErrorCode::insufficient_vertices, "fewer vertices than categories");
    std::vector<double> weight(num_categories);
    for (std::size_t i = 0; i < num_categories; ++i) weight[i] = std::pow(static_cast<double>(i + 1), -1.0 / factor_f);
    const double sum = std::accumulate(weight.begin(), weight.end(), 0.0);
    std::vector<std::size_t> size(num_categories);
    std::vector<double> remainder(num_categories);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < num_categories; ++i) {
        const double exact = static_cast<double>(total) * weight[i] / sum;
        size[i] = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(exact)));
        remainder[i] = exact - std::floor(exact);
        assigned += size[i];
    }
    std::vector<std::size_t> by_remainder(num_categories);
    std::iota(by_remainder.begin(), by_remainder.end(), std::size_t{0});
    std::stable_sort(by_remainder.begin(), by_remainder.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t j = 0; assigned < total; j = (j + 1) % num_categories, ++assigned) ++size[by_remainder[j]];
    // Trim any overshoot from the largest categories, lowest rank first.
    for (std::size_t i = 0; assigned > total; i = (i + 1) % num_categories) {
        if (size[i] > 1) {
            --size[i];
            --assigned;
        }
    }
    return size;
}

/// Every vertex gets exactly one of C0..C{n-1}; a seeded shuffle is sliced into
/// contiguous runs with power-law sizes. Larger f gives less skew.
inline CategoryMap assign_zipf_categories(const Graph& g, std::size_t num_categories, double factor_f,
                                          std::uint64_t seed) {
    const auto sizes = zipf_category_sizes(g.vertex_count(), num_categories, factor_f);
    std::vector<VertexId> order(g.vertex_count());
    std::iota(order.begin(), order.end(), VertexId{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    CategoryMap cm(g.vertex_count());
    std::size_t next = 0;
    for (std::size_t i = 0; i < num_categories; ++i) {
        const CategoryId c = cm.add_category(generated_category_name(i));
        for (std::size_t j = 0; j < sizes[i]; ++j) cm.insert(order[next++], c);
    }
    return cm;
}

}  // namespace kosr
