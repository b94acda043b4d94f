#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "kosr/kosr.hpp"

namespace kosr::testing {

/// Graph, categories and both label indexes for one instance.
struct Indexed {
    Graph graph;
    CategoryMap categories{0};
    LabelIndex labels;
    InvertedLabelIndex inverted;

    Indexed(Graph g, CategoryMap cm) : graph(std::move(g)), categories(std::move(cm)) {
        labels = build_labels(graph);
        inverted = InvertedLabelIndex::build(labels, categories);
    }
    IndexView view() const { return IndexView{&graph, &categories, &labels, &inverted}; }
};

inline std::string spell(const VertexNames& names, const std::vector<VertexId>& vs) {
    std::string s;
    for (VertexId v : vs) s += names.name(v);
    return s;
}

/// Members of c sorted by (distance from v, id), unreachable ones dropped.
inline std::vector<Neighbor> sorted_members(const Graph& g, const CategoryMap& cm, VertexId v, CategoryId c) {
    const auto table = dijkstra_distances(g, v);
    std::vector<Neighbor> out;
    for (VertexId u : cm.members(c))
        if (auto d = table.at(u)) out.push_back({u, *d});
    std::sort(out.begin(), out.end());
    return out;
}

class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("kosr_test_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace kosr::testing
