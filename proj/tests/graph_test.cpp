#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "support.hpp"

using namespace kosr;

TEST(LoadGraph, ThreeRecordsGiveFourVerticesAndThreeArcs) {
    const auto g = load_graph_string("s a 8\ns c 10\na b 5\n", true);
    EXPECT_EQ(g.graph.vertex_count(), 4u);
    EXPECT_EQ(g.graph.arc_count(), 3u);
    EXPECT_EQ(g.names.name(0), "s");
    EXPECT_EQ(g.names.name(3), "b");
    EXPECT_EQ(g.graph.arc_weight(*g.names.find("s"), *g.names.find("c")), 10);
}

TEST(LoadGraph, EmptyStreamGivesEmptyGraph) {
    const auto g = load_graph_string("", true);
    EXPECT_EQ(g.graph.vertex_count(), 0u);
    EXPECT_EQ(g.graph.arc_count(), 0u);
}

TEST(LoadGraph, NegativeWeightIsRejectedWithLineNumber) {
    try {
        load_graph_string("# header\nu v 3\nu v -1\n", true);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::negative_weight);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
}

TEST(LoadGraph, MalformedRecordsAreRejected) {
    for (const char* text : {"u v\n", "u v w\n", "u v 1 2 3\n", "u v 1.5\n"}) {
        try {
            load_graph_string(text, true);
            FAIL() << "accepted: " << text;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::parse_error) << text;
        }
    }
}

TEST(LoadGraph, CommentsAndDimacsArcLines) {
    const auto plain = load_graph_string("# comment\nc this is a comment line\nx y 2\na x y 4\n", true);
    EXPECT_EQ(plain.graph.vertex_count(), 2u);
    EXPECT_EQ(plain.graph.arc_count(), 2u);
    EXPECT_EQ(plain.graph.arc_weight(0, 1), 2);

    const auto dimacs = load_graph_string("c road\np sp 3 2\nc more\na 1 2 7\na 3 1 4\n", true);
    EXPECT_EQ(dimacs.graph.vertex_count(), 3u);
    EXPECT_EQ(dimacs.names.name(0), "1");
    EXPECT_EQ(dimacs.graph.arc_weight(0, 1), 7);
    EXPECT_EQ(dimacs.graph.arc_weight(2, 0), 4);
}

TEST(LoadGraph, SparseIdsAreRenumberedDensely) {
    const auto g = load_graph_string("1000 7 1\n7 42 2\n", true);
    EXPECT_EQ(g.graph.vertex_count(), 3u);
    EXPECT_EQ(g.names.names(), (std::vector<std::string>{"1000", "7", "42"}));
}

TEST(LoadGraph, UndirectedRecordsBecomeTwoArcs) {
    const auto g = load_graph_string("a b 3\n", false);
    EXPECT_FALSE(g.graph.directed());
    EXPECT_EQ(g.graph.arc_count(), 2u);
    EXPECT_EQ(g.graph.arc_weight(0, 1), 3);
    EXPECT_EQ(g.graph.arc_weight(1, 0), 3);
}

TEST(Graph, ParallelArcsKeepTheCheapestWeight) {
    const auto g = load_graph_string("a b 9\na b 4\na b 6\n", true);
    EXPECT_EQ(g.graph.arc_count(), 3u);
    EXPECT_EQ(g.graph.arc_weight(0, 1), 4);
    EXPECT_FALSE(g.graph.arc_weight(1, 0));
}

TEST(Graph, ReverseAdjacencyIsTheTranspose) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto inst = random_instance(seed);
        const Graph& g = inst.graph;
        std::multiset<std::tuple<VertexId, VertexId, Cost>> forward, backward;
        for (VertexId u = 0; u < g.vertex_count(); ++u) {
            for (const auto& a : g.out_arcs(u)) forward.insert({u, a.target, a.weight});
            for (const auto& a : g.in_arcs(u)) backward.insert({a.target, u, a.weight});
        }
        EXPECT_EQ(forward, backward) << "seed " << seed;
        EXPECT_EQ(forward.size(), g.arc_count());
    }
}

TEST(Graph, RejectsNegativeWeightsAndBadVertices) {
    const std::vector<ArcRecord> negative{{0, 1, -2}};
    EXPECT_THROW(Graph::from_arcs(2, negative, true), Error);
    const std::vector<ArcRecord> out_of_range{{0, 5, 1}};
    EXPECT_THROW(Graph::from_arcs(2, out_of_range, true), Error);
}

TEST(Graph, SelfLoopsDoNotAffectDistances) {
    const auto g = load_graph_string("a a 0\na b 5\nb b 1\nb c 2\n", true);
    const auto d = dijkstra_distances(g.graph, 0);
    EXPECT_EQ(d.at(1), 5);
    EXPECT_EQ(d.at(2), 7);
}

TEST(Graph, SerializationRoundTrip) {
    const auto inst = random_instance(11);
    io::ByteWriter w;
    inst.graph.write(w);
    inst.categories.write(w);
    io::ByteReader r(w.bytes());
    const Graph g = Graph::read(r);
    const CategoryMap cm = CategoryMap::read(r);
    EXPECT_TRUE(r.done());
    EXPECT_TRUE(g == inst.graph);
    EXPECT_TRUE(cm == inst.categories);

    io::ByteWriter again;
    g.write(again);
    cm.write(again);
    EXPECT_EQ(again.bytes(), w.bytes());
}

TEST(Graph, TruncatedInputIsAFormatError) {
    const auto inst = random_instance(12);
    io::ByteWriter w;
    inst.graph.write(w);
    auto bytes = w.bytes();
    bytes.resize(bytes.size() / 2);
    io::ByteReader r(bytes);
    try {
        Graph::read(r);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::format_error);
    }
}

TEST(CategoryMap, MembershipStaysConsistentBothWays) {
    CategoryMap cm(5);
    const auto x = cm.add_category("X");
    const auto y = cm.add_category("Y");
    EXPECT_EQ(cm.add_category("X"), x);
    EXPECT_TRUE(cm.insert(3, x));
    EXPECT_TRUE(cm.insert(1, x));
    EXPECT_FALSE(cm.insert(1, x));
    EXPECT_TRUE(cm.insert(1, y));
    EXPECT_EQ(std::vector<VertexId>(cm.members(x).begin(), cm.members(x).end()), (std::vector<VertexId>{1, 3}));
    EXPECT_EQ(std::vector<CategoryId>(cm.categories_of(1).begin(), cm.categories_of(1).end()),
              (std::vector<CategoryId>{x, y}));
    EXPECT_TRUE(cm.erase(1, x));
    EXPECT_FALSE(cm.erase(1, x));
    EXPECT_FALSE(cm.contains(x, 1));
    EXPECT_EQ(cm.categories_of(1).size(), 1u);
    EXPECT_THROW(cm.members(7), Error);
    EXPECT_THROW(cm.require("Z"), Error);
    EXPECT_THROW(cm.insert(9, x), Error);
}

TEST(CategoryMap, LoadsCategoryFileAndRejectsUnknownVertices) {
    const auto g = load_graph_string("s a 1\na t 1\n", true);
    std::istringstream ok("a MA\nt MA\n# note\na CI\n");
    const auto cm = load_categories(ok, g.names, g.graph.vertex_count());
    EXPECT_EQ(cm.category_count(), 2u);
    EXPECT_EQ(cm.members(cm.require("MA")).size(), 2u);
    EXPECT_EQ(cm.categories_of(*g.names.find("a")).size(), 2u);

    std::istringstream bad("a MA\nq MA\n");
    try {
        load_categories(bad, g.names, g.graph.vertex_count());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::unknown_vertex);
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(UniformCategories, ExactSizesDisjointAndDeterministic) {
    const Graph g = grid_graph(10, 10, 3);
    const auto cm = assign_uniform_categories(g, 5, 10, 7);
    ASSERT_EQ(cm.category_count(), 5u);
    std::set<VertexId> seen;
    for (CategoryId c = 0; c < 5; ++c) {
        EXPECT_EQ(cm.members(c).size(), 10u);
        seen.insert(cm.members(c).begin(), cm.members(c).end());
    }
    EXPECT_EQ(seen.size(), 50u);
    EXPECT_TRUE(cm == assign_uniform_categories(g, 5, 10, 7));
    EXPECT_FALSE(cm == assign_uniform_categories(g, 5, 10, 8));
}

TEST(UniformCategories, InsufficientVerticesIsAnError) {
    const Graph g = grid_graph(10, 10, 3);
    try {
        assign_uniform_categories(g, 5, 30, 7);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::insufficient_vertices);
    }
}

TEST(ZipfCategories, SingleCategoryTakesEveryVertex) {
    const Graph g = grid_graph(6, 7, 1);
    const auto cm = assign_zipf_categories(g, 1, 1.5, 3);
    EXPECT_EQ(cm.members(0).size(), 42u);
}

TEST(ZipfCategories, EveryVertexGetsExactlyOneCategory) {
    const Graph g = random_graph(5000, 2, 9);
    const auto cm = assign_zipf_categories(g, 40, 1.2, 5);
    std::size_t total = 0;
    for (CategoryId c = 0; c < cm.category_count(); ++c) {
        EXPECT_GE(cm.members(c).size(), 1u);
        total += cm.members(c).size();
    }
    EXPECT_EQ(total, 5000u);
    for (VertexId v = 0; v < g.vertex_count(); ++v) EXPECT_EQ(cm.categories_of(v).size(), 1u);
}

TEST(ZipfCategories, SizesMatchTheRankPowerLaw) {
    const auto skewed = zipf_category_sizes(10000, 100, 1.2);
    const auto flat = zipf_category_sizes(10000, 100, 2.0);
    EXPECT_EQ(*std::max_element(skewed.begin(), skewed.end()), 1333u);
    EXPECT_EQ(*std::min_element(skewed.begin(), skewed.end()), 29u);
    EXPECT_EQ(*std::max_element(flat.begin(), flat.end()), 538u);
    EXPECT_EQ(*std::min_element(flat.begin(), flat.end()), 54u);
    EXPECT_TRUE(std::is_sorted(skewed.rbegin(), skewed.rend()));
}

TEST(ZipfCategories, LargerFactorMeansLessSkew) {
    const Graph g = random_graph(10000, 2, 4);
    auto ratio = [&](double f) {
        const auto cm = assign_zipf_categories(g, 100, f, 17);
        std::size_t lo = SIZE_MAX, hi = 0;
        for (CategoryId c = 0; c < cm.category_count(); ++c) {
            lo = std::min(lo, cm.members(c).size());
            hi = std::max(hi, cm.members(c).size());
        }
        return double(hi) / double(lo);
    };
    EXPECT_LT(ratio(2.0), ratio(1.2));
    EXPECT_LT(ratio(3.0), ratio(2.0));
}

TEST(ZipfCategories, RejectsBadParameters) {
    EXPECT_THROW(zipf_category_sizes(10, 0, 1.5), Error);
    EXPECT_THROW(zipf_category_sizes(10, 3, 0.5), Error);
    EXPECT_THROW(zipf_category_sizes(2, 3, 1.5), Error);
}
