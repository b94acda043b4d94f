// Answers the running-example query (s, t, <MA, RE, CI>, 3) with every engine.

#include <iostream>

#include "kosr/kosr.hpp"

int main() {
    using namespace kosr;
    const Fixture fx = fixture_fig1();
    const LabelIndex labels = build_labels(fx.graph);
    const InvertedLabelIndex inverted = InvertedLabelIndex::build(labels, fx.categories);
    const IndexView view{&fx.graph, &fx.categories, &labels, &inverted};

    const Query query{fx.vertex("s"), fx.vertex("t"), {fx.category("MA"), fx.category("RE"), fx.category("CI")}, 3};
    for (const EngineKind engine : all_engines()) {
        const QueryResult result = run_query(view, engine, query);
        std::cout << to_string(engine) << "  examined=" << result.stats.examined_routes
                  << " nn_queries=" << result.stats.nn_queries << "\n";
        for (const Witness& w : result.witnesses) {
            std::cout << "  " << w.cost << "  ";
            for (std::size_t i = 0; i < w.vertices.size(); ++i) std::cout << (i ? "," : "") << fx.names.name(w.vertices[i]);
            std::cout << "\n";
        }
    }
}
