#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kosr/bench.hpp"
#include "kosr/category_index.hpp"
#include "kosr/engines.hpp"
#include "kosr/graph.hpp"
#include "kosr/hop_labeling.hpp"
#include "kosr/index_store.hpp"
#include "kosr/oracle.hpp"

namespace kosr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUser = 1;
inline constexpr int kExitInternal = 2;
inline constexpr const char* kIndexDirEnv = "KOSR_INDEX_DIR";

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty() || !parts.empty()) parts.push_back(cur);
    return parts;
}

inline std::string resolve_index_dir(const std::string& given) {
    if (!given.empty()) return given;
    if (const char* env = std::getenv(kIndexDirEnv)) return env;
    throw Error(ErrorCode::invalid_argument, std::string("no index directory (use --index or ") + kIndexDirEnv + ")");
}

inline int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::format_error:
        case ErrorCode::enumeration_limit:
        case ErrorCode::unreachable:
            return kExitInternal;
        default:
            return kExitUser;
    }
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
    return in;
}

inline std::string join_names(const VertexNames& names, std::span<const VertexId> vs) {
    std::string s;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (i) s += ',';
        s += names.name(vs[i]);
    }
    return s;
}

struct BuildArgs {
    std::string graph;
    bool undirected = false;
    std::string categories;
    std::size_t uniform = 0;
    std::size_t size = 0;
    std::size_t zipf = 0;
    double factor = 1.0;
    std::uint64_t seed = 1;
    std::string out;
};

struct QueryArgs {
    std::string index;
    std::string source;
    std::string target;
    std::string sequence;
    long long k = 1;
    std::string engine = "sk";
    std::string mode = "mem";
    bool expand = false;
    bool stats = false;
};

struct UpdateArgs {
    std::string index;
    std::string op;
    std::string vertex;
    std::string category;
};

struct BenchArgs {
    std::string index;
    std::string engines = "pk,sk";
    std::size_t queries = 50;
    std::size_t length = 3;
    std::size_t k = 10;
    std::uint64_t seed = 1;
    long long timeout_ms = 60'000;
    std::string out_prefix;
    bool no_timing = false;
};

struct GenArgs {
    std::string kind = "random";
    VertexId vertices = 1000;
    std::size_t links = 2;
    std::uint64_t seed = 1;
    std::string out;
};

inline int cmd_build(const BuildArgs& a, std::ostream& out) {
    const auto started = std::chrono::steady_clock::now();
    auto in = open_input(a.graph);
    auto loaded = load_graph(in, !a.undirected);
    const Graph& g = loaded.graph;
    const int sources = (!a.categories.empty()) + (a.uniform > 0) + (a.zipf > 0);
    if (sources != 1)
        throw Error(ErrorCode::invalid_argument, "give exactly one of --categories, --uniform, --zipf");
    CategoryMap cm(0);
    if (!a.categories.empty()) {
        auto cin = open_input(a.categories);
        cm = load_categories(cin, loaded.names, g.vertex_count());
    } else if (a.uniform > 0) {
        if (a.size == 0) throw Error(ErrorCode::invalid_argument, "--uniform needs --size");
        cm = assign_uniform_categories(g, a.uniform, a.size, a.seed);
    } else {
        cm = assign_zipf_categories(g, a.zipf, a.factor, a.seed);
    }
    const auto labels = build_labels(g);
    const auto labelled = std::chrono::steady_clock::now();
    const auto inverted = InvertedLabelIndex::build(labels, cm);
    const auto indexed = std::chrono::steady_clock::now();
    const std::string dir = resolve_index_dir(a.out);
    const auto manifest = store::write_index(dir, g, loaded.names, cm, labels, inverted);

    const double n = g.vertex_count() ? double(g.vertex_count()) : 1.0;
    out << std::fixed << std::setprecision(3);
    out << "vertices=" << g.vertex_count() << "\n"
        << "arcs=" << g.arc_count() << "\n"
        << "categories=" << manifest.categories.size() << "\n"
        << "label_seconds=" << std::chrono::duration<double>(labelled - started).count() << "\n"
        << "inverted_seconds=" << std::chrono::duration<double>(indexed - labelled).count() << "\n"
        << "avg_in_label=" << double(labels.in_entry_count()) / n << "\n"
        << "avg_out_label=" << double(labels.out_entry_count()) / n << "\n"
        << "index_dir=" << dir << "\n";
    return kExitOk;
}

inline int cmd_query(const QueryArgs& a, std::ostream& out, std::ostream& err) {
    if (a.k < 1) throw Error(ErrorCode::invalid_argument, "k must be >= 1");
    const auto engine = parse_engine(a.engine);
    if (!engine) throw Error(ErrorCode::invalid_argument, "unknown engine " + a.engine);
    if (a.mode != "mem" && a.mode != "disk") throw Error(ErrorCode::invalid_argument, "mode must be mem or disk");
    const std::string dir = resolve_index_dir(a.index);

    auto build_query = [&](const VertexNames& names, auto&& find_category) {
        Query q;
        auto s = names.find(a.source);
        if (!s) throw Error(ErrorCode::unknown_vertex, "unknown vertex " + a.source);
        auto t = names.find(a.target);
        if (!t) throw Error(ErrorCode::unknown_vertex, "unknown vertex " + a.target);
        q.source = *s;
        q.target = *t;
        q.k = static_cast<std::size_t>(a.k);
        for (const auto& name : split_list(a.sequence)) {
            auto c = find_category(name);
            if (!c) throw Error(ErrorCode::unknown_category, "unknown category " + name);
            q.categories.push_back(*c);
        }
        if (q.categories.empty()) throw Error(ErrorCode::invalid_argument, "empty category sequence");
        return q;
    };

    auto print = [&](const QueryResult& r, const VertexNames& names, const LabelIndex* expand_with) {
        for (std::size_t i = 0; i < r.witnesses.size(); ++i) {
            const auto& w = r.witnesses[i];
            out << (i + 1) << ' ' << w.cost << ' ' << join_names(names, w.vertices) << "\n";
            if (expand_with) out << "  route " << join_names(names, expand_witness(*expand_with, w.vertices)) << "\n";
        }
        if (a.stats) {
            err << "engine=" << to_string(*engine) << "\n"
                << "mode=" << a.mode << "\n"
                << "results=" << r.witnesses.size() << "\n"
                << "examined_routes=" << r.stats.examined_routes << "\n"
                << "extended_routes=" << r.stats.extended_routes << "\n"
                << "nn_queries=" << r.stats.nn_queries << "\n"
                << "runtime_ms=" << std::fixed << std::setprecision(3) << r.stats.runtime.count() / 1e6 << "\n";
        }
    };

    if (a.mode == "mem") {
        const auto idx = store::load_index(dir);
        const Query q = build_query(idx.names, [&](const std::string& n) { return idx.categories.find(n); });
        const auto r = run_query(idx.view(), *engine, q);
        print(r, idx.names, a.expand ? &idx.labels : nullptr);
        return kExitOk;
    }

    store::DiskIndex disk(dir);
    const Query q = build_query(disk.names(), [&](const std::string& n) { return disk.find_category(n); });
    auto prepared = disk.prepare(q, *engine);
    const auto r = run_query(prepared.view(), *engine, q);
    std::optional<LabelIndex> full;
    if (a.expand) full = disk.load_all_labels();
    print(r, disk.names(), full ? &*full : nullptr);
    if (a.stats) {
        err << "segment_reads=" << disk.counters().reads << "\n"
            << "segment_read_limit=" << q.categories.size() + 4 << "\n";
        if (a.expand) err << "expand_reads=" << disk.expand_counters().reads << "\n";
    }
    return kExitOk;
}

inline int cmd_update(const UpdateArgs& a, std::ostream& out, std::ostream& err) {
    if (a.op != "add" && a.op != "remove") throw Error(ErrorCode::invalid_argument, "operation must be add or remove");
    const std::string dir = resolve_index_dir(a.index);
    const auto manifest = store::read_manifest(dir);
    const auto names = store::names_from(manifest);
    const auto v = names.find(a.vertex);
    if (!v) throw Error(ErrorCode::unknown_vertex, "unknown vertex " + a.vertex);
    std::optional<CategoryId> c;
    for (const auto& seg : manifest.categories)
        if (seg.name == a.category) c = seg.id;
    if (!c) throw Error(ErrorCode::unknown_category, "unknown category " + a.category);
    const auto outcome = store::update_category(dir, a.op == "add", *v, *c);
    if (outcome == UpdateOutcome::no_change) {
        err << "warning: " << a.vertex << (a.op == "add" ? " already in " : " not in ") << a.category
            << ", nothing changed\n";
    } else {
        out << a.op << ' ' << a.vertex << ' ' << a.category << "\n";
    }
    return kExitOk;
}

inline int cmd_bench(const BenchArgs& a, std::ostream& out) {
    BenchParams p;
    for (const auto& name : split_list(a.engines)) {
        auto e = parse_engine(name);
        if (!e) throw Error(ErrorCode::invalid_argument, "unknown engine " + name);
        p.engines.push_back(*e);
    }
    if (p.engines.empty()) throw Error(ErrorCode::invalid_argument, "engine list is empty");
    if (a.k < 1) throw Error(ErrorCode::invalid_argument, "k must be >= 1");
    p.sequence_length = a.length;
    p.k = a.k;
    p.num_queries = a.queries;
    p.seed = a.seed;
    p.timeout = std::chrono::milliseconds(a.timeout_ms);
    const auto idx = store::load_index(resolve_index_dir(a.index));
    const auto report = run_bench(idx.view(), p);
    write_bench_summary(out, report, !a.no_timing);
    if (!a.out_prefix.empty()) {
        std::ofstream summary(a.out_prefix + ".txt"), table(a.out_prefix + ".tsv");
        if (!summary || !table) throw Error(ErrorCode::io_error, "cannot write " + a.out_prefix + ".{txt,tsv}");
        write_bench_summary(summary, report, !a.no_timing);
        write_bench_table(table, report, !a.no_timing);
    }
    return kExitOk;
}

inline int cmd_gen(const GenArgs& a, std::ostream& out) {
    Graph g;
    if (a.kind == "grid") {
        VertexId side = 1;
        while (side * side < a.vertices) ++side;
        g = grid_graph(side, side, a.seed);
    } else if (a.kind == "random") {
        g = random_graph(a.vertices, a.links, a.seed);
    } else {
        throw Error(ErrorCode::invalid_argument, "kind must be grid or random");
    }
    std::ofstream file;
    if (!a.out.empty()) {
        file.open(a.out);
        if (!file) throw Error(ErrorCode::io_error, "cannot write " + a.out);
    }
    std::ostream& dst = a.out.empty() ? out : file;
    for (VertexId u = 0; u < g.vertex_count(); ++u)
        for (const auto& arc : g.out_arcs(u))
            if (g.directed() || u < arc.target) dst << u << ' ' << arc.target << ' ' << arc.weight << "\n";
    return kExitOk;
}

}  // namespace detail

/// Entry point of the `kosr` tool: build | query | update | bench | gen.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Top-k optimal sequenced routes over 2-hop label indexes", "kosr"};
    app.require_subcommand(1);

    detail::BuildArgs build;
    auto* b = app.add_subcommand("build", "Build label, inverted and category indexes into a directory");
    b->add_option("--graph", build.graph, "Edge list (u v w lines or DIMACS .gr)")->required();
    b->add_flag("--undirected", build.undirected, "Treat every record as an undirected edge");
    b->add_option("--categories", build.categories, "Category file (v c lines)");
    b->add_option("--uniform", build.uniform, "Generate this many uniform categories");
    b->add_option("--size", build.size, "Members per uniform category");
    b->add_option("--zipf", build.zipf, "Generate this many Zipf-sized categories covering every vertex");
    b->add_option("--factor", build.factor, "Zipf factor f >= 1 (larger is less skewed)");
    b->add_option("--seed", build.seed, "Generator seed");
    b->add_option("--out,--index", build.out, "Index directory (default $KOSR_INDEX_DIR)");

    detail::QueryArgs query;
    auto* q = app.add_subcommand("query", "Answer one (s, t, C, k) query");
    q->add_option("--index", query.index, "Index directory (default $KOSR_INDEX_DIR)");
    q->add_option("-s,--source", query.source, "Source vertex name")->required();
    q->add_option("-t,--target", query.target, "Destination vertex name")->required();
    q->add_option("-c,--categories", query.sequence, "Comma-separated category sequence")->required();
    q->add_option("-k", query.k, "Number of routes")->required();
    q->add_option("-e,--engine", query.engine, "kpne | pk | sk | kpne-dij | pk-dij | sk-dij");
    q->add_option("--mode", query.mode, "mem | disk");
    q->add_flag("--expand", query.expand, "Also print the full vertex route of each witness");
    q->add_flag("--stats", query.stats, "Print search counters to stderr");

    detail::UpdateArgs update;
    auto* u = app.add_subcommand("update", "Add or remove one category membership");
    u->add_option("--index", update.index, "Index directory (default $KOSR_INDEX_DIR)");
    u->add_option("op", update.op, "add | remove")->required();
    u->add_option("vertex", update.vertex, "Vertex name")->required();
    u->add_option("category", update.category, "Category name")->required();

    detail::BenchArgs bench;
    auto* be = app.add_subcommand("bench", "Run a random query batch and report averaged counters");
    be->add_option("--index", bench.index, "Index directory (default $KOSR_INDEX_DIR)");
    be->add_option("--engines", bench.engines, "Comma-separated engines");
    be->add_option("--queries", bench.queries, "Batch size");
    be->add_option("--length", bench.length, "Category sequence length |C|");
    be->add_option("-k", bench.k, "Routes per query");
    be->add_option("--seed", bench.seed, "Query generator seed");
    be->add_option("--timeout-ms", bench.timeout_ms, "Per-query timeout");
    be->add_option("--out-prefix", bench.out_prefix, "Also write <prefix>.txt and <prefix>.tsv");
    be->add_flag("--no-timing", bench.no_timing, "Leave runtimes out so reports compare byte for byte");

    detail::GenArgs gen;
    auto* ge = app.add_subcommand("gen", "Write a synthetic undirected graph as an edge list");
    ge->add_option("--kind", gen.kind, "grid | random");
    ge->add_option("--vertices", gen.vertices, "Approximate vertex count");
    ge->add_option("--links", gen.links, "Edges added per vertex (random)");
    ge->add_option("--seed", gen.seed, "Seed");
    ge->add_option("--out", gen.out, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUser;
    }

    try {
        if (*b) return detail::cmd_build(build, out);
        if (*q) return detail::cmd_query(query, out, err);
        if (*u) return detail::cmd_update(update, out, err);
        if (*be) return detail::cmd_bench(bench, out);
        if (*ge) return detail::cmd_gen(gen, out);
    } catch (const Error& e) {
        err << "kosr: " << e.what() << "\n";
        return detail::exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "kosr: internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUser;
}

}  // namespace kosr::cli
