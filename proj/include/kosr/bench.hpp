#pragma once

// Batch benchmark harness: random query batches over prebuilt indexes,
// per-engine aggregation of the query counters, and the two report formats.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kosr/engines.hpp"

namespace kosr {

struct BenchParams {
    std::size_t sequence_length = 3;  // |C|
    std::size_t k = 10;
    std::vector<EngineKind> engines;
    std::size_t num_queries = 50;
    std::uint64_t seed = 1;
    std::chrono::milliseconds timeout{60'000};
};

struct BenchQueryRecord {
    std::size_t query_index;
    QueryStats stats;
};

struct EngineSummary {
    EngineKind engine;
    std::vector<BenchQueryRecord> records;
    bool inf = false;  // some query hit the timeout

    std::uint64_t total_examined() const {
        return std::accumulate(records.begin(), records.end(), std::uint64_t{0},
                               [](std::uint64_t a, const BenchQueryRecord& r) { return a + r.stats.examined_routes; });
    }
    std::uint64_t total_nn_queries() const {
        return std::accumulate(records.begin(), records.end(), std::uint64_t{0},
                               [](std::uint64_t a, const BenchQueryRecord& r) { return a + r.stats.nn_queries; });
    }
    std::chrono::nanoseconds total_runtime() const {
        std::chrono::nanoseconds t{0};
        for (const auto& r : records) t += r.stats.runtime;
        return t;
    }
    double mean_examined() const { return records.empty() ? 0.0 : double(total_examined()) / double(records.size()); }
    double mean_nn_queries() const { return records.empty() ? 0.0 : double(total_nn_queries()) / double(records.size()); }
    double mean_runtime_ms() const {
        return records.empty() ? 0.0 : double(total_runtime().count()) / 1e6 / double(records.size());
    }
};

struct BenchReport {
    BenchParams params;
    std::vector<Query> queries;
    std::vector<EngineSummary> engines;
};

/// Random (s, t, C, k) batch: endpoints uniform over vertices, sequence drawn
/// without repetition while enough categories exist.
inline std::vector<Query> random_queries(const CategoryMap& cm, std::size_t count, std::size_t sequence_length,
                                         std::size_t k, std::uint64_t seed) {
    if (cm.category_count() == 0) throw Error(ErrorCode::invalid_argument, "no categories to query");
    if (cm.vertex_count() == 0) throw Error(ErrorCode::invalid_argument, "empty graph");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<VertexId> vertex(0, cm.vertex_count() - 1);
    std::vector<CategoryId> pool(cm.category_count());
    std::iota(pool.begin(), pool.end(), CategoryId{0});
    std::vector<Query> out;
    for (std::size_t i = 0; i < count; ++i) {
        Query q;
        q.source = vertex(rng);
        q.target = vertex(rng);
        q.k = k;
        std::shuffle(pool.begin(), pool.end(), rng);
        for (std::size_t j = 0; j < sequence_length; ++j) q.categories.push_back(pool[j % pool.size()]);
        out.push_back(std::move(q));
    }
    return out;
}

/// Runs every engine over the batch (or over `queries` when given).
inline BenchReport run_bench(const IndexView& view, const BenchParams& params, std::vector<Query> queries = {}) {
    if (params.engines.empty()) throw Error(ErrorCode::invalid_argument, "engine list is empty");
    BenchReport report;
    report.params = params;
    report.queries = queries.empty()
                         ? random_queries(*view.categories, params.num_queries, params.sequence_length, params.k, params.seed)
                         : std::move(queries);
    report.params.num_queries = report.queries.size();
    for (const EngineKind engine : params.engines) {
        EngineSummary summary{engine, {}, false};
        for (std::size_t i = 0; i < report.queries.size(); ++i) {
            QueryOptions options;
            options.deadline = std::chrono::steady_clock::now() + params.timeout;
            auto result = run_query(view, engine, report.queries[i], options);
            summary.inf = summary.inf || result.stats.timed_out;
            summary.records.push_back({i, std::move(result.stats)});
        }
        report.engines.push_back(std::move(summary));
    }
    return report;
}

/// key=value lines, one block per engine. Timing fields are left out when
/// `with_timing` is false.
inline void write_bench_summary(std::ostream& out, const BenchReport& r, bool with_timing = true) {
    out << "sequence_length=" << r.params.sequence_length << "\n"
        << "k=" << r.params.k << "\n"
        << "num_queries=" << r.params.num_queries << "\n"
        << "seed=" << r.params.seed << "\n"
        << "timeout_ms=" << r.params.timeout.count() << "\n";
    out << std::fixed << std::setprecision(3);
    for (const auto& e : r.engines) {
        const std::string p = to_string(e.engine) + ".";
        out << p << "inf=" << (e.inf ? 1 : 0) << "\n"
            << p << "queries=" << e.records.size() << "\n"
            << p << "total_examined_routes=" << e.total_examined() << "\n"
            << p << "total_nn_queries=" << e.total_nn_queries() << "\n"
            << p << "mean_examined_routes=" << e.mean_examined() << "\n"
            << p << "mean_nn_queries=" << e.mean_nn_queries() << "\n";
        if (with_timing) out << p << "mean_runtime_ms=" << (e.inf ? std::string("INF") : std::to_string(e.mean_runtime_ms())) << "\n";
    }
}

/// Tab-separated per-query table with a header row.
inline void write_bench_table(std::ostream& out, const BenchReport& r, bool with_timing = true) {
    out << "engine\tquery\tsource\ttarget\tsequence\tk\texamined_routes\tnn_queries\tresults\ttimed_out";
    if (with_timing) out << "\truntime_ns";
    out << "\n";
    for (const auto& e : r.engines) {
        for (const auto& rec : e.records) {
            const Query& q = r.queries[rec.query_index];
            std::ostringstream seq;
            for (std::size_t i = 0; i < q.categories.size(); ++i) seq << (i ? "," : "") << q.categories[i];
            out << to_string(e.engine) << '\t' << rec.query_index << '\t' << q.source << '\t' << q.target << '\t'
                << seq.str() << '\t' << q.k << '\t' << rec.stats.examined_routes << '\t' << rec.stats.nn_queries << '\t'
                << rec.stats.result_costs.size() << '\t' << (rec.stats.timed_out ? 1 : 0);
            if (with_timing) out << '\t' << rec.stats.runtime.count();
            out << "\n";
        }
    }
}

}  // namespace kosr
