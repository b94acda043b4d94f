#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "kosr/cli.hpp"
#include "support.hpp"

using namespace kosr;
using kosr::testing::TempDir;
namespace fs = std::filesystem;

namespace {

const std::string kData = KOSR_DATA_DIR;

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run kosr_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "kosr");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

Run build_fig1(const fs::path& dir, const std::string& categories = kData + "/fig1.cat") {
    return kosr_cli({"build", "--graph", kData + "/fig1.gr", "--categories", categories, "--out", dir.string()});
}

std::map<std::string, std::string> files_of(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (name == store::kLockFile) continue;
        std::ifstream in(e.path(), std::ios::binary);
        out[name] = std::string(std::istreambuf_iterator<char>(in), {});
    }
    return out;
}

std::size_t stat_value(const std::string& err, const std::string& key) {
    const auto at = err.find(key + "=");
    if (at == std::string::npos) return SIZE_MAX;
    return std::stoul(err.substr(at + key.size() + 1));
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

}  // namespace

TEST(CliBuild, Fig1WritesOneSegmentPerCategory) {
    TempDir dir;
    const auto r = build_fig1(dir.path());
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("vertices=8\n"), std::string::npos);
    EXPECT_NE(r.out.find("arcs=56\n"), std::string::npos);
    EXPECT_NE(r.out.find("categories=3\n"), std::string::npos);
    std::size_t segments = 0;
    for (const auto& [name, bytes] : files_of(dir.path()))
        if (name.ends_with(".seg")) ++segments;
    EXPECT_EQ(segments, 3u);
    EXPECT_TRUE(fs::exists(dir / store::kManifestFile));
}

TEST(CliBuild, RebuildIsByteIdentical) {
    TempDir a, b;
    ASSERT_EQ(build_fig1(a.path()).code, 0);
    ASSERT_EQ(build_fig1(b.path()).code, 0);
    EXPECT_EQ(files_of(a.path()), files_of(b.path()));
}

TEST(CliBuild, MissingGraphFileFails) {
    TempDir dir;
    const auto r = kosr_cli({"build", "--graph", (dir / "nope.gr").string(), "--uniform", "2", "--size", "1",
                             "--out", dir.path().string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("kosr: "), std::string::npos);
    EXPECT_FALSE(fs::exists(dir / store::kManifestFile));
}

TEST(CliBuild, MalformedGraphFileFails) {
    TempDir dir;
    write_text(dir / "bad.gr", "a b 1\na b -4\n");
    const auto r = kosr_cli({"build", "--graph", (dir / "bad.gr").string(), "--uniform", "1", "--size", "1",
                             "--out", (dir / "idx").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("line 2"), std::string::npos);
}

TEST(CliQuery, Fig1StarOutput) {
    TempDir dir;
    ASSERT_EQ(build_fig1(dir.path()).code, 0);
    const auto r = kosr_cli({"query", "--index", dir.path().string(), "-s", "s", "-t", "t", "-c", "MA,RE,CI", "-k", "2",
                             "-e", "sk"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "1 20 s,a,b,d,t\n2 21 s,a,e,d,t\n");
}

TEST(CliQuery, ExpandPrintsFullRoutes) {
    TempDir dir;
    ASSERT_EQ(build_fig1(dir.path()).code, 0);
    for (const std::string mode : {"mem", "disk"}) {
        const auto r = kosr_cli({"query", "--index", dir.path().string(), "-s", "s", "-t", "t", "-c", "MA,RE,CI", "-k",
                                 "1", "--mode", mode, "--expand"});
        ASSERT_EQ(r.code, 0) << r.err;
        EXPECT_EQ(r.out.rfind("1 20 s,a,b,d,t\n  route s,", 0), 0u) << r.out;
    }
}

TEST(CliQuery, DiskModeMatchesMemoryModeWithBoundedReads) {
    TempDir dir;
    ASSERT_EQ(build_fig1(dir.path()).code, 0);
    for (const auto engine : all_engines()) {
        for (const std::string seq : {"MA,RE,CI", "CI,MA", "RE,RE,MA,CI"}) {
            std::vector<std::string> args{"query", "--index", dir.path().string(), "-s", "b", "-t", "f", "-c", seq,
                                          "-k", "5", "-e", to_string(engine), "--stats"};
            const auto mem = kosr_cli(args);
            args.push_back("--mode");
            args.push_back("disk");
            const auto disk = kosr_cli(args);
            ASSERT_EQ(mem.code, 0) << mem.err;
            ASSERT_EQ(disk.code, 0) << disk.err;
            EXPECT_EQ(mem.out, disk.out) << to_string(engine) << " " << seq;
            const std::size_t len = std::count(seq.begin(), seq.end(), ',') + 1;
            EXPECT_LE(stat_value(disk.err, "segment_reads"), len + 4) << to_string(engine);
            EXPECT_EQ(stat_value(disk.err, "segment_read_limit"), len + 4);
        }
    }
}

TEST(CliQuery, InvalidRequestsExitWithOne) {
    TempDir dir;
    ASSERT_EQ(build_fig1(dir.path()).code, 0);
    auto query = [&](std::string s, std::string c, std::string k, std::string mode) {
        return kosr_cli({"query", "--index", dir.path().string(), "-s", s, "-t", "t", "-c", c, "-k", k, "--mode", mode});
    };
    for (const std::string mode : {"mem", "disk"}) {
        const auto zero = query("s", "MA", "0", mode);
        EXPECT_EQ(zero.code, 1);
        EXPECT_TRUE(zero.out.empty());
        const auto category = query("s", "MA,ZZ", "2", mode);
        EXPECT_EQ(category.code, 1);
        EXPECT_NE(category.err.find("UnknownCategory"), std::string::npos) << category.err;
        const auto vertex = query("q", "MA", "2", mode);
        EXPECT_EQ(vertex.code, 1);
        EXPECT_NE(vertex.err.find("UnknownVertex"), std::string::npos) << vertex.err;
    }
    EXPECT_EQ(kosr_cli({"query", "--index", dir.path().string(), "-s", "s", "-t", "t", "-c", "MA", "-k", "1", "-e", "bfs"})
                  .code,
              1);
}

TEST(CliQuery, MissingIndexIsAnError) {
    TempDir dir;
    const auto r = kosr_cli({"query", "--index", (dir / "none").string(), "-s", "s", "-t", "t", "-c", "MA", "-k", "1"});
    EXPECT_NE(r.code, 0);
}

TEST(CliQuery, CorruptManifestIsAFormatError) {
    TempDir dir;
    ASSERT_EQ(build_fig1(dir.path()).code, 0);
    {
        std::fstream f(dir / store::kManifestFile, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(20);
        f.put('\x7f');
    }
    const auto r = kosr_cli({"query", "--index", dir.path().string(), "-s", "s", "-t", "t", "-c", "MA", "-k", "1"});
    EXPECT_EQ(r.code, 2);
}

TEST(CliIndexDir, EnvironmentVariableSuppliesTheDirectory) {
    TempDir dir;
    ::setenv("KOSR_INDEX_DIR", dir.path().c_str(), 1);
    const auto built = kosr_cli({"build", "--graph", kData + "/fig1.gr", "--categories", kData + "/fig1.cat"});
    const auto r = kosr_cli({"query", "-s", "s", "-t", "t", "-c", "MA,RE,CI", "-k", "1"});
    ::unsetenv("KOSR_INDEX_DIR");
    ASSERT_EQ(built.code, 0) << built.err;
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "1 20 s,a,b,d,t\n");
    EXPECT_EQ(kosr_cli({"query", "-s", "s", "-t", "t", "-c", "MA", "-k", "1"}).code, 1);
}

TEST(CliUpdate, AddThenQueryMatchesRebuild) {
    TempDir updated, rebuilt;
    ASSERT_EQ(build_fig1(updated.path()).code, 0);
    const auto add = kosr_cli({"update", "--index", updated.path().string(), "add", "t", "RE"});
    ASSERT_EQ(add.code, 0) << add.err;
    EXPECT_EQ(add.out, "add t RE\n");

    write_text(rebuilt / "cats", "a MA\nc MA\nb RE\ne RE\nd CI\nf CI\nt RE\n");
    ASSERT_EQ(build_fig1(rebuilt / "idx", (rebuilt / "cats").string()).code, 0);
    for (const std::string mode : {"mem", "disk"})
        for (const std::string seq : {"MA,RE,CI", "RE,CI", "CI,RE"}) {
            auto q = [&](const fs::path& d) {
                return kosr_cli({"query", "--index", d.string(), "-s", "s", "-t", "a", "-c", seq, "-k", "6", "--mode",
                                 mode});
            };
            const auto a = q(updated.path()), b = q(rebuilt / "idx");
            ASSERT_EQ(a.code, 0) << a.err;
            EXPECT_EQ(a.out, b.out) << mode << " " << seq;
        }
}

TEST(CliUpdate, RemoveThenQueryDropsTheMember) {
    TempDir dir;
    ASSERT_EQ(build_fig1(dir.path()).code, 0);
    ASSERT_EQ(kosr_cli({"update", "--index", dir.path().string(), "remove", "a", "MA"}).code, 0);
    const auto r = kosr_cli({"query", "--index", dir.path().string(), "-s", "s", "-t", "t", "-c", "MA,RE,CI", "-k", "1",
                             "--mode", "disk"});
    EXPECT_EQ(r.out, "1 22 s,c,b,d,t\n");
}

TEST(CliUpdate, NoOpWarnsAndSucceeds) {
    TempDir dir;
    ASSERT_EQ(build_fig1(dir.path()).code, 0);
    const auto before = files_of(dir.path());
    const auto r = kosr_cli({"update", "--index", dir.path().string(), "remove", "s", "MA"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.err.find("warning"), std::string::npos);
    EXPECT_EQ(files_of(dir.path()), before);
    EXPECT_EQ(kosr_cli({"update", "--index", dir.path().string(), "add", "a", "MA"}).code, 0);
    EXPECT_EQ(kosr_cli({"update", "--index", dir.path().string(), "add", "zz", "MA"}).code, 1);
    EXPECT_EQ(kosr_cli({"update", "--index", dir.path().string(), "add", "a", "ZZ"}).code, 1);
    EXPECT_EQ(kosr_cli({"update", "--index", dir.path().string(), "move", "a", "MA"}).code, 1);
}

TEST(CliUpdate, InterruptedUpdateLeavesThePreviousIndexReadable) {
    TempDir dir;
    ASSERT_EQ(build_fig1(dir.path()).code, 0);
    const auto manifest = store::read_manifest(dir.path());
    // The state after a crash before the manifest swap: new segment and a temp file exist, manifest is old.
    write_text(dir / store::detail::segment_file_name(0, manifest.generation + 1), "partial");
    write_text(dir / (std::string(store::kManifestFile) + ".tmp"), "partial");
    const auto r = kosr_cli({"query", "--index", dir.path().string(), "-s", "s", "-t", "t", "-c", "MA,RE,CI", "-k", "2",
                             "--mode", "disk"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "1 20 s,a,b,d,t\n2 21 s,a,e,d,t\n");

    ASSERT_EQ(kosr_cli({"update", "--index", dir.path().string(), "add", "t", "MA"}).code, 0);
    const auto after = store::read_manifest(dir.path());
    EXPECT_EQ(after.generation, manifest.generation + 1);
    EXPECT_NE(after.categories[0].file, manifest.categories[0].file);
    EXPECT_FALSE(fs::exists(dir / manifest.categories[0].file));
    EXPECT_FALSE(fs::exists(dir / (std::string(store::kManifestFile) + ".tmp")));
    EXPECT_EQ(kosr_cli({"query", "--index", dir.path().string(), "-s", "s", "-t", "t", "-c", "MA", "-k", "2"}).out,
              "1 17 s,c,t\n2 17 s,t,t\n");
}

TEST(Manifest, RoundTripIsByteIdentical) {
    TempDir dir;
    ASSERT_EQ(build_fig1(dir.path()).code, 0);
    const auto m = store::read_manifest(dir.path());
    io::ByteWriter w;
    m.write(w);
    std::ifstream in(dir / store::kManifestFile, std::ios::binary);
    const std::string disk(std::istreambuf_iterator<char>(in), {});
    EXPECT_EQ(std::string(w.bytes().begin(), w.bytes().end()), disk);
    EXPECT_EQ(m.vertex_count, 8u);
    EXPECT_EQ(m.categories.size(), 3u);
    EXPECT_EQ(m.categories[1].name, "RE");
    EXPECT_EQ(m.categories[1].member_count, 2u);
}

TEST(LoadIndex, MatchesTheInMemoryBuild) {
    TempDir dir;
    ASSERT_EQ(build_fig1(dir.path()).code, 0);
    const auto idx = store::load_index(dir.path());
    const auto fx = fixture_fig1();
    const auto labels = build_labels(idx.graph);
    EXPECT_TRUE(idx.labels == labels);
    for (CategoryId c = 0; c < 3; ++c) {
        const auto name = idx.categories.name(c);
        std::vector<std::string> got, want;
        for (VertexId v : idx.categories.members(c)) got.push_back(idx.names.name(v));
        for (VertexId v : fx.categories.members(fx.category(name))) want.push_back(fx.names.name(v));
        std::sort(got.begin(), got.end());
        std::sort(want.begin(), want.end());
        EXPECT_EQ(got, want) << name;
    }
}

TEST(CliBench, ReportIsReproducibleForTheSameSeed) {
    TempDir dir;
    ASSERT_EQ(build_fig1(dir.path()).code, 0);
    auto bench = [&](const std::string& seed, const fs::path& prefix) {
        return kosr_cli({"bench", "--index", dir.path().string(), "--engines", "kpne,pk,sk", "--queries", "50",
                         "--length", "3", "-k", "3", "--seed", seed, "--no-timing", "--out-prefix", prefix.string()});
    };
    const auto a = bench("5", dir / "a"), b = bench("5", dir / "b"), c = bench("6", dir / "c");
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out, c.out);
    EXPECT_NE(a.out.find("sk.queries=50\n"), std::string::npos);
    EXPECT_EQ(files_of(dir.path())["a.tsv"], files_of(dir.path())["b.tsv"]);
    EXPECT_EQ(files_of(dir.path())["a.txt"], a.out);
}

TEST(CliBench, EmptyEngineListFails) {
    TempDir dir;
    ASSERT_EQ(build_fig1(dir.path()).code, 0);
    const auto r = kosr_cli({"bench", "--index", dir.path().string(), "--engines", ""});
    EXPECT_EQ(r.code, 1);
    EXPECT_TRUE(r.out.empty());
}

TEST(CliGen, WritesALoadableEdgeList) {
    TempDir dir;
    const auto gen = kosr_cli({"gen", "--kind", "grid", "--vertices", "25", "--seed", "3", "--out", (dir / "g.txt").string()});
    ASSERT_EQ(gen.code, 0);
    std::ifstream in(dir / "g.txt");
    const auto g = load_graph(in, false);
    EXPECT_EQ(g.graph.vertex_count(), 25u);
    EXPECT_EQ(g.graph.arc_count(), 2u * 40);
}

TEST(Cli, UsageErrors) {
    EXPECT_NE(kosr_cli({}).code, 0);
    EXPECT_NE(kosr_cli({"frobnicate"}).code, 0);
    EXPECT_EQ(kosr_cli({"--help"}).code, 0);
}
