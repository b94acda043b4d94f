#pragma once

// Index directory layout:
//   manifest.bin          offsets, names and segment descriptors (loaded whole)
//   labels.<gen>.dat      landmark order, every L_in list, every L_out list
//   cat.<id>.<gen>.seg    one per category: members, IL(C), L_out of each member
//   graph.bin             the graph, for the Dijkstra engine variants
//   vertices.txt          dense id -> original vertex name, one per line
//   .lock                 flock target: exclusive for writers, shared for readers
//
// The manifest is always replaced by write-new, fsync, rename.

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "kosr/binary_io.hpp"
#include "kosr/category_index.hpp"
#include "kosr/engines.hpp"
#include "kosr/graph.hpp"
#include "kosr/hop_labeling.hpp"

namespace kosr::store {

namespace fs = std::filesystem;

inline constexpr const char* kManifestFile = "manifest.bin";
inline constexpr const char* kGraphFile = "graph.bin";
inline constexpr const char* kNamesFile = "vertices.txt";
inline constexpr const char* kLockFile = ".lock";

struct CategorySegment {
    CategoryId id = 0;
    std::string name;
    std::string file;
    std::uint64_t length = 0;
    std::uint32_t member_count = 0;
    std::uint64_t checksum = 0;

    friend bool operator==(const CategorySegment&, const CategorySegment&) = default;
};

struct Manifest {
    static constexpr std::uint32_t kVersion = 1;

    std::uint64_t generation = 1;
    VertexId vertex_count = 0;
    bool directed = true;
    bool symmetric = false;
    std::vector<std::string> vertex_names;
    std::string labels_file;
    std::uint64_t landmark_offset = 0;
    std::uint64_t landmark_length = 0;
    std::vector<std::uint64_t> in_offsets;   // vertex_count + 1 positions in labels_file
    std::vector<std::uint64_t> out_offsets;  // empty when symmetric
    std::vector<CategorySegment> categories;

    friend bool operator==(const Manifest&, const Manifest&) = default;

    const CategorySegment& segment(CategoryId c) const {
        if (c >= categories.size()) throw Error(ErrorCode::unknown_category, "category id " + std::to_string(c));
        return categories[c];
    }

    void write(io::ByteWriter& w) const {
        w.raw("KOSRMAN1");
        w.u32(kVersion);
        w.u64(generation);
        w.u32(vertex_count);
        w.u8(directed ? 1 : 0);
        w.u8(symmetric ? 1 : 0);
        for (const auto& n : vertex_names) w.str(n);
        w.str(labels_file);
        w.u64(landmark_offset);
        w.u64(landmark_length);
        for (auto o : in_offsets) w.u64(o);
        for (auto o : out_offsets) w.u64(o);
        w.u32(static_cast<std::uint32_t>(categories.size()));
        for (const auto& c : categories) {
            w.u32(c.id);
            w.str(c.name);
            w.str(c.file);
            w.u64(c.length);
            w.u32(c.member_count);
            w.u64(c.checksum);
        }
        w.u64(io::fnv1a(w.bytes()));
    }

    static Manifest read(std::span<const char> bytes) {
        if (bytes.size() < 8) throw Error(ErrorCode::format_error, "manifest truncated");
        io::ByteReader tail(bytes.subspan(bytes.size() - 8));
        if (tail.u64() != io::fnv1a(bytes.first(bytes.size() - 8)))
            throw Error(ErrorCode::format_error, "manifest checksum mismatch");
        io::ByteReader r(bytes.first(bytes.size() - 8));
        if (r.raw(8) != "KOSRMAN1") throw Error(ErrorCode::format_error, "not a manifest");
        if (r.u32() != kVersion) throw Error(ErrorCode::format_error, "unsupported manifest version");
        Manifest m;
        m.generation = r.u64();
        m.vertex_count = r.u32();
        m.directed = r.u8() != 0;
        m.symmetric = r.u8() != 0;
        m.vertex_names.resize(m.vertex_count);
        for (auto& n : m.vertex_names) n = r.str();
        m.labels_file = r.str();
        m.landmark_offset = r.u64();
        m.landmark_length = r.u64();
        m.in_offsets.resize(std::size_t{m.vertex_count} + 1);
        for (auto& o : m.in_offsets) o = r.u64();
        if (!m.symmetric) {
            m.out_offsets.resize(std::size_t{m.vertex_count} + 1);
            for (auto& o : m.out_offsets) o = r.u64();
        }
        m.categories.resize(r.u32());
        for (auto& c : m.categories) {
            c.id = r.u32();
            c.name = r.str();
            c.file = r.str();
            c.length = r.u64();
            c.member_count = r.u32();
            c.checksum = r.u64();
        }
        if (!r.done()) throw Error(ErrorCode::format_error, "trailing bytes in manifest");
        return m;
    }
};

/// Positioned reads against index files; every read is one seek.
struct IoCounters {
    std::uint64_t reads = 0;
    std::uint64_t bytes = 0;
};

namespace detail {

[[noreturn]] inline void io_fail(const std::string& what, const fs::path& p) {
    throw Error(ErrorCode::io_error, what + " " + p.string() + ": " + std::strerror(errno));
}

inline std::vector<char> read_range(const fs::path& p, std::uint64_t offset, std::uint64_t length, IoCounters* counters) {
    std::ifstream in(p, std::ios::binary);
    if (!in) io_fail("cannot open", p);
    in.seekg(static_cast<std::streamoff>(offset));
    std::vector<char> buf(length);
    in.read(buf.data(), static_cast<std::streamsize>(length));
    if (static_cast<std::uint64_t>(in.gcount()) != length)
        throw Error(ErrorCode::format_error, "short read from " + p.string());
    if (counters) {
        ++counters->reads;
        counters->bytes += length;
    }
    return buf;
}

inline std::vector<char> read_file(const fs::path& p, IoCounters* counters) {
    std::ifstream in(p, std::ios::binary);
    if (!in) io_fail("cannot open", p);
    auto bytes = io::read_all(in);
    if (counters) {
        ++counters->reads;
        counters->bytes += bytes.size();
    }
    return bytes;
}

inline void fsync_path(const fs::path& p, bool directory) {
    const int fd = ::open(p.c_str(), directory ? O_RDONLY | O_DIRECTORY : O_RDONLY);
    if (fd < 0) io_fail("cannot open", p);
    ::fsync(fd);
    ::close(fd);
}

/// Writes `bytes` to `path` through a temporary file, fsync and rename.
inline void write_file_atomic(const fs::path& path, std::span<const char> bytes) {
    const fs::path tmp = path.string() + ".tmp";
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) io_fail("cannot create", tmp);
    std::size_t done = 0;
    while (done < bytes.size()) {
        const auto n = ::write(fd, bytes.data() + done, bytes.size() - done);
        if (n < 0) {
            ::close(fd);
            io_fail("write failed for", tmp);
        }
        done += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0) {
        ::close(fd);
        io_fail("fsync failed for", tmp);
    }
    ::close(fd);
    if (std::rename(tmp.c_str(), path.c_str()) != 0) io_fail("rename failed for", tmp);
    fsync_path(path.parent_path().empty() ? fs::path(".") : path.parent_path(), true);
}

inline std::string labels_file_name(std::uint64_t gen) { return "labels." + std::to_string(gen) + ".dat"; }
inline std::string segment_file_name(CategoryId c, std::uint64_t gen) {
    return "cat." + std::to_string(c) + "." + std::to_string(gen) + ".seg";
}

inline std::vector<char> encode_segment(CategoryId c, std::span<const VertexId> members, const CategoryInvertedIndex& il,
                                        const LabelIndex& labels) {
    io::ByteWriter w;
    w.raw("KOSRSEG1");
    w.u32(c);
    w.u32(static_cast<std::uint32_t>(members.size()));
    for (VertexId v : members) w.u32(v);
    const auto hubs = il.hubs();
    w.u32(static_cast<std::uint32_t>(hubs.size()));
    for (VertexId hub : hubs) {
        const auto list = il.list(hub);
        w.u32(hub);
        w.u32(static_cast<std::uint32_t>(list.size()));
        for (const auto& e : list) {
            w.u32(e.member);
            w.i64(e.dist);
        }
    }
    for (VertexId v : members) LabelIndex::write_list(w, labels.out(v));
    return std::move(w.bytes());
}

struct DecodedSegment {
    std::vector<VertexId> members;
    CategoryInvertedIndex inverted;
    std::vector<std::vector<LabelEntry>> member_out;  // parallel to members
};

inline DecodedSegment decode_segment(std::span<const char> bytes, CategoryId expected) {
    io::ByteReader r(bytes);
    if (r.raw(8) != "KOSRSEG1") throw Error(ErrorCode::format_error, "not a category segment");
    if (r.u32() != expected) throw Error(ErrorCode::format_error, "category segment id mismatch");
    DecodedSegment s;
    s.members.resize(r.u32());
    for (auto& v : s.members) v = r.u32();
    const std::uint32_t hubs = r.u32();
    for (std::uint32_t i = 0; i < hubs; ++i) {
        const VertexId hub = r.u32();
        std::vector<InvertedEntry> list(r.u32());
        for (auto& e : list) {
            e.member = r.u32();
            e.dist = r.i64();
        }
        s.inverted.assign(hub, std::move(list));
    }
    s.member_out.resize(s.members.size());
    for (auto& l : s.member_out) l = LabelIndex::read_list(r);
    if (!r.done()) throw Error(ErrorCode::format_error, "trailing bytes in category segment");
    return s;
}

inline std::vector<LabelEntry> decode_list(std::span<const char> bytes) {
    io::ByteReader r(bytes);
    auto list = LabelIndex::read_list(r);
    if (!r.done()) throw Error(ErrorCode::format_error, "label list length mismatch");
    return list;
}

inline CategorySegment write_segment(const fs::path& dir, const std::string& name, CategoryId c,
                                     std::span<const VertexId> members, const CategoryInvertedIndex& il,
                                     const LabelIndex& labels, std::uint64_t gen) {
    const auto bytes = encode_segment(c, members, il, labels);
    CategorySegment seg{c, name, segment_file_name(c, gen), bytes.size(), static_cast<std::uint32_t>(members.size()),
                        io::fnv1a(bytes)};
    write_file_atomic(dir / seg.file, bytes);
    return seg;
}

inline void remove_unreferenced(const fs::path& dir, const Manifest& m) {
    std::set<std::string> keep{m.labels_file};
    for (const auto& c : m.categories) keep.insert(c.file);
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        const bool ours = (name.starts_with("cat.") && name.ends_with(".seg")) ||
                          (name.starts_with("labels.") && name.ends_with(".dat")) || name.ends_with(".tmp");
        if (ours && !keep.contains(name)) fs::remove(entry.path());
    }
}

}  // namespace detail

/// Advisory directory lock held for the lifetime of the object.
class DirectoryLock {
public:
    DirectoryLock(const fs::path& dir, bool exclusive) {
        const fs::path p = dir / kLockFile;
        fd_ = ::open(p.c_str(), O_RDWR | O_CREAT, 0644);
        if (fd_ < 0 && !exclusive) fd_ = ::open(p.c_str(), O_RDONLY);
        if (fd_ < 0) detail::io_fail("cannot open lock", p);
        if (::flock(fd_, exclusive ? LOCK_EX : LOCK_SH) != 0) {
            ::close(fd_);
            detail::io_fail("cannot lock", p);
        }
    }
    ~DirectoryLock() {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }
    DirectoryLock(const DirectoryLock&) = delete;
    DirectoryLock& operator=(const DirectoryLock&) = delete;

private:
    int fd_ = -1;
};

inline Manifest read_manifest(const fs::path& dir, IoCounters* counters = nullptr) {
    const auto bytes = detail::read_file(dir / kManifestFile, counters);
    return Manifest::read(bytes);
}

inline void write_manifest(const fs::path& dir, const Manifest& m) {
    io::ByteWriter w;
    m.write(w);
    detail::write_file_atomic(dir / kManifestFile, w.bytes());
}

/// Writes a complete index directory for generation 1.
inline Manifest write_index(const fs::path& dir, const Graph& g, const VertexNames& names, const CategoryMap& cm,
                            const LabelIndex& labels, const InvertedLabelIndex& inverted) {
    fs::create_directories(dir);
    DirectoryLock lock(dir, true);
    Manifest m;
    m.generation = 1;
    m.vertex_count = g.vertex_count();
    m.directed = g.directed();
    m.symmetric = labels.symmetric();
    m.vertex_names = names.names();
    if (m.vertex_names.size() != m.vertex_count) throw Error(ErrorCode::invalid_argument, "name table size mismatch");

    {
        io::ByteWriter w;
        g.write(w);
        detail::write_file_atomic(dir / kGraphFile, w.bytes());
    }
    {
        std::string text;
        for (const auto& n : m.vertex_names) text += n + "\n";
        detail::write_file_atomic(dir / kNamesFile, std::span<const char>(text.data(), text.size()));
    }

    io::ByteWriter w;
    w.raw("KOSRLBL1");
    m.landmark_offset = w.size();
    w.u32(static_cast<std::uint32_t>(labels.landmark_order().size()));
    for (VertexId v : labels.landmark_order()) w.u32(v);
    m.landmark_length = w.size() - m.landmark_offset;
    auto lists = [&](bool out, std::vector<std::uint64_t>& offsets) {
        offsets.clear();
        for (VertexId v = 0; v < m.vertex_count; ++v) {
            offsets.push_back(w.size());
            LabelIndex::write_list(w, out ? labels.out(v) : labels.in(v));
        }
        offsets.push_back(w.size());
    };
    lists(false, m.in_offsets);
    if (!m.symmetric) lists(true, m.out_offsets);
    m.labels_file = detail::labels_file_name(m.generation);
    detail::write_file_atomic(dir / m.labels_file, w.bytes());

    for (CategoryId c = 0; c < cm.category_count(); ++c)
        m.categories.push_back(
            detail::write_segment(dir, cm.name(c), c, cm.members(c), inverted.at(c), labels, m.generation));
    write_manifest(dir, m);
    detail::remove_unreferenced(dir, m);
    return m;
}

/// Everything in an index directory, held in memory.
struct LoadedIndex {
    Manifest manifest;
    Graph graph;
    VertexNames names;
    CategoryMap categories{0};
    LabelIndex labels;
    InvertedLabelIndex inverted;

    IndexView view() const { return IndexView{&graph, &categories, &labels, &inverted}; }
};

inline VertexNames names_from(const Manifest& m) {
    VertexNames names;
    for (const auto& n : m.vertex_names) names.intern(n);
    return names;
}

inline LabelIndex read_all_labels(const fs::path& dir, const Manifest& m, IoCounters* counters) {
    const auto bytes = detail::read_file(dir / m.labels_file, counters);
    std::span<const char> all(bytes);
    if (all.size() < 8 || std::string_view(all.data(), 8) != "KOSRLBL1")
        throw Error(ErrorCode::format_error, "not a labels file");
    io::ByteReader lr(all.subspan(m.landmark_offset, m.landmark_length));
    std::vector<VertexId> order(lr.u32());
    for (auto& v : order) v = lr.u32();
    auto lists = [&](const std::vector<std::uint64_t>& offsets) {
        std::vector<std::vector<LabelEntry>> out(m.vertex_count);
        for (VertexId v = 0; v < m.vertex_count; ++v)
            out[v] = detail::decode_list(all.subspan(offsets[v], offsets[v + 1] - offsets[v]));
        return out;
    };
    auto in = lists(m.in_offsets);
    std::vector<std::vector<LabelEntry>> out;
    if (!m.symmetric) out = lists(m.out_offsets);
    return LabelIndex(std::move(in), std::move(out), std::move(order), m.symmetric);
}

inline detail::DecodedSegment read_segment(const fs::path& dir, const CategorySegment& seg, IoCounters* counters) {
    const auto bytes = detail::read_file(dir / seg.file, counters);
    if (bytes.size() != seg.length || io::fnv1a(bytes) != seg.checksum)
        throw Error(ErrorCode::format_error, "checksum mismatch in " + seg.file);
    return detail::decode_segment(bytes, seg.id);
}

inline Graph read_graph_file(const fs::path& dir, IoCounters* counters = nullptr) {
    const auto bytes = detail::read_file(dir / kGraphFile, counters);
    io::ByteReader r(bytes);
    return Graph::read(r);
}

/// Loads the full index into memory (the mem query mode).
inline LoadedIndex load_index(const fs::path& dir) {
    DirectoryLock lock(dir, false);
    LoadedIndex idx;
    idx.manifest = read_manifest(dir);
    idx.graph = read_graph_file(dir);
    idx.names = names_from(idx.manifest);
    idx.labels = read_all_labels(dir, idx.manifest, nullptr);
    idx.categories = CategoryMap(idx.manifest.vertex_count);
    idx.inverted = InvertedLabelIndex(idx.manifest.categories.size());
    for (const auto& seg : idx.manifest.categories) {
        if (idx.categories.add_category(seg.name) != seg.id) throw Error(ErrorCode::format_error, "category ids out of order");
        auto decoded = read_segment(dir, seg, nullptr);
        for (VertexId v : decoded.members) idx.categories.insert(v, seg.id);
        idx.inverted.set(seg.id, std::move(decoded.inverted));
    }
    return idx;
}

/// Disk query mode: the manifest is read once, then each query reads only the
/// label lists and category segments it touches.
class DiskIndex {
public:
    explicit DiskIndex(fs::path dir) : dir_(std::move(dir)), lock_(dir_, false) {
        manifest_ = read_manifest(dir_, &counters_);
        names_ = names_from(manifest_);
    }

    const Manifest& manifest() const { return manifest_; }
    const VertexNames& names() const { return names_; }
    const IoCounters& counters() const { return counters_; }

    std::optional<CategoryId> find_category(std::string_view name) const {
        for (const auto& c : manifest_.categories)
            if (c.name == name) return c.id;
        return std::nullopt;
    }

    /// Sparse indexes sufficient to answer `q` with `engine`.
    struct Prepared {
        CategoryMap categories{0};
        LabelIndex labels;
        InvertedLabelIndex inverted;
        Graph graph;

        IndexView view() const { return IndexView{&graph, &categories, &labels, &inverted}; }
    };

    Prepared prepare(const Query& q, EngineKind engine) {
        const VertexId n = manifest_.vertex_count;
        if (q.source >= n) throw Error(ErrorCode::unknown_vertex, "source " + std::to_string(q.source));
        if (q.target >= n) throw Error(ErrorCode::unknown_vertex, "target " + std::to_string(q.target));
        Prepared p;
        p.categories = CategoryMap(n);
        for (const auto& seg : manifest_.categories) p.categories.add_category(seg.name);
        p.inverted = InvertedLabelIndex(manifest_.categories.size());
        std::vector<std::vector<LabelEntry>> in(n), out(n);
        std::set<CategoryId> wanted(q.categories.begin(), q.categories.end());
        for (CategoryId c : wanted) {
            auto decoded = read_segment(dir_, manifest_.segment(c), &counters_);
            for (std::size_t i = 0; i < decoded.members.size(); ++i) {
                p.categories.insert(decoded.members[i], c);
                out[decoded.members[i]] = std::move(decoded.member_out[i]);
            }
            p.inverted.set(c, std::move(decoded.inverted));
        }
        if (engine.method == NeighborMethod::dijkstra) {
            p.graph = read_graph_file(dir_, &counters_);
            return p;
        }
        out[q.source] = read_list(manifest_.symmetric ? manifest_.in_offsets : manifest_.out_offsets, q.source);
        in[q.target] = read_list(manifest_.in_offsets, q.target);
        p.labels = LabelIndex(std::move(in), std::move(out), {}, false);
        return p;
    }

    /// Full labels for route expansion; these reads are tallied separately.
    LabelIndex load_all_labels() { return read_all_labels(dir_, manifest_, &expand_counters_); }
    const IoCounters& expand_counters() const { return expand_counters_; }

private:
    std::vector<LabelEntry> read_list(const std::vector<std::uint64_t>& offsets, VertexId v) {
        const auto bytes = detail::read_range(dir_ / manifest_.labels_file, offsets[v], offsets[v + 1] - offsets[v], &counters_);
        return detail::decode_list(bytes);
    }

    fs::path dir_;
    DirectoryLock lock_;
    Manifest manifest_;
    VertexNames names_;
    IoCounters counters_;
    IoCounters expand_counters_;
};

/// Applies one category membership change to the stored index: the affected
/// segment is written under the next generation, then the manifest is swapped.
inline UpdateOutcome update_category(const fs::path& dir, bool add, VertexId v, CategoryId c) {
    DirectoryLock lock(dir, true);
    Manifest m = read_manifest(dir);
    if (v >= m.vertex_count) throw Error(ErrorCode::unknown_vertex, "vertex " + std::to_string(v));
    const CategorySegment old = m.segment(c);
    auto decoded = read_segment(dir, old, nullptr);

    // Only L_in(v) and L_out(v) are needed besides the segment itself.
    std::vector<std::vector<LabelEntry>> in(m.vertex_count), out(m.vertex_count);
    auto list = [&](const std::vector<std::uint64_t>& offsets) {
        return detail::decode_list(
            detail::read_range(dir / m.labels_file, offsets[v], offsets[v + 1] - offsets[v], nullptr));
    };
    in[v] = list(m.in_offsets);
    out[v] = list(m.symmetric ? m.in_offsets : m.out_offsets);
    for (std::size_t i = 0; i < decoded.members.size(); ++i) out[decoded.members[i]] = decoded.member_out[i];
    LabelIndex labels(std::move(in), std::move(out), {}, false);

    CategoryMap cm(m.vertex_count);
    for (const auto& seg : m.categories) cm.add_category(seg.name);
    for (VertexId u : decoded.members) cm.insert(u, c);
    InvertedLabelIndex il(m.categories.size());
    il.set(c, std::move(decoded.inverted));

    const auto outcome = add ? add_vertex_category(cm, il, labels, v, c) : remove_vertex_category(cm, il, labels, v, c);
    if (outcome == UpdateOutcome::no_change) return outcome;

    m.generation += 1;
    m.categories[c] = detail::write_segment(dir, old.name, c, cm.members(c), il.at(c), labels, m.generation);
    write_manifest(dir, m);
    detail::remove_unreferenced(dir, m);
    return outcome;
}

}  // namespace kosr::store
