#include "gscan/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "gscan/error.hpp"
#include "gscan/io.hpp"
#include "gscan/random.hpp"
#include "json.hpp"

namespace gscan::dataset {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kModule = "dataset_pipeline";
constexpr std::string_view kRecordMagic = "GSCANREC";
constexpr std::uint32_t kRecordVersion = 1;
constexpr std::string_view kCorpusFormat = "gscan-corpus/1";

using OrderedJson = nlohmann::ordered_json;

} // namespace

std::string canonical_hash(const graph::CodeGraph& graph)
{
    return io::sha256_hex(graph.canonical_serialization());
}

DatasetRecord build_record(std::string id, const ast::AstDocument& doc, std::vector<std::size_t> vulnerable_lines,
                           Subtype subtype)
{
    DatasetRecord record;
    record.id = std::move(id);
    record.graph = graph::build_code_graph(doc);
    record.features = features::encode_graph(record.graph, doc);
    const ast::LineIndex index = ast::build_line_index(doc.source_bytes());
    record.line_count = index.line_count();
    std::sort(vulnerable_lines.begin(), vulnerable_lines.end());
    vulnerable_lines.erase(std::unique(vulnerable_lines.begin(), vulnerable_lines.end()), vulnerable_lines.end());
    const auto line_labels = labels::LineLabels::from_lines(record.line_count, vulnerable_lines);
    record.labels = labels::annotate_node_labels(record.graph.spans(), line_labels, doc.source_bytes());
    record.vulnerable_lines = std::move(vulnerable_lines);
    record.subtype = subtype;
    record.digest = canonical_hash(record.graph);
    return record;
}

Subtype infer_subtype(const ast::AstDocument& doc, const std::vector<std::size_t>& vulnerable_lines)
{
    const ast::LineIndex index = ast::build_line_index(doc.source_bytes());
    const std::set<std::size_t> marked(vulnerable_lines.begin(), vulnerable_lines.end());
    std::optional<Subtype> first_anywhere;
    for (const auto& node : doc.nodes()) {
        if (node.kind != "MemberAccess")
            continue;
        const auto member = node.string_attribute("memberName");
        const auto subtype = member ? synthetic::parse_subtype(*member) : std::nullopt;
        if (!subtype)
            continue;
        if (!first_anywhere)
            first_anywhere = subtype;
        const auto range = ast::span_to_lines(node.src, index);
        for (std::size_t line = range.first; line <= range.last; ++line)
            if (marked.contains(line))
                return *subtype;
    }
    return first_anywhere.value_or(Subtype::Call);
}

std::vector<DatasetRecord> deduplicate(std::vector<DatasetRecord> records)
{
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    std::set<std::string> seen;
    std::vector<DatasetRecord> out;
    out.reserve(records.size());
    for (auto& r : records)
        if (seen.insert(r.digest).second)
            out.push_back(std::move(r));
    return out;
}

std::string_view to_string(Split split)
{
    switch (split) {
    case Split::Train:
        return "train";
    case Split::Validation:
        return "validation";
    case Split::Test:
        return "test";
    }
    return "train";
}

std::optional<Split> parse_split(std::string_view text)
{
    for (const auto s : {Split::Train, Split::Validation, Split::Test})
        if (to_string(s) == text)
            return s;
    if (text == "val")
        return Split::Validation;
    return std::nullopt;
}

const std::vector<std::string>& SplitManifest::ids(Split split) const
{
    switch (split) {
    case Split::Train:
        return train;
    case Split::Validation:
        return validation;
    case Split::Test:
        return test;
    }
    return train;
}

std::optional<Split> SplitManifest::split_of(std::string_view id) const
{
    for (const auto s : {Split::Train, Split::Validation, Split::Test})
        if (std::find(ids(s).begin(), ids(s).end(), id) != ids(s).end())
            return s;
    return std::nullopt;
}

SplitManifest split(std::vector<std::string> ids, const SplitRatios& ratios, std::uint64_t seed)
{
    const double sum = ratios.train + ratios.validation + ratios.test;
    if (ratios.train < 0 || ratios.validation < 0 || ratios.test < 0 || !std::isfinite(sum)
        || std::abs(sum - 1.0) > 1e-9)
        throw Error(ErrorCode::BadRatios, kModule, "split ratios must be non-negative and sum to 1");

    std::sort(ids.begin(), ids.end());
    std::mt19937_64 rng(seed);
    shuffle(ids, rng);

    const auto n = ids.size();
    const auto n_train = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(n * ratios.train)));
    const auto n_val =
        std::min<std::size_t>(n - n_train, static_cast<std::size_t>(std::llround(n * ratios.validation)));

    SplitManifest m;
    m.seed = seed;
    m.ratios = ratios;
    m.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
    m.validation.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train),
                        ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    m.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), ids.end());
    return m;
}

std::string encode_record(const DatasetRecord& record)
{
    io::ByteWriter w;
    w.raw(kRecordMagic);
    w.u32(kRecordVersion);
    w.str(record.id);
    w.u8(static_cast<std::uint8_t>(record.subtype));
    w.str(record.digest);
    w.u64(record.line_count);
    w.u64(record.vulnerable_lines.size());
    for (const auto line : record.vulnerable_lines)
        w.u64(line);

    const auto& g = record.graph;
    w.u64(g.node_count());
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        w.i64(g.ast_ids()[i]);
        w.i64(g.spans()[i].start);
        w.i64(g.spans()[i].length);
        w.i64(g.spans()[i].file_index);
    }
    w.u64(g.edges().size());
    for (const auto& e : g.edges()) {
        w.u32(e.src);
        w.u32(e.dst);
    }
    w.u64(record.features.rows());
    for (const float v : record.features.values())
        w.f32(v);
    w.u64(record.labels.size());
    for (const auto l : record.labels)
        w.u8(l);
    const std::string digest = io::sha256_raw(w.bytes());
    w.raw(digest);
    return w.take();
}

DatasetRecord decode_record(std::string_view bytes)
{
    if (bytes.size() < kRecordMagic.size() + 32)
        throw Error(ErrorCode::BadCheckpoint, kModule, "record container too short");
    const auto body = bytes.substr(0, bytes.size() - 32);
    if (io::sha256_raw(body) != bytes.substr(bytes.size() - 32))
        throw Error(ErrorCode::BadCheckpoint, kModule, "record digest mismatch");

    io::ByteReader r(body, ErrorCode::BadCheckpoint, kModule);
    if (r.raw(kRecordMagic.size()) != kRecordMagic)
        r.fail("not a record container");
    if (const auto version = r.u32(); version != kRecordVersion)
        r.fail("unsupported record version " + std::to_string(version));

    DatasetRecord rec;
    rec.id = r.str();
    const auto subtype = r.u8();
    if (subtype > static_cast<std::uint8_t>(Subtype::Transfer))
        r.fail("bad subtype");
    rec.subtype = static_cast<Subtype>(subtype);
    rec.digest = r.str();
    rec.line_count = static_cast<std::size_t>(r.u64());
    rec.vulnerable_lines.resize(r.count(8));
    for (auto& line : rec.vulnerable_lines)
        line = static_cast<std::size_t>(r.u64());

    const auto nodes = r.count(32);
    std::vector<std::int64_t> ids(nodes);
    std::vector<ast::SourceSpan> spans(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        ids[i] = r.i64();
        spans[i].start = r.i64();
        spans[i].length = r.i64();
        spans[i].file_index = r.i64();
    }
    std::vector<graph::Edge> edges(r.count(8));
    for (auto& e : edges) {
        e.src = r.u32();
        e.dst = r.u32();
        if (e.src >= nodes || e.dst >= nodes)
            r.fail("edge endpoint out of range");
    }
    rec.graph = graph::CodeGraph(std::move(ids), std::move(spans), std::move(edges));

    const auto rows = r.count(features::kFeatureDim * 4);
    if (rows != nodes)
        r.fail("feature rows do not match node count");
    rec.features = features::FeatureMatrix(rows);
    for (auto& v : rec.features.values())
        v = r.f32();
    rec.labels.resize(r.count(1));
    if (rec.labels.size() != nodes)
        r.fail("label count does not match node count");
    for (auto& l : rec.labels)
        l = r.u8();
    if (r.remaining() != 0)
        r.fail("trailing bytes");
    if (canonical_hash(rec.graph) != rec.digest)
        throw Error(ErrorCode::BadCheckpoint, kModule, "record " + rec.id + " digest does not match its graph");
    return rec;
}

const DatasetRecord& Corpus::by_id(std::string_view id) const
{
    for (const auto& r : records)
        if (r.id == id)
            return r;
    throw Error(ErrorCode::EmptyDataset, kModule, "no record with id " + std::string(id));
}

std::vector<const DatasetRecord*> Corpus::records_in(Split split) const
{
    std::map<std::string_view, const DatasetRecord*> index;
    for (const auto& r : records)
        index.emplace(r.id, &r);
    std::vector<const DatasetRecord*> out;
    for (const auto& id : manifest.ids(split)) {
        const auto it = index.find(id);
        if (it == index.end())
            throw Error(ErrorCode::EmptyDataset, kModule, "manifest lists unknown id " + id);
        out.push_back(it->second);
    }
    return out;
}

BuiltRecords records_from_synthetic(const std::vector<synthetic::SyntheticContract>& contracts)
{
    BuiltRecords out;
    for (const auto& c : contracts) {
        const ast::AstDocument doc = ast::parse_ast(c.ast_json);
        out.records.push_back(build_record(c.id, doc, c.vulnerable_lines, c.plan.subtype));
        out.entries[c.id] = {c.source, c.ast_json};
    }
    return out;
}

BuiltRecords records_from_ast_dir(const fs::path& dir)
{
    if (!fs::is_directory(dir))
        throw Error(ErrorCode::Io, kModule, dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    BuiltRecords out;
    for (const auto& path : files) {
        const std::string id = path.stem().string();
        const std::string text = io::read_file(path);
        const ast::AstDocument doc = ast::parse_ast(text);
        auto lines_path = path;
        lines_path.replace_extension(".lines");
        std::vector<std::size_t> lines;
        if (fs::exists(lines_path))
            lines = parse_lines(io::read_file(lines_path));
        const Subtype subtype = infer_subtype(doc, lines);
        out.records.push_back(build_record(id, doc, std::move(lines), subtype));
        out.entries[id] = {doc.source_bytes(), text};
    }
    if (out.records.empty())
        throw Error(ErrorCode::EmptyDataset, kModule, "no *.json ASTs in " + dir.string());
    return out;
}

Corpus build_corpus(BuiltRecords built, const SplitRatios& ratios, std::uint64_t seed)
{
    if (built.records.empty())
        throw Error(ErrorCode::EmptyDataset, kModule, "no records to build a corpus from");
    Corpus corpus;
    corpus.stats.input_count = built.records.size();
    corpus.records = deduplicate(std::move(built.records));
    corpus.stats.duplicates_removed = corpus.stats.input_count - corpus.records.size();
    std::vector<std::string> ids;
    for (const auto& r : corpus.records)
        ids.push_back(r.id);
    corpus.manifest = split(std::move(ids), ratios, seed);
    return corpus;
}

std::string format_lines(const std::vector<std::size_t>& lines)
{
    std::string out;
    for (const auto line : lines)
        out += std::to_string(line) + "\n";
    return out;
}

std::vector<std::size_t> parse_lines(std::string_view text)
{
    std::vector<std::size_t> out;
    std::istringstream in{std::string(text)};
    std::string token;
    while (in >> token) {
        std::size_t used = 0;
        unsigned long long value = 0;
        try {
            value = std::stoull(token, &used);
        }
        catch (const std::exception&) {
            used = 0;
        }
        if (used != token.size() || value == 0)
            throw Error(ErrorCode::MalformedSpan, kModule, "bad line number '" + token + "'");
        out.push_back(static_cast<std::size_t>(value));
    }
    return out;
}

void write_corpus(const fs::path& dir, const Corpus& corpus, const std::map<std::string, CorpusEntry>& entries)
{
    fs::create_directories(dir / "records");
    fs::create_directories(dir / "labels");

    OrderedJson manifest;
    manifest["format"] = kCorpusFormat;
    manifest["feature_schema"] = features::FeatureSchema::standard().version();
    manifest["seed"] = corpus.manifest.seed;
    manifest["ratios"] = {{"train", corpus.manifest.ratios.train},
                          {"validation", corpus.manifest.ratios.validation},
                          {"test", corpus.manifest.ratios.test}};
    manifest["input_count"] = corpus.stats.input_count;
    manifest["duplicates_removed"] = corpus.stats.duplicates_removed;
    OrderedJson records = OrderedJson::array();
    for (const auto& r : corpus.records) {
        const auto split = corpus.manifest.split_of(r.id);
        records.push_back({{"id", r.id},
                           {"digest", r.digest},
                           {"subtype", synthetic::to_string(r.subtype)},
                           {"split", split ? to_string(*split) : "none"},
                           {"nodes", r.graph.node_count()},
                           {"edges", r.graph.edges().size()},
                           {"vulnerable", r.vulnerable()}});
        io::write_file(dir / "records" / (r.digest + ".bin"), encode_record(r));
        io::write_file(dir / "labels" / (r.id + ".lines"), format_lines(r.vulnerable_lines));
        if (const auto it = entries.find(r.id); it != entries.end()) {
            if (!it->second.source.empty())
                io::write_file(dir / "sources" / (r.id + ".sol"), it->second.source);
            if (!it->second.ast_json.empty())
                io::write_file(dir / "asts" / (r.id + ".json"), it->second.ast_json);
        }
    }
    manifest["records"] = std::move(records);
    manifest["splits"] = {{"train", corpus.manifest.train},
                          {"validation", corpus.manifest.validation},
                          {"test", corpus.manifest.test}};
    io::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

Corpus load_corpus(const fs::path& dir)
{
    OrderedJson manifest;
    try {
        manifest = OrderedJson::parse(io::read_file(dir / "manifest.json"));
    }
    catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Io, kModule, "manifest.json: " + std::string(e.what()));
    }
    try {
        if (manifest.at("format") != kCorpusFormat)
            throw Error(ErrorCode::SchemaMismatch, kModule, "unsupported corpus format");
        if (manifest.at("feature_schema") != features::FeatureSchema::standard().version())
            throw Error(ErrorCode::SchemaMismatch, kModule,
                        "corpus built with feature schema " + manifest.at("feature_schema").get<std::string>());
        Corpus corpus;
        corpus.manifest.seed = manifest.at("seed").get<std::uint64_t>();
        const auto& ratios = manifest.at("ratios");
        corpus.manifest.ratios = {ratios.at("train").get<double>(), ratios.at("validation").get<double>(),
                                  ratios.at("test").get<double>()};
        const auto& splits = manifest.at("splits");
        corpus.manifest.train = splits.at("train").get<std::vector<std::string>>();
        corpus.manifest.validation = splits.at("validation").get<std::vector<std::string>>();
        corpus.manifest.test = splits.at("test").get<std::vector<std::string>>();
        corpus.stats.input_count = manifest.at("input_count").get<std::size_t>();
        corpus.stats.duplicates_removed = manifest.at("duplicates_removed").get<std::size_t>();
        for (const auto& entry : manifest.at("records")) {
            const auto digest = entry.at("digest").get<std::string>();
            DatasetRecord r = decode_record(io::read_file(dir / "records" / (digest + ".bin")));
            if (r.id != entry.at("id").get<std::string>())
                throw Error(ErrorCode::BadCheckpoint, kModule, "record " + digest + " holds id " + r.id);
            corpus.records.push_back(std::move(r));
        }
        return corpus;
    }
    catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Io, kModule, "manifest.json: " + std::string(e.what()));
    }
}

} // namespace gscan::dataset
