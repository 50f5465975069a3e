// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "gscan/ast.hpp"
#include "gscan/dataset.hpp"
#include "gscan/features.hpp"
#include "gscan/gcn.hpp"
#include "gscan/graph.hpp"
#include "gscan/labels.hpp"
#include "gscan/synthetic.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace gscan;
using Json = nlohmann::json;

namespace {

struct Outcome
{
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

fs::path fixture(const std::string& rel)
{
    return fs::path(GSCAN_FIXTURE_DIR) / rel;
}

struct Run
{
    int status = -1;
    std::string out;
};

// Runs the gscan binary; stderr goes to `err_log`.
Run gscan_cli(const std::string& args, const fs::path& err_log)
{
    const std::string cmd = std::string(GSCAN_BINARY) + " " + args + " 2>>" + err_log.string();
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe)
        return r;
    char buf[4096];
    std::size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0)
        r.out.append(buf, n);
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

// ---------------------------------------------------------------- C1

Outcome c1_golden()
{
    const auto start = Clock::now();
    const auto doc = ast::parse_ast(slurp(fixture("golden/yul_loop.json")));
    std::vector<std::string> kinds;
    std::multiset<std::tuple<std::string, std::size_t, std::size_t>> want;
    std::istringstream in(slurp(fixture("golden/yul_loop.expected")));
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream f(line);
        std::string tag;
        f >> tag;
        std::size_t a = 0, b = 0;
        if (tag == "node") {
            std::string kind;
            f >> a >> kind;
            kinds.push_back(kind);
        }
        else {
            f >> a >> b;
            want.insert({tag, a, b});
        }
    }
    bool ok = doc.size() == kinds.size();
    for (std::size_t i = 0; ok && i < doc.size(); ++i)
        ok = doc.node(i).kind == kinds[i];
    std::multiset<std::tuple<std::string, std::size_t, std::size_t>> got;
    for (const auto& e : graph::build_draft(doc).edges)
        got.insert({std::string(graph::to_string(e.family)), e.edge.src, e.edge.dst});
    std::set<graph::Edge> final_want;
    for (const auto& [family, s, d] : want)
        final_want.insert({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(d)});
    const auto g = graph::build_code_graph(doc);
    const bool edges_ok = got == want;
    const bool final_ok = g.edges() == std::vector<graph::Edge>(final_want.begin(), final_want.end());
    const double t = seconds_since(start);
    return {ok && edges_ok && final_ok && t < 1.0,
            fmt("nodes %s, draft edge multiset %s (%zu edges), finalized edges %s, %.3f s (limit 1 s)",
                ok ? "match" : "DIFFER", edges_ok ? "matches" : "DIFFERS", got.size(), final_ok ? "match" : "DIFFER",
                t)};
}

// ---------------------------------------------------------------- C2

// Start/End child groups per kind, restated from the ordering table.
const std::vector<std::tuple<std::string, std::string, std::string>> kOrderingTable{
    {"IndexAccess", "baseExpression", "indexExpression"},
    {"IndexRangeAccess", "baseExpression", "startExpression"},
    {"IndexRangeAccess", "startExpression", "endExpression"},
    {"FunctionCall", "arguments", "expression"},
    {"FunctionTypeName", "parameterTypes", "returnParameterTypes"},
    {"Assignment", "leftHandSide", "rightHandSide"},
    {"BinaryOperation", "leftExpression", "rightExpression"},
    {"FunctionDefinition", "parameters", "returnParameters"},
    {"YulFunctionDefinition", "parameters", "returnVariables"},
    {"Mapping", "keyType", "valueType"},
};

Outcome c2_edge_invariants()
{
    const auto corpus = synthetic::generate_synthetic_corpus(110, 110, 2);
    std::vector<ast::AstDocument> docs;
    for (const auto& c : corpus)
        docs.push_back(ast::parse_ast(c.ast_json));
    for (const char* f : {"solc/bank.json", "solc/constructs.json", "solc/example_yul.json"})
        docs.push_back(ast::parse_ast(slurp(fixture(f))));

    std::size_t violations = 0, rows_checked = 0, blocks = 0;
    for (const auto& doc : docs) {
        auto draft = graph::build_base_graph(doc);
        std::size_t expected_cf = 0;
        for (const auto& n : doc.nodes())
            if (n.kind == "Block" || n.kind == "UncheckedBlock" || n.kind == "YulBlock") {
                const auto k = n.children_of("statements").size();
                expected_cf += k == 0 ? 0 : k - 1;
                ++blocks;
            }
        if (graph::add_control_flow_edges(draft, doc) != expected_cf)
            ++violations;
        graph::add_reference_edges(draft, doc);
        const std::size_t before = draft.edges.size();
        graph::add_ordering_edges(draft, doc);

        std::multiset<std::pair<std::uint32_t, std::uint32_t>> hier, ref;
        std::set<std::pair<std::uint32_t, std::uint32_t>> ordering;
        for (std::size_t i = 0; i < draft.edges.size(); ++i) {
            const auto& e = draft.edges[i];
            if (e.family == graph::EdgeFamily::AstHierarchy)
                hier.insert({e.edge.src, e.edge.dst});
            if (e.family == graph::EdgeFamily::Reference)
                ref.insert({e.edge.src, e.edge.dst});
            if (i >= before)
                ordering.insert({e.edge.src, e.edge.dst});
        }
        for (const auto* family : {&hier, &ref})
            for (const auto& [s, d] : *family)
                if (family->count({d, s}) != family->count({s, d}))
                    ++violations;
        for (const auto& n : doc.nodes())
            for (const auto& [kind, from, to] : kOrderingTable) {
                if (n.kind != kind)
                    continue;
                for (const auto s : n.children_of(from))
                    for (const auto d : n.children_of(to)) {
                        ++rows_checked;
                        if (!ordering.count({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(d)}))
                            ++violations;
                    }
            }
    }
    return {violations == 0 && docs.size() >= 200 && rows_checked > 0,
            fmt("%zu ASTs, %zu blocks, %zu ordering pairs checked, %zu violations", docs.size(), blocks, rows_checked,
                violations)};
}

// ---------------------------------------------------------------- C3

std::string digest_of(const synthetic::SyntheticContract& c)
{
    return dataset::canonical_hash(graph::build_code_graph(ast::parse_ast(c.ast_json)));
}

Outcome c3_name_independence()
{
    std::mt19937_64 rng(303);
    std::size_t same = 0, differ = 0;
    for (int i = 0; i < 20; ++i) {
        const auto variant = i % 3 == 0 ? synthetic::Variant::CleanOrder
                             : i % 3 == 1 ? synthetic::Variant::CleanLock
                                          : synthetic::Variant::Vulnerable;
        const auto plan = synthetic::random_plan(rng, synthetic::kSubtypes[i % 3], variant);
        const auto a = synthetic::render(plan, synthetic::random_style(rng), "a");
        const auto b = synthetic::render(plan, synthetic::random_style(rng), "b");
        if (a.source != b.source && digest_of(a) == digest_of(b))
            ++same;
    }
    for (int i = 0; i < 20; ++i) {
        auto plan = synthetic::random_plan(rng, synthetic::kSubtypes[i % 3], synthetic::Variant::Vulnerable);
        plan.extra_statement = false;
        auto longer = plan;
        longer.extra_statement = true;
        const auto style = synthetic::random_style(rng);
        if (digest_of(synthetic::render(plan, style, "a")) != digest_of(synthetic::render(longer, style, "b")))
            ++differ;
    }
    return {same == 20 && differ == 20,
            fmt("%zu/20 renamed/re-laid-out pairs hash equal, %zu/20 one-statement pairs hash different", same, differ)};
}

// ---------------------------------------------------------------- C4

Outcome c4_features()
{
    std::size_t vectors = 0, bad_length = 0;
    std::map<std::string, float> seen;
    const auto strict = features::FeatureSchema::standard().with_strict(true);
    for (const char* f : {"solc/constructs.json", "solc/bank.json", "solc/example_yul.json"}) {
        const auto doc = ast::parse_ast(slurp(fixture(f)));
        const auto g = graph::build_code_graph(doc);
        const auto m = features::encode_graph(g, doc, strict);
        for (std::size_t i = 0; i < m.rows(); ++i) {
            ++vectors;
            if (m.row(i).size() != 29)
                ++bad_length;
            const auto& n = doc.node(i);
            const auto v = m.row(i);
            if (n.kind == "ForStatement")
                seen["ForStatement.dim0"] = v[0];
            if (n.kind == "FunctionDefinition" && n.string_attribute("visibility") == "external")
                seen["external.dim20"] = v[20];
            if (n.kind == "MemberAccess" && n.string_attribute("memberName") == "send")
                seen["send.dim28"] = v[28];
            if (n.kind == "MemberAccess" && n.string_attribute("memberName") == "transfer")
                seen["transfer.dim28"] = v[28];
        }
    }
    const std::map<std::string, float> want{
        {"ForStatement.dim0", 3.0f}, {"external.dim20", 2.0f}, {"send.dim28", -1.0f}, {"transfer.dim28", 1.0f}};
    std::string values;
    for (const auto& [k, v] : seen)
        values += fmt(" %s=%g", k.c_str(), v);
    return {bad_length == 0 && seen == want && features::kFeatureDim == 29,
            fmt("%zu vectors, %zu not of length 29;", vectors, bad_length) + values};
}

// ---------------------------------------------------------------- C5

using Dense = std::vector<std::vector<double>>;

Dense dense_mul(const Dense& a, const Dense& b)
{
    Dense out(a.size(), std::vector<double>(b.empty() ? 0 : b[0].size(), 0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < out[i].size(); ++j)
            for (std::size_t k = 0; k < b.size(); ++k)
                out[i][j] += a[i][k] * b[k][j];
    return out;
}

Dense dense_of(const gcn::Matrix<double>& m)
{
    Dense out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
    return out;
}

Dense oracle(const Dense& x, std::size_t n, const std::vector<graph::Edge>& edges, const gcn::ModelParams<double>& p)
{
    Dense a(n, std::vector<double>(n, 0.0));
    for (const auto& e : edges)
        a[e.src][e.dst] = a[e.dst][e.src] = 1;
    for (std::size_t i = 0; i < n; ++i)
        a[i][i] = 1;
    std::vector<double> deg(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            deg[i] += a[i][j];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a[i][j] /= std::sqrt(deg[i] * deg[j]);
    const auto affine = [](Dense h, const gcn::Layer<double>& l, bool relu) {
        h = dense_mul(h, dense_of(l.weight));
        for (auto& row : h)
            for (std::size_t j = 0; j < row.size(); ++j) {
                row[j] += l.bias(static_cast<Eigen::Index>(j));
                if (relu)
                    row[j] = std::max(row[j], 0.0);
            }
        return h;
    };
    Dense h = x;
    for (const auto& l : p.conv)
        h = affine(dense_mul(a, h), l, true);
    for (std::size_t l = 0; l < p.dense.size(); ++l)
        h = affine(h, p.dense[l], l + 1 < p.dense.size());
    for (auto& row : h) {
        const double mx = *std::max_element(row.begin(), row.end());
        double z = 0;
        for (auto& v : row)
            z += (v = std::exp(v - mx));
        for (auto& v : row)
            v /= z;
    }
    return h;
}

Outcome c5_gcn_numerics()
{
    const auto start = Clock::now();
    double worst_forward = 0, worst_sum = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(1000 + seed);
        const std::size_t n = 2 + rng() % 49;
        std::vector<graph::Edge> edges;
        for (std::size_t k = 0; k < 2 * n; ++k) {
            const auto s = static_cast<std::uint32_t>(rng() % n), d = static_cast<std::uint32_t>(rng() % n);
            if (s != d)
                edges.push_back({s, d});
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        gcn::Matrix<double> x(n, 29);
        for (Eigen::Index i = 0; i < x.size(); ++i)
            x.data()[i] = static_cast<double>(rng() % 5);
        const auto params = gcn::ModelParams<double>::initialize({29, {32, 32, 32}, {16, 2}}, seed);
        const auto pred = gcn::model_forward(x, gcn::normalize_adjacency<double>(n, edges), params);
        const auto want = oracle(dense_of(x), n, edges, params);
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            worst_sum = std::max(worst_sum, std::abs(pred.probabilities.row(r).sum() - 1.0));
            for (std::size_t c = 0; c < 2; ++c)
                worst_forward = std::max(worst_forward, std::abs(pred.probabilities(r, static_cast<Eigen::Index>(c)) - want[i][c]));
        }
    }

    // Finite differences on a 29 -> 4 -> 4 -> 2 model over 5 nodes.
    std::mt19937_64 rng(55);
    const std::size_t n = 5;
    const std::vector<graph::Edge> edges{{0, 1}, {1, 2}, {2, 3}, {4, 1}};
    gcn::Matrix<double> x(n, 29);
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x.data()[i] = static_cast<double>(rng() % 4);
    auto params = gcn::ModelParams<double>::initialize({29, {4, 4}, {2}}, 55);
    const auto adj = gcn::normalize_adjacency<double>(n, edges);
    const std::vector<std::uint8_t> labels{0, 1, 1, 0, 1};
    const auto analytic = gcn::compute_gradients(params, x, adj, labels);
    auto tensors = params.tensors();
    const auto grads = analytic.gradients.tensors();
    const double h = 1e-5;
    double worst_rel = 0;
    std::size_t checked = 0;
    for (std::size_t t = 0; t < tensors.size(); ++t)
        for (std::size_t i = 0; i < tensors[t].size(); ++i) {
            const double saved = tensors[t][i];
            tensors[t][i] = saved + h;
            const double up = gcn::cross_entropy_loss(gcn::model_forward(x, adj, params), labels);
            tensors[t][i] = saved - h;
            const double down = gcn::cross_entropy_loss(gcn::model_forward(x, adj, params), labels);
            tensors[t][i] = saved;
            const double numeric = (up - down) / (2 * h);
            const double a = grads[t][i];
            worst_rel = std::max(worst_rel, std::abs(a - numeric) / std::max(1e-4, std::abs(a) + std::abs(numeric)));
            ++checked;
        }
    const double t = seconds_since(start);
    return {worst_forward <= 1e-6 && worst_sum <= 1e-6 && worst_rel < 1e-4 && t < 30,
            fmt("max |sparse - dense oracle| %.2e (limit 1e-6), max |row sum - 1| %.2e, "
                "%zu parameters max FD rel. error %.2e (limit 1e-4), %.2f s (limit 30 s)",
                worst_forward, worst_sum, checked, worst_rel, t)};
}

// ---------------------------------------------------------------- C6

Outcome c6_roundtrip()
{
    std::size_t annotated = 0, recovered = 0, contracts = 0;
    for (const auto& c : synthetic::generate_synthetic_corpus(0, 50, 606)) {
        const auto doc = ast::parse_ast(c.ast_json);
        const auto g = graph::build_code_graph(doc);
        const auto lines = labels::LineLabels::from_lines(c.line_count, c.vulnerable_lines);
        const auto nodes = labels::annotate_node_labels(g.spans(), lines, doc.source_bytes());
        const auto back = labels::project_node_predictions(g.spans(), nodes, doc.source_bytes(), c.line_count);
        for (const auto l : c.vulnerable_lines) {
            ++annotated;
            recovered += back.get(l) ? 1 : 0;
        }
        ++contracts;
    }
    return {annotated > 0 && recovered == annotated && contracts == 50,
            fmt("%zu contracts, %zu/%zu annotated lines recovered (recall %.4f)", contracts, recovered, annotated,
                annotated ? static_cast<double>(recovered) / static_cast<double>(annotated) : 0.0)};
}

// ---------------------------------------------------------------- C7

struct Overall
{
    double node_f1 = 0;
    double graph_f1 = 0;
};

Overall overall_f1(const Json& report)
{
    Overall o;
    for (const auto& row : report["overall"]) {
        if (row["level"] == "node")
            o.node_f1 = row["f1"].get<double>();
        if (row["level"] == "graph")
            o.graph_f1 = row["f1"].get<double>();
    }
    return o;
}

Outcome c7_end_to_end(const fs::path& work)
{
    const fs::path dir = work / "c7";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path err = dir / "stderr.log";
    const fs::path corpus = dir / "corpus";
    const auto built = gscan_cli("build-dataset --out " + corpus.string() + " --synthetic 440,440 --seed 11", err);
    if (built.status != 0)
        return {false, "build-dataset failed, see " + err.string()};
    const auto manifest = Json::parse(slurp(corpus / "manifest.json"));
    std::size_t vulnerable = 0, clean = 0;
    std::set<std::string> subtypes;
    for (const auto& r : manifest["records"]) {
        if (r["vulnerable"].get<bool>()) {
            ++vulnerable;
            subtypes.insert(r["subtype"].get<std::string>());
        }
        else {
            ++clean;
        }
    }

    const auto start = Clock::now();
    const auto trained = gscan_cli("train --corpus " + corpus.string() + " --out " + (dir / "model.ckpt").string()
                                       + " --profile quick --seed 1 --log " + (dir / "train.jsonl").string(),
                                   err);
    const double minutes = seconds_since(start) / 60.0;
    if (trained.status != 0)
        return {false, "train failed, see " + err.string()};
    const auto eval = gscan_cli("eval --corpus " + corpus.string() + " --checkpoint " + (dir / "model.ckpt").string()
                                    + " --split test --format json",
                                err);
    if (eval.status != 0)
        return {false, "eval failed, see " + err.string()};
    std::ofstream(dir / "test_report.json") << eval.out;
    const auto o = overall_f1(Json::parse(eval.out));

    const unsigned cores = std::max(1u, std::thread::hardware_concurrency());
    const bool corpus_ok = clean >= 300 && vulnerable >= 300 && subtypes.size() == 3;
    const bool quality_ok = o.node_f1 >= 0.90 && o.graph_f1 >= 0.95;
    // The time budget is stated for a 4-core desktop; it is only judged on
    // hosts with at least that many cores.
    const bool time_judged = cores >= 4;
    const bool time_ok = !time_judged || minutes < 15.0;
    return {corpus_ok && quality_ok && time_ok,
            fmt("%zu clean + %zu vulnerable after dedup (%zu subtypes); test node F1 %.4f (>= 0.90), graph F1 %.4f "
                "(>= 0.95); training %.1f min on %u core(s)%s",
                clean, vulnerable, subtypes.size(), o.node_f1, o.graph_f1, minutes, cores,
                time_judged ? " (limit 15 min)" : " (15 min limit applies to 4 cores; not judged here)")};
}

// ---------------------------------------------------------------- C8

void shift(Json& n, std::int64_t id_offset, std::int64_t byte_offset)
{
    if (n.is_object()) {
        if (n.contains("nodeType")) {
            if (n.contains("id"))
                n["id"] = n["id"].get<std::int64_t>() + id_offset;
            auto span = ast::parse_src(n["src"].get<std::string>());
            span.start += byte_offset;
            n["src"] = ast::format_src(span);
            for (const char* key : {"referencedDeclaration", "scope"})
                if (n.contains(key) && n[key].is_number_integer()
                    && !ast::is_builtin_declaration(n[key].get<std::int64_t>()))
                    n[key] = n[key].get<std::int64_t>() + id_offset;
        }
        for (auto& [key, value] : n.items())
            if (key != "nodeType")
                shift(value, id_offset, byte_offset);
    }
    else if (n.is_array()) {
        for (auto& e : n)
            shift(e, id_offset, byte_offset);
    }
}

// Concatenates generated contracts into one source unit of about `lines` lines.
std::size_t write_merged_fixture(const fs::path& path, std::size_t lines, std::uint64_t seed)
{
    std::string source;
    Json unit;
    std::size_t count = 0;
    std::size_t batch = 0;
    while (ast::build_line_index(source).line_count() < lines) {
        for (const auto& c : synthetic::generate_synthetic_corpus(4, 4, seed + batch++)) {
            if (ast::build_line_index(source).line_count() >= lines)
                break;
            Json envelope = Json::parse(c.ast_json);
            Json ast = envelope["ast"];
            shift(ast, static_cast<std::int64_t>(100000 * (count + 1)), static_cast<std::int64_t>(source.size()));
            if (unit.is_null())
                unit = ast;
            else
                for (auto& n : ast["nodes"])
                    unit["nodes"].push_back(n);
            source += c.source;
            ++count;
        }
    }
    unit["src"] = "0:" + std::to_string(source.size()) + ":0";
    std::ofstream(path) << ast::make_envelope(unit, source, synthetic::kSyntheticCompilerVersion, path.filename().string())
                               .dump();
    return ast::build_line_index(source).line_count();
}

Outcome c8_latency(const fs::path& work)
{
    const fs::path dir = work / "c8";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path err = dir / "stderr.log";
    // Any standard-architecture checkpoint costs the same to run; use the
    // C7 model when it exists.
    fs::path model = work / "c7" / "model.ckpt";
    if (!fs::exists(model)) {
        const auto corpus = dir / "corpus";
        gscan_cli("build-dataset --out " + corpus.string() + " --synthetic 10,10 --seed 8", err);
        gscan_cli("train --corpus " + corpus.string() + " --out " + (dir / "model.ckpt").string()
                      + " --epochs 1 --log " + (dir / "train.jsonl").string(),
                  err);
        model = dir / "model.ckpt";
    }

    std::string detail;
    bool ok = true;
    for (const auto& [name, lines, limit] : {std::tuple{"small", std::size_t{200}, 2.0},
                                             std::tuple{"large", std::size_t{6000}, 30.0}}) {
        const fs::path path = dir / (std::string(name) + ".json");
        const std::size_t actual = write_merged_fixture(path, lines, 808);
        const auto start = Clock::now();
        const auto r = gscan_cli("scan --ast " + path.string() + " --checkpoint " + model.string() + " --format json",
                                 err);
        const double t = seconds_since(start);
        bool structure = false;
        double ast_ms = 0, graph_ms = 0, predict_ms = 0, total_ms = 0;
        if (r.status == 0 || r.status == 2) {
            const auto j = Json::parse(r.out);
            const auto& timing = j["timing"];
            structure = timing.size() == 4 && timing.contains("ast_ms") && timing.contains("graph_ms")
                        && timing.contains("predict_ms") && timing.contains("total_ms");
            if (structure) {
                ast_ms = timing["ast_ms"];
                graph_ms = timing["graph_ms"];
                predict_ms = timing["predict_ms"];
                total_ms = timing["total_ms"];
                structure = total_ms + 1e-3 >= ast_ms + graph_ms + predict_ms;
            }
        }
        ok = ok && structure && t < limit;
        detail += fmt("%s%zu LoC: %.2f s end-to-end (limit %.0f s), phases AST %.1f / graph %.1f / predict %.1f / total "
                      "%.1f ms%s",
                      detail.empty() ? "" : "; ", actual, t, limit, ast_ms, graph_ms, predict_ms, total_ms,
                      structure ? "" : " (timing report malformed)");
    }
    return {ok, detail};
}

// ---------------------------------------------------------------- C9

Outcome c9_determinism(const fs::path& work, std::size_t epochs)
{
    const fs::path dir = work / "c9";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path err = dir / "stderr.log";
    const auto corpus = dir / "corpus";
    if (gscan_cli("build-dataset --out " + corpus.string() + " --synthetic 60,60 --seed 9", err).status != 0)
        return {false, "build-dataset failed"};
    std::vector<std::string> digests, reports, bytes;
    for (int run = 0; run < 2; ++run) {
        const auto ckpt = dir / ("model" + std::to_string(run) + ".ckpt");
        const auto t = gscan_cli("train --corpus " + corpus.string() + " --out " + ckpt.string() + " --epochs "
                                     + std::to_string(epochs) + " --seed 4 --log "
                                     + (dir / ("train" + std::to_string(run) + ".jsonl")).string(),
                                 err);
        if (t.status != 0)
            return {false, "train failed"};
        const auto pos = t.out.find("sha256 ");
        digests.push_back(pos == std::string::npos ? "" : t.out.substr(pos + 7, 64));
        bytes.push_back(slurp(ckpt));
        const auto e = gscan_cli("eval --corpus " + corpus.string() + " --checkpoint " + ckpt.string()
                                     + " --split test --format json",
                                 err);
        if (e.status != 0)
            return {false, "eval failed"};
        reports.push_back(e.out);
    }
    const bool ok = !digests[0].empty() && digests[0] == digests[1] && bytes[0] == bytes[1] && reports[0] == reports[1];
    return {ok, fmt("two runs, %zu epochs each: checkpoint digests %s (%s), eval reports %s", epochs,
                    digests[0] == digests[1] ? "identical" : "DIFFER", digests[0].substr(0, 16).c_str(),
                    reports[0] == reports[1] ? "identical" : "DIFFER")};
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance checks"};
    fs::path work = fs::temp_directory_path() / "gscan-acceptance";
    std::vector<std::string> only;
    std::size_t c9_epochs = 20;
    app.add_option("--work-dir", work, "Scratch directory for corpora and checkpoints");
    app.add_option("--only", only, "Run only these criteria (e.g. C1,C5)")->delimiter(',');
    app.add_option("--c9-epochs", c9_epochs, "Epochs per determinism run")->capture_default_str();
    CLI11_PARSE(app, argc, argv);
    fs::create_directories(work);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"C1", c1_golden},
        {"C2", c2_edge_invariants},
        {"C3", c3_name_independence},
        {"C4", c4_features},
        {"C5", c5_gcn_numerics},
        {"C6", c6_roundtrip},
        {"C7", [&] { return c7_end_to_end(work); }},
        {"C8", [&] { return c8_latency(work); }},
        {"C9", [&] { return c9_determinism(work, c9_epochs); }},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end())
            continue;
        Outcome o;
        try {
            o = check();
        }
        catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << name << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
