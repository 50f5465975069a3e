#include "gscan/scan.hpp"

#include <chrono>
#include <set>

#include "gscan/ast.hpp"
#include "gscan/compiler.hpp"
#include "gscan/features.hpp"
#include "gscan/graph.hpp"
#include "gscan/io.hpp"
#include "gscan/labels.hpp"
#include "gscan/synthetic.hpp"
#include "gscan/trainer.hpp"

namespace gscan::scan {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

} // namespace

std::vector<std::size_t> ScanReport::flagged_lines() const
{
    std::vector<std::size_t> out;
    for (const auto& v : lines)
        if (v.vulnerable)
            out.push_back(v.line);
    return out;
}

nlohmann::ordered_json ScanReport::to_json() const
{
    nlohmann::ordered_json out;
    out["path"] = path;
    out["vulnerable"] = vulnerable;
    out["flagged_lines"] = flagged_lines();
    out["subtype_hits"] = subtype_hits;
    out["nodes"] = node_count;
    out["edges"] = edge_count;
    out["timing"] = {{"ast_ms", timing.ast_ms},
                     {"graph_ms", timing.graph_ms},
                     {"predict_ms", timing.predict_ms},
                     {"total_ms", timing.total_ms}};
    auto& verdicts = out["lines"] = nlohmann::ordered_json::array();
    for (const auto& v : lines)
        verdicts.push_back({{"line", v.line}, {"vulnerable", v.vulnerable}});
    return out;
}

std::string ScanReport::to_text() const
{
    std::string out = path + ": " + (vulnerable ? "VULNERABLE" : "clean") + "\n";
    const auto flagged = flagged_lines();
    if (!flagged.empty()) {
        out += "  flagged lines:";
        for (const auto line : flagged)
            out += " " + std::to_string(line);
        out += "\n";
    }
    if (!subtype_hits.empty()) {
        out += "  subtypes:";
        for (const auto& s : subtype_hits)
            out += " " + s;
        out += "\n";
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "  timing: ast %.2f ms, graph %.2f ms, predict %.2f ms, total %.2f ms\n",
                  timing.ast_ms, timing.graph_ms, timing.predict_ms, timing.total_ms);
    out += buf;
    return out;
}

ScanReport scan(const ScanInput& input, const gcn::ModelParams<float>& params)
{
    const auto start = Clock::now();
    ScanReport report;
    report.path = input.path.string();

    auto phase = Clock::now();
    std::string ast_text;
    std::optional<std::string> source;
    if (input.kind == InputKind::Solidity) {
        ast_text = compiler::compile_to_envelope(input.path);
    }
    else {
        ast_text = io::read_file(input.path);
        if (input.source_path)
            source = io::read_file(*input.source_path);
    }
    const ast::AstDocument doc = ast::parse_ast(ast_text, source);
    report.timing.ast_ms = elapsed_ms(phase);

    phase = Clock::now();
    const graph::CodeGraph graph = graph::build_code_graph(doc);
    const features::FeatureMatrix features = features::encode_graph(graph, doc);
    report.timing.graph_ms = elapsed_ms(phase);
    report.node_count = graph.node_count();
    report.edge_count = graph.edges().size();

    phase = Clock::now();
    const auto adjacency = gcn::normalize_adjacency<float>(graph);
    const auto prediction = gcn::model_forward(trainer::feature_matrix(features), adjacency, params);
    const ast::LineIndex index = ast::build_line_index(doc.source_bytes());
    const labels::LineLabels line_labels =
        labels::project_node_predictions(graph.spans(), prediction.labels, doc.source_bytes(), index.line_count());
    report.timing.predict_ms = elapsed_ms(phase);

    report.lines.reserve(index.line_count());
    for (std::size_t line = 1; line <= index.line_count(); ++line) {
        const bool flagged = line_labels.get(line);
        report.lines.push_back({line, flagged});
        report.vulnerable = report.vulnerable || flagged;
    }

    std::set<synthetic::Subtype> hits;
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        if (prediction.labels[i] == 0)
            continue;
        const auto& node = doc.node(*doc.index_of(graph.ast_ids()[i]));
        if (node.kind != "MemberAccess")
            continue;
        if (const auto member = node.string_attribute("memberName"))
            if (const auto subtype = synthetic::parse_subtype(*member))
                hits.insert(*subtype);
    }
    for (const auto s : hits)
        report.subtype_hits.emplace_back(synthetic::to_string(s));

    report.timing.total_ms = elapsed_ms(start);
    return report;
}

int exit_code(const ScanReport& report)
{
    return report.vulnerable ? 2 : 0;
}

} // namespace gscan::scan
