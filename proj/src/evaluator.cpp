#include "gscan/evaluator.hpp"

#include <cstdio>
#include <map>

#include "gscan/error.hpp"

namespace gscan::evaluator {

namespace {

constexpr std::string_view kModule = "evaluator";

double ratio(std::uint64_t num, std::uint64_t den, bool& undefined)
{
    undefined = den == 0;
    return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

nlohmann::ordered_json row_json(const ReportRow& row)
{
    return {{"subtype", row.subtype},
            {"split", row.split},
            {"level", to_string(row.level)},
            {"accuracy", row.metrics.accuracy},
            {"precision", row.metrics.precision},
            {"recall", row.metrics.recall},
            {"f1", row.metrics.f1},
            {"undefined",
             {{"precision", row.metrics.precision_undefined},
              {"recall", row.metrics.recall_undefined},
              {"f1", row.metrics.f1_undefined}}},
            {"confusion", {{"tp", row.confusion.tp}, {"tn", row.confusion.tn}, {"fp", row.confusion.fp},
                           {"fn", row.confusion.fn}}}};
}

std::string format_value(double v, bool undefined)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f%s", v, undefined ? "*" : "");
    return buf;
}

} // namespace

Confusion& Confusion::operator+=(const Confusion& other) noexcept
{
    tp += other.tp;
    tn += other.tn;
    fp += other.fp;
    fn += other.fn;
    return *this;
}

Confusion confusion(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth)
{
    if (predicted.size() != truth.size())
        throw Error(ErrorCode::LengthMismatch, kModule,
                    std::to_string(predicted.size()) + " predictions but " + std::to_string(truth.size()) + " labels");
    Confusion c;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool p = predicted[i] != 0;
        const bool t = truth[i] != 0;
        if (p && t)
            ++c.tp;
        else if (p)
            ++c.fp;
        else if (t)
            ++c.fn;
        else
            ++c.tn;
    }
    return c;
}

Metrics metrics(const Confusion& c)
{
    if (c.total() == 0)
        throw Error(ErrorCode::EmptyEvaluation, kModule, "no items to evaluate");
    Metrics m;
    m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    m.precision = ratio(c.tp, c.tp + c.fp, m.precision_undefined);
    m.recall = ratio(c.tp, c.tp + c.fn, m.recall_undefined);
    m.f1_undefined = m.precision + m.recall == 0.0;
    m.f1 = m.f1_undefined ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

std::uint8_t graph_level_label(std::span<const std::uint8_t> node_labels)
{
    for (const auto l : node_labels)
        if (l != 0)
            return 1;
    return 0;
}

std::vector<std::uint8_t> graph_level_labels(const std::vector<labels::NodeLabels>& per_graph)
{
    std::vector<std::uint8_t> out;
    out.reserve(per_graph.size());
    for (const auto& g : per_graph)
        out.push_back(graph_level_label(g));
    return out;
}

std::string_view to_string(Level level)
{
    return level == Level::Node ? "node" : "graph";
}

const ReportRow& Report::overall_row(Level level) const
{
    for (const auto& row : overall)
        if (row.level == level)
            return row;
    throw Error(ErrorCode::EmptyEvaluation, kModule, "report has no overall row");
}

nlohmann::ordered_json Report::to_json() const
{
    nlohmann::ordered_json out;
    out["split"] = split;
    out["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : rows)
        out["rows"].push_back(row_json(row));
    out["overall"] = nlohmann::ordered_json::array();
    for (const auto& row : overall)
        out["overall"].push_back(row_json(row));
    return out;
}

std::string Report::to_text() const
{
    std::string out;
    char line[160];
    std::snprintf(line, sizeof line, "%-9s %-11s %-6s %10s %10s %10s %10s\n", "subtype", "split", "level", "accuracy",
                  "precision", "recall", "f1");
    out += line;
    const auto emit = [&](const ReportRow& row) {
        std::snprintf(line, sizeof line, "%-9s %-11s %-6s %10s %10s %10s %10s\n", row.subtype.c_str(),
                      row.split.c_str(), std::string(to_string(row.level)).c_str(),
                      format_value(row.metrics.accuracy, false).c_str(),
                      format_value(row.metrics.precision, row.metrics.precision_undefined).c_str(),
                      format_value(row.metrics.recall, row.metrics.recall_undefined).c_str(),
                      format_value(row.metrics.f1, row.metrics.f1_undefined).c_str());
        out += line;
    };
    for (const auto& row : rows)
        emit(row);
    if (!overall.empty()) {
        out += "\n";
        for (const auto& row : overall)
            emit(row);
    }
    bool any_undefined = false;
    for (const auto* group : {&rows, &overall})
        for (const auto& row : *group)
            any_undefined = any_undefined || row.metrics.precision_undefined || row.metrics.recall_undefined
                            || row.metrics.f1_undefined;
    if (any_undefined)
        out += "* zero denominator, reported as 0\n";
    return out;
}

Report evaluate(const std::vector<const dataset::DatasetRecord*>& records, const Predictor& predict,
                std::string split_name)
{
    if (records.empty())
        throw Error(ErrorCode::EmptyEvaluation, kModule, "split '" + split_name + "' has no records");

    struct Counts
    {
        Confusion node;
        Confusion graph;
    };
    std::map<synthetic::Subtype, Counts> by_subtype;
    Counts all;
    for (const auto* record : records) {
        const labels::NodeLabels predicted = predict(*record);
        const Confusion node = confusion(predicted, record->labels);
        const std::uint8_t graph_pred = graph_level_label(predicted);
        const std::uint8_t graph_truth = graph_level_label(record->labels);
        const Confusion graph = confusion(std::span(&graph_pred, 1), std::span(&graph_truth, 1));
        auto& c = by_subtype[record->subtype];
        c.node += node;
        c.graph += graph;
        all.node += node;
        all.graph += graph;
    }

    Report report;
    report.split = split_name;
    for (const auto& [subtype, counts] : by_subtype) {
        for (const auto level : {Level::Node, Level::Graph}) {
            const Confusion& c = level == Level::Node ? counts.node : counts.graph;
            report.rows.push_back({std::string(synthetic::to_string(subtype)), split_name, level, c, metrics(c)});
        }
    }
    for (const auto level : {Level::Node, Level::Graph}) {
        const Confusion& c = level == Level::Node ? all.node : all.graph;
        report.overall.push_back({"all", split_name, level, c, metrics(c)});
    }
    return report;
}

} // namespace gscan::evaluator
