/**
 * @file evaluator.hpp
 * @brief Confusion counts, metrics, and per-subtype node/graph reports.
 *
 * Class 1 is "vulnerable" throughout. A contract is vulnerable when any of
 * its nodes is.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gscan/dataset.hpp"
#include "gscan/labels.hpp"
#include "json.hpp"

namespace gscan::evaluator {

struct Confusion
{
    std::uint64_t tp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
    Confusion& operator+=(const Confusion& other) noexcept;
    friend bool operator==(const Confusion&, const Confusion&) = default;
};

/// Throws LengthMismatch.
Confusion confusion(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth);

struct Metrics
{
    double accuracy = 0;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    /// Set when the ratio's denominator was zero; the value is then 0.
    bool precision_undefined = false;
    bool recall_undefined = false;
    bool f1_undefined = false;

    friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Throws EmptyEvaluation when the confusion is empty.
Metrics metrics(const Confusion& c);

std::uint8_t graph_level_label(std::span<const std::uint8_t> node_labels);
std::vector<std::uint8_t> graph_level_labels(const std::vector<labels::NodeLabels>& per_graph);

enum class Level : std::uint8_t { Node, Graph };
std::string_view to_string(Level level);

struct ReportRow
{
    std::string subtype;
    std::string split;
    Level level = Level::Node;
    Confusion confusion;
    Metrics metrics;
};

struct Report
{
    std::string split;
    /// One row per (subtype present, level), subtypes in call/send/transfer order.
    std::vector<ReportRow> rows;
    /// All subtypes pooled, one per level; kept apart from the table rows.
    std::vector<ReportRow> overall;

    const ReportRow& overall_row(Level level) const;
    nlohmann::ordered_json to_json() const;
    std::string to_text() const;
};

using Predictor = std::function<labels::NodeLabels(const dataset::DatasetRecord&)>;

/// Throws EmptyEvaluation for an empty record list.
Report evaluate(const std::vector<const dataset::DatasetRecord*>& records, const Predictor& predict,
                std::string split_name);

} // namespace gscan::evaluator
