/**
 * @file scan.hpp
 * @brief One contract through the whole pipeline: AST, code graph, model,
 *        line verdicts, with per-phase timing.
 */
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gscan/gcn.hpp"
#include "json.hpp"

namespace gscan::scan {

struct Timing
{
    /// Reading input, compiling when given source, parsing the AST.
    double ast_ms = 0;
    /// Code graph construction and feature encoding.
    double graph_ms = 0;
    /// Adjacency normalization, forward pass, projection onto lines.
    double predict_ms = 0;
    double total_ms = 0;
};

struct LineVerdict
{
    std::size_t line = 0;
    bool vulnerable = false;
};

struct ScanReport
{
    std::string path;
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    /// One entry per source line, in order.
    std::vector<LineVerdict> lines;
    bool vulnerable = false;
    /// call/send/transfer member accesses among the flagged nodes, in that order.
    std::vector<std::string> subtype_hits;
    Timing timing;

    std::vector<std::size_t> flagged_lines() const;
    nlohmann::ordered_json to_json() const;
    std::string to_text() const;
};

enum class InputKind { Ast, Solidity };

struct ScanInput
{
    InputKind kind = InputKind::Ast;
    std::filesystem::path path;
    /// Source text for a bare AST without an envelope.
    std::optional<std::filesystem::path> source_path;
};

ScanReport scan(const ScanInput& input, const gcn::ModelParams<float>& params);

/// Exit status for a finished scan: 0 clean, 2 vulnerable.
int exit_code(const ScanReport& report);

} // namespace gscan::scan
