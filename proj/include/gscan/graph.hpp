/**
 * @file graph.hpp
 * @brief Code graph construction from a parsed AST.
 *
 * Graph node i is AST node i (preorder). Six edge families are layered on
 * top of the tree while building a GraphDraft; finalize() drops the family
 * tags and collapses parallel edges into a directed homogeneous graph.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gscan/ast.hpp"

namespace gscan::graph {

enum class EdgeFamily : std::uint8_t {
    AstHierarchy,
    ControlFlow,
    Ordering,
    Reference,
    TrueBody,
    FalseBody,
};

std::string_view to_string(EdgeFamily family);

struct Edge
{
    std::uint32_t src = 0;
    std::uint32_t dst = 0;

    auto operator<=>(const Edge&) const = default;
};

struct TaggedEdge
{
    Edge edge;
    EdgeFamily family = EdgeFamily::AstHierarchy;
};

/// Pre-finalization graph; edges keep their family tag.
struct GraphDraft
{
    std::size_t node_count = 0;
    std::vector<TaggedEdge> edges;

    void add(std::size_t src, std::size_t dst, EdgeFamily family);
    std::size_t count(EdgeFamily family) const;
};

class CodeGraph
{
public:
    CodeGraph() = default;
    CodeGraph(std::vector<std::int64_t> ast_ids, std::vector<ast::SourceSpan> spans, std::vector<Edge> edges);

    std::size_t node_count() const noexcept { return ast_ids_.size(); }
    const std::vector<std::int64_t>& ast_ids() const noexcept { return ast_ids_; }
    const std::vector<ast::SourceSpan>& spans() const noexcept { return spans_; }
    /// Sorted by (src, dst), no duplicates.
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    /// "n <count>\n" followed by "e <src> <dst>\n" per edge in (src, dst)
    /// order. This byte stream is what dataset hashing consumes.
    std::string canonical_serialization() const;

private:
    std::vector<std::int64_t> ast_ids_;
    std::vector<ast::SourceSpan> spans_;
    std::vector<Edge> edges_;
};

/// Parent<->child edges for every tree link.
GraphDraft build_base_graph(const ast::AstDocument& doc);

// Each add_* returns the number of edges it appended.
std::size_t add_control_flow_edges(GraphDraft& graph, const ast::AstDocument& doc);
std::size_t add_ordering_edges(GraphDraft& graph, const ast::AstDocument& doc);
/// Throws MissingReference when a referenced id has no graph node.
std::size_t add_reference_edges(GraphDraft& graph, const ast::AstDocument& doc);
std::size_t add_branch_edges(GraphDraft& graph, const ast::AstDocument& doc);
std::size_t add_loop_edges(GraphDraft& graph, const ast::AstDocument& doc);
/// Throws OrphanJump when a jump has no enclosing loop or function.
std::size_t add_jump_edges(GraphDraft& graph, const ast::AstDocument& doc);

CodeGraph finalize(const GraphDraft& graph, const ast::AstDocument& doc);

/// All families, then finalize.
GraphDraft build_draft(const ast::AstDocument& doc);
CodeGraph build_code_graph(const ast::AstDocument& doc);

/// Parses the canonical serialization back into node count and edges.
struct CanonicalGraph
{
    std::size_t node_count = 0;
    std::vector<Edge> edges;
};
CanonicalGraph parse_canonical(std::string_view text);

} // namespace gscan::graph
