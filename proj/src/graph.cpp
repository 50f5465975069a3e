#include "gscan/graph.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <optional>
#include <string_view>

#include "gscan/error.hpp"

namespace gscan::graph {

namespace {

constexpr std::string_view kModule = "graph_builder";

using ast::AstDocument;
using ast::AstNode;

struct OrderingRule
{
    std::string_view kind;
    std::string_view start;
    std::string_view end;
};

// Start/End attribute pairs. BinaryOperation's operands are emitted as
// leftExpression/rightExpression; the *HandSide spelling is kept as a
// fallback for hand-written documents.
constexpr std::array kOrderingRules{
    OrderingRule{"IndexAccess", "baseExpression", "indexExpression"},
    OrderingRule{"IndexRangeAccess", "baseExpression", "startExpression"},
    OrderingRule{"IndexRangeAccess", "startExpression", "endExpression"},
    OrderingRule{"FunctionCall", "arguments", "expression"},
    OrderingRule{"FunctionTypeName", "parameterTypes", "returnParameterTypes"},
    OrderingRule{"Assignment", "leftHandSide", "rightHandSide"},
    OrderingRule{"BinaryOperation", "leftExpression", "rightExpression"},
    OrderingRule{"BinaryOperation", "leftHandSide", "rightHandSide"},
    OrderingRule{"FunctionDefinition", "parameters", "returnParameters"},
    OrderingRule{"YulFunctionDefinition", "parameters", "returnVariables"},
    OrderingRule{"Mapping", "keyType", "valueType"},
};

bool is_statement_block(std::string_view kind)
{
    return kind == "Block" || kind == "UncheckedBlock" || kind == "YulBlock";
}

bool is_loop(std::string_view kind)
{
    return kind == "ForStatement" || kind == "WhileStatement" || kind == "DoWhileStatement" || kind == "YulForLoop";
}

bool is_callable(std::string_view kind)
{
    return kind == "FunctionDefinition" || kind == "ModifierDefinition" || kind == "YulFunctionDefinition";
}

// The update child of a For loop; Yul names it "post".
std::optional<std::size_t> loop_update(const AstNode& loop)
{
    if (loop.kind == "ForStatement")
        return loop.child("loopExpression");
    if (loop.kind == "YulForLoop")
        return loop.child("post");
    return std::nullopt;
}

std::optional<std::size_t> loop_init(const AstNode& loop)
{
    if (loop.kind == "ForStatement")
        return loop.child("initializationExpression");
    if (loop.kind == "YulForLoop")
        return loop.child("pre");
    return std::nullopt;
}

void link(GraphDraft& g, std::size_t& added, std::optional<std::size_t> src, std::optional<std::size_t> dst,
          EdgeFamily family)
{
    if (!src || !dst)
        return;
    g.add(*src, *dst, family);
    ++added;
}

// Walks ancestors until a node matching `accept` is found; stops (returning
// nullopt) at any node matching `barrier`.
template <typename Accept, typename Barrier>
std::optional<std::size_t> enclosing(const AstDocument& doc, std::size_t index, Accept accept, Barrier barrier)
{
    auto cursor = doc.node(index).parent;
    while (cursor) {
        const AstNode& n = doc.node(*cursor);
        if (accept(n.kind))
            return cursor;
        if (barrier(n.kind))
            return std::nullopt;
        cursor = n.parent;
    }
    return std::nullopt;
}

} // namespace

std::string_view to_string(EdgeFamily family)
{
    switch (family) {
    case EdgeFamily::AstHierarchy: return "AstHierarchy";
    case EdgeFamily::ControlFlow: return "ControlFlow";
    case EdgeFamily::Ordering: return "Ordering";
    case EdgeFamily::Reference: return "Reference";
    case EdgeFamily::TrueBody: return "TrueBody";
    case EdgeFamily::FalseBody: return "FalseBody";
    }
    return "Unknown";
}

void GraphDraft::add(std::size_t src, std::size_t dst, EdgeFamily family)
{
    edges.push_back({{static_cast<std::uint32_t>(src), static_cast<std::uint32_t>(dst)}, family});
}

std::size_t GraphDraft::count(EdgeFamily family) const
{
    return static_cast<std::size_t>(
        std::count_if(edges.begin(), edges.end(), [family](const TaggedEdge& e) { return e.family == family; }));
}

CodeGraph::CodeGraph(std::vector<std::int64_t> ast_ids, std::vector<ast::SourceSpan> spans, std::vector<Edge> edges)
    : ast_ids_(std::move(ast_ids))
    , spans_(std::move(spans))
    , edges_(std::move(edges))
{
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

std::string CodeGraph::canonical_serialization() const
{
    std::string out;
    out.reserve(16 + edges_.size() * 14);
    out += "n ";
    out += std::to_string(node_count());
    out += '\n';
    for (const Edge& e : edges_) {
        out += "e ";
        out += std::to_string(e.src);
        out += ' ';
        out += std::to_string(e.dst);
        out += '\n';
    }
    return out;
}

GraphDraft build_base_graph(const AstDocument& doc)
{
    GraphDraft g;
    g.node_count = doc.size();
    for (std::size_t i = 0; i < doc.size(); ++i) {
        for (const auto& group : doc.node(i).children) {
            for (const std::size_t child : group.nodes) {
                g.add(i, child, EdgeFamily::AstHierarchy);
                g.add(child, i, EdgeFamily::AstHierarchy);
            }
        }
    }
    return g;
}

std::size_t add_control_flow_edges(GraphDraft& graph, const AstDocument& doc)
{
    std::size_t added = 0;
    for (const AstNode& node : doc.nodes()) {
        if (!is_statement_block(node.kind))
            continue;
        const auto statements = node.children_of("statements");
        for (std::size_t k = 1; k < statements.size(); ++k)
            link(graph, added, statements[k - 1], statements[k], EdgeFamily::ControlFlow);
    }
    return added;
}

std::size_t add_ordering_edges(GraphDraft& graph, const AstDocument& doc)
{
    std::size_t added = 0;
    for (const AstNode& node : doc.nodes()) {
        for (const OrderingRule& rule : kOrderingRules) {
            if (node.kind != rule.kind)
                continue;
            // Multi-valued groups (call arguments, Yul parameter lists)
            // connect every start member to every end member.
            for (const std::size_t from : node.children_of(rule.start))
                for (const std::size_t to : node.children_of(rule.end))
                    link(graph, added, from, to, EdgeFamily::Ordering);
        }
    }
    return added;
}

std::size_t add_reference_edges(GraphDraft& graph, const AstDocument& doc)
{
    std::size_t added = 0;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const AstNode& node = doc.node(i);
        if (!ast::is_reference_kind(node.kind))
            continue;
        const auto target = node.referenced_declaration();
        if (!target || ast::is_builtin_declaration(*target))
            continue;
        const auto decl = doc.index_of(*target);
        if (!decl)
            throw Error(ErrorCode::MissingReference, kModule,
                        node.kind + " references declaration " + std::to_string(*target) + " with no graph node");
        link(graph, added, i, *decl, EdgeFamily::Reference);
        link(graph, added, *decl, i, EdgeFamily::Reference);
    }
    return added;
}

std::size_t add_branch_edges(GraphDraft& graph, const AstDocument& doc)
{
    std::size_t added = 0;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const AstNode& node = doc.node(i);
        if (node.kind == "IfStatement" || node.kind == "Conditional") {
            const bool is_if = node.kind == "IfStatement";
            const auto condition = node.child("condition");
            link(graph, added, i, condition, EdgeFamily::ControlFlow);
            link(graph, added, condition, node.child(is_if ? "trueBody" : "trueExpression"), EdgeFamily::TrueBody);
            link(graph, added, condition, node.child(is_if ? "falseBody" : "falseExpression"),
                 EdgeFamily::FalseBody);
        }
        else if (node.kind == "YulIf") {
            const auto condition = node.child("condition");
            link(graph, added, i, condition, EdgeFamily::ControlFlow);
            link(graph, added, condition, node.child("body"), EdgeFamily::TrueBody);
        }
        else if (node.kind == "YulCase") {
            // The default case stores "default" as a plain string, so it has
            // no value node and gets no edge.
            link(graph, added, node.child("value"), node.child("body"), EdgeFamily::TrueBody);
        }
    }
    return added;
}

std::size_t add_loop_edges(GraphDraft& graph, const AstDocument& doc)
{
    std::size_t added = 0;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const AstNode& node = doc.node(i);
        if (!is_loop(node.kind))
            continue;
        const auto condition = node.child("condition");
        const auto body = node.child("body");
        if (node.kind == "ForStatement" || node.kind == "YulForLoop") {
            const auto init = loop_init(node);
            const auto update = loop_update(node);
            link(graph, added, i, init, EdgeFamily::ControlFlow);
            link(graph, added, init, condition, EdgeFamily::ControlFlow);
            link(graph, added, condition, body, EdgeFamily::TrueBody);
            link(graph, added, condition, i, EdgeFamily::FalseBody);
            link(graph, added, body, update, EdgeFamily::ControlFlow);
            link(graph, added, update, condition, EdgeFamily::ControlFlow);
        }
        else {
            link(graph, added, i, condition, EdgeFamily::ControlFlow);
            link(graph, added, condition, body, EdgeFamily::TrueBody);
            link(graph, added, condition, i, EdgeFamily::FalseBody);
            link(graph, added, body, condition, EdgeFamily::ControlFlow);
        }
    }
    return added;
}

std::size_t add_jump_edges(GraphDraft& graph, const AstDocument& doc)
{
    std::size_t added = 0;
    const auto orphan = [&](std::size_t i, const char* what) {
        const AstNode& n = doc.node(i);
        throw Error(ErrorCode::OrphanJump, kModule,
                    n.kind + " at " + ast::format_src(n.src) + " has no enclosing " + what);
    };
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const AstNode& node = doc.node(i);
        const std::string_view kind = node.kind;
        if (kind == "Break" || kind == "YulBreak" || kind == "Continue" || kind == "YulContinue") {
            const auto loop = enclosing(doc, i, is_loop, is_callable);
            if (!loop)
                orphan(i, "loop");
            if (kind == "Break" || kind == "YulBreak") {
                link(graph, added, i, loop, EdgeFamily::ControlFlow);
                continue;
            }
            // Continue resumes at the update node; loops without one resume
            // at the condition, and a bare for(;;) at the loop itself.
            const AstNode& l = doc.node(*loop);
            std::optional<std::size_t> target = loop_update(l);
            if (!target)
                target = l.child("condition");
            if (!target)
                target = loop;
            link(graph, added, i, target, EdgeFamily::ControlFlow);
        }
        else if (kind == "Return" || kind == "YulLeave") {
            const auto function = enclosing(doc, i, is_callable, [](std::string_view) { return false; });
            if (!function)
                orphan(i, "function");
            link(graph, added, i, function, EdgeFamily::ControlFlow);
        }
    }
    return added;
}

CodeGraph finalize(const GraphDraft& graph, const AstDocument& doc)
{
    std::vector<std::int64_t> ids;
    std::vector<ast::SourceSpan> spans;
    ids.reserve(doc.size());
    spans.reserve(doc.size());
    for (const AstNode& node : doc.nodes()) {
        ids.push_back(node.id);
        spans.push_back(node.src);
    }
    std::vector<Edge> edges;
    edges.reserve(graph.edges.size());
    for (const TaggedEdge& e : graph.edges)
        edges.push_back(e.edge);
    return CodeGraph(std::move(ids), std::move(spans), std::move(edges));
}

GraphDraft build_draft(const AstDocument& doc)
{
    GraphDraft g = build_base_graph(doc);
    add_control_flow_edges(g, doc);
    add_ordering_edges(g, doc);
    add_reference_edges(g, doc);
    add_branch_edges(g, doc);
    add_loop_edges(g, doc);
    add_jump_edges(g, doc);
    return g;
}

CodeGraph build_code_graph(const AstDocument& doc)
{
    return finalize(build_draft(doc), doc);
}

CanonicalGraph parse_canonical(std::string_view text)
{
    CanonicalGraph out;
    const auto bad = [](const std::string& why) {
        return Error(ErrorCode::MalformedAst, kModule, "bad canonical graph: " + why);
    };
    const auto read_number = [&](std::string_view& line) {
        std::uint64_t value = 0;
        const auto space = line.find(' ');
        const std::string_view token = line.substr(0, space);
        auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc() || ptr != token.data() + token.size())
            throw bad("expected a number in '" + std::string(token) + "'");
        line = space == std::string_view::npos ? std::string_view{} : line.substr(space + 1);
        return value;
    };
    bool header = false;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        if (line.size() < 2 || line[1] != ' ')
            throw bad("malformed line '" + std::string(line) + "'");
        const char tag = line[0];
        line.remove_prefix(2);
        if (tag == 'n' && !header) {
            out.node_count = read_number(line);
            header = true;
        }
        else if (tag == 'e' && header) {
            const auto src = read_number(line);
            const auto dst = read_number(line);
            if (src >= out.node_count || dst >= out.node_count)
                throw bad("edge endpoint out of range");
            out.edges.push_back({static_cast<std::uint32_t>(src), static_cast<std::uint32_t>(dst)});
        }
        else {
            throw bad("unexpected line tag");
        }
    }
    if (!header)
        throw bad("missing node count");
    return out;
}

} // namespace gscan::graph
