/**
 * @file ast.hpp
 * @brief Typed view over compiler-emitted compact AST JSON, plus byte-span to
 *        line arithmetic.
 *
 * Line arithmetic follows the prefix-count convention: the line of a byte
 * offset b is the number of lines the decoded prefix [0, b) splits into,
 * using Python's str.splitlines() boundary set. A span whose first byte sits
 * at column zero therefore also touches the previous line, and offset zero
 * maps to the pseudo-line 0.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace gscan::ast {

using Json = nlohmann::ordered_json;

struct SourceSpan
{
    std::int64_t start = 0;
    std::int64_t length = 0;
    std::int64_t file_index = 0;

    std::int64_t end() const noexcept { return start + length; }
    friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

/// Parses "start:length:fileIndex". Throws MalformedSpan.
SourceSpan parse_src(std::string_view text);
std::string format_src(const SourceSpan& span);

struct ChildGroup
{
    std::string name;
    std::vector<std::size_t> nodes;
};

struct AstNode
{
    std::int64_t id = 0;
    /// Yul nodes carry no id in the compiler output; one is assigned after
    /// the largest emitted id.
    bool synthetic_id = false;
    std::string kind;
    /// Every key whose value is not a node (or list of nodes).
    Json attributes = Json::object();
    SourceSpan src;
    std::vector<ChildGroup> children;
    std::optional<std::size_t> parent;

    const Json* attribute(std::string_view key) const;
    std::optional<std::string> string_attribute(std::string_view key) const;
    std::optional<bool> bool_attribute(std::string_view key) const;
    std::optional<std::int64_t> referenced_declaration() const;

    /// Indices of the children stored under `group`, empty if absent.
    std::span<const std::size_t> children_of(std::string_view group) const;
    std::optional<std::size_t> child(std::string_view group) const;
};

/// Declaration ids the compiler reserves for globals such as msg or require.
/// Older releases emit them negative, newer ones as large unsigned values.
bool is_builtin_declaration(std::int64_t id) noexcept;

/// Kinds whose referencedDeclaration produces reference edges.
bool is_reference_kind(std::string_view kind) noexcept;

struct CompilerVersion
{
    int major = 0;
    int minor = 0;
    int patch = 0;

    static std::optional<CompilerVersion> parse(std::string_view text);
    std::string to_string() const;
    auto operator<=>(const CompilerVersion&) const = default;
};

inline constexpr CompilerVersion kMinimumCompilerVersion{0, 4, 12};

/// Immutable after parse. Nodes are stored in preorder; index 0 is the root.
class AstDocument
{
public:
    const std::vector<AstNode>& nodes() const noexcept { return nodes_; }
    const AstNode& node(std::size_t index) const { return nodes_.at(index); }
    std::size_t size() const noexcept { return nodes_.size(); }
    std::size_t root() const noexcept { return 0; }

    std::optional<std::size_t> index_of(std::int64_t id) const;

    const std::string& source_bytes() const noexcept { return source_; }
    /// "unknown" when neither the envelope nor the caller named a compiler.
    const std::string& compiler_version() const noexcept { return compiler_version_; }
    const std::string& source_path() const noexcept { return source_path_; }

private:
    friend AstDocument parse_ast(std::string_view, std::optional<std::string>);

    std::vector<AstNode> nodes_;
    std::unordered_map<std::int64_t, std::size_t> by_id_;
    std::string source_;
    std::string compiler_version_ = "unknown";
    std::string source_path_;
};

/**
 * Accepts three layouts:
 *  - an envelope {"compilerVersion", "sourcePath", "source", "ast"},
 *  - standard-JSON compiler output with exactly one entry under "sources",
 *  - a bare compact AST root.
 * The source text comes from the envelope unless `source` is given.
 *
 * Errors: MalformedAst, UnsupportedVersion, MissingReference.
 */
AstDocument parse_ast(std::string_view json_text, std::optional<std::string> source = std::nullopt);

/// Wraps an AST and its source into the envelope layout accepted above.
Json make_envelope(const Json& ast, std::string_view source, std::string_view compiler_version,
                   std::string_view source_path = {});

struct LineRange
{
    std::size_t first = 0;
    std::size_t last = 0;
    friend bool operator==(const LineRange&, const LineRange&) = default;
};

class LineIndex
{
public:
    /// Byte offsets where each line starts; every entry is < source size.
    const std::vector<std::size_t>& line_starts() const noexcept { return line_starts_; }
    std::size_t line_count() const noexcept { return line_starts_.size(); }
    std::size_t source_size() const noexcept { return size_; }

    /// Number of lines the decoded prefix [0, offset) splits into.
    std::size_t lines_before(std::size_t offset) const;

private:
    friend LineIndex build_line_index(std::string_view);

    std::vector<std::size_t> line_starts_;
    std::vector<bool> char_boundary_;
    std::size_t size_ = 0;
};

/// Throws InvalidEncoding on malformed UTF-8.
LineIndex build_line_index(std::string_view source_bytes);

/// Inclusive range [lines_before(start), lines_before(start + length)].
/// Throws SpanOutOfBounds, or InvalidEncoding for offsets inside a character.
LineRange span_to_lines(const SourceSpan& span, const LineIndex& index);

} // namespace gscan::ast
