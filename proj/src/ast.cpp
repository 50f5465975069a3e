#include "gscan/ast.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <unordered_set>

#include "gscan/error.hpp"

namespace gscan::ast {

namespace {

constexpr std::string_view kModule = "ast_ingest";

[[noreturn]] void fail(ErrorCode code, const std::string& message)
{
    throw Error(code, kModule, message);
}

bool parse_int(std::string_view text, std::int64_t& out)
{
    if (text.empty())
        return false;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

bool is_node(const Json& value)
{
    return value.is_object() && value.contains("nodeType") && value["nodeType"].is_string();
}

// Comments attached as natspec live in their own node type; they carry no
// program structure and are dropped like ordinary comments.
bool is_ignored_kind(std::string_view kind)
{
    return kind == "StructuredDocumentation";
}

class Builder
{
public:
    Builder(std::vector<AstNode>& nodes, std::size_t source_size, bool check_bounds)
        : nodes_(nodes)
        , source_size_(source_size)
        , check_bounds_(check_bounds)
    {}

    std::size_t add(const Json& value, std::optional<std::size_t> parent)
    {
        const std::size_t index = nodes_.size();
        nodes_.emplace_back();
        {
            AstNode& node = nodes_.back();
            node.kind = value["nodeType"].get<std::string>();
            node.parent = parent;
            read_id(value, node);
            read_src(value, node);
        }

        for (const auto& [key, child] : value.items()) {
            if (key == "nodeType" || key == "id" || key == "src")
                continue;
            if (is_node(child)) {
                if (is_ignored_kind(child["nodeType"].get<std::string>()))
                    continue;
                const std::size_t c = add(child, index);
                nodes_[index].children.push_back({key, {c}});
            }
            else if (child.is_array() && std::any_of(child.begin(), child.end(), is_node)) {
                ChildGroup group{key, {}};
                for (const auto& element : child) {
                    if (element.is_null())
                        continue;
                    if (!is_node(element))
                        fail(ErrorCode::MalformedAst, "mixed node and non-node entries under '" + key + "'");
                    if (is_ignored_kind(element["nodeType"].get<std::string>()))
                        continue;
                    group.nodes.push_back(add(element, index));
                }
                nodes_[index].children.push_back(std::move(group));
            }
            else {
                nodes_[index].attributes[key] = child;
            }
        }
        return index;
    }

private:
    void read_id(const Json& value, AstNode& node)
    {
        if (!value.contains("id")) {
            node.synthetic_id = true;
            return;
        }
        const Json& id = value["id"];
        if (!id.is_number_integer())
            fail(ErrorCode::MalformedAst, node.kind + " node has a non-integer id");
        node.id = id.get<std::int64_t>();
    }

    void read_src(const Json& value, AstNode& node)
    {
        if (!value.contains("src") || !value["src"].is_string())
            fail(ErrorCode::MalformedAst, node.kind + " node has no src attribute");
        try {
            node.src = parse_src(value["src"].get<std::string>());
        }
        catch (const Error& e) {
            fail(ErrorCode::MalformedAst, node.kind + " node: " + e.what());
        }
        if (check_bounds_ && static_cast<std::uint64_t>(node.src.end()) > source_size_)
            fail(ErrorCode::MalformedAst, node.kind + " node span " + format_src(node.src)
                                              + " exceeds source size " + std::to_string(source_size_));
    }

    std::vector<AstNode>& nodes_;
    std::size_t source_size_;
    bool check_bounds_;
};

struct Located
{
    const Json* ast = nullptr;
    std::optional<std::string> version;
    std::optional<std::string> source;
    std::string source_path;
};

Located locate(const Json& root)
{
    if (!root.is_object())
        fail(ErrorCode::MalformedAst, "top-level JSON value is not an object");

    Located out;
    if (root.contains("ast")) {
        out.ast = &root["ast"];
        if (root.contains("compilerVersion") && root["compilerVersion"].is_string())
            out.version = root["compilerVersion"].get<std::string>();
        if (root.contains("source") && root["source"].is_string())
            out.source = root["source"].get<std::string>();
        if (root.contains("sourcePath") && root["sourcePath"].is_string())
            out.source_path = root["sourcePath"].get<std::string>();
        return out;
    }
    if (root.contains("sources") && root["sources"].is_object()) {
        const Json& sources = root["sources"];
        if (sources.size() != 1)
            fail(ErrorCode::MalformedAst, "compiler output holds " + std::to_string(sources.size())
                                              + " sources; merge the contract into one file first");
        const auto it = sources.begin();
        if (!it.value().contains("ast"))
            fail(ErrorCode::MalformedAst, "compiler output has no ast for '" + it.key() + "'");
        out.ast = &it.value()["ast"];
        out.source_path = it.key();
        if (root.contains("compilerVersion") && root["compilerVersion"].is_string())
            out.version = root["compilerVersion"].get<std::string>();
        return out;
    }
    out.ast = &root;
    return out;
}

void decode_one(const std::string_view text, std::size_t& i, std::vector<std::size_t>& starts,
                            std::vector<bool>& boundary)
{
    // Decodes one code point at i, records line starts after terminators.
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
    const unsigned char lead = byte(i);
    std::size_t width = 0;
    std::uint32_t cp = 0;
    if (lead < 0x80) {
        width = 1;
        cp = lead;
    }
    else if (lead >= 0xC2 && lead <= 0xDF) {
        width = 2;
        cp = lead & 0x1F;
    }
    else if (lead >= 0xE0 && lead <= 0xEF) {
        width = 3;
        cp = lead & 0x0F;
    }
    else if (lead >= 0xF0 && lead <= 0xF4) {
        width = 4;
        cp = lead & 0x07;
    }
    else {
        fail(ErrorCode::InvalidEncoding, "invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    if (i + width > text.size())
        fail(ErrorCode::InvalidEncoding, "truncated UTF-8 sequence at offset " + std::to_string(i));
    for (std::size_t k = 1; k < width; ++k) {
        const unsigned char c = byte(i + k);
        if ((c & 0xC0) != 0x80)
            fail(ErrorCode::InvalidEncoding, "invalid UTF-8 continuation at offset " + std::to_string(i + k));
        cp = (cp << 6) | (c & 0x3F);
        boundary[i + k] = false;
    }
    if ((width == 3 && cp < 0x800) || (width == 4 && (cp < 0x10000 || cp > 0x10FFFF))
        || (cp >= 0xD800 && cp <= 0xDFFF))
        fail(ErrorCode::InvalidEncoding, "invalid code point at offset " + std::to_string(i));

    std::size_t next = i + width;
    bool terminator = false;
    switch (cp) {
    case '\r':
        if (next < text.size() && text[next] == '\n')
            ++next;
        terminator = true;
        break;
    case '\n':
    case 0x0B:
    case 0x0C:
    case 0x1C:
    case 0x1D:
    case 0x1E:
    case 0x85:
    case 0x2028:
    case 0x2029: terminator = true; break;
    default: break;
    }
    if (terminator && next < text.size())
        starts.push_back(next);
    i = next;
}

} // namespace

// ---------------------------------------------------------------------------

SourceSpan parse_src(std::string_view text)
{
    std::int64_t fields[3];
    std::size_t count = 0;
    std::size_t pos = 0;
    while (true) {
        const std::size_t colon = text.find(':', pos);
        const std::string_view part = text.substr(pos, colon == std::string_view::npos ? colon : colon - pos);
        if (count == 3 || !parse_int(part, fields[count]))
            throw Error(ErrorCode::MalformedSpan, kModule, "bad src '" + std::string(text) + "'");
        ++count;
        if (colon == std::string_view::npos)
            break;
        pos = colon + 1;
    }
    if (count != 3)
        throw Error(ErrorCode::MalformedSpan, kModule, "src '" + std::string(text) + "' needs three fields");
    if (fields[0] < 0 || fields[1] < 0)
        throw Error(ErrorCode::MalformedSpan, kModule, "negative offset in src '" + std::string(text) + "'");
    return {fields[0], fields[1], fields[2]};
}

std::string format_src(const SourceSpan& span)
{
    return std::to_string(span.start) + ":" + std::to_string(span.length) + ":" + std::to_string(span.file_index);
}

const Json* AstNode::attribute(std::string_view key) const
{
    const auto it = attributes.find(key);
    return it == attributes.end() ? nullptr : &*it;
}

std::optional<std::string> AstNode::string_attribute(std::string_view key) const
{
    const Json* value = attribute(key);
    if (value == nullptr || !value->is_string())
        return std::nullopt;
    return value->get<std::string>();
}

std::optional<bool> AstNode::bool_attribute(std::string_view key) const
{
    const Json* value = attribute(key);
    if (value == nullptr || !value->is_boolean())
        return std::nullopt;
    return value->get<bool>();
}

std::optional<std::int64_t> AstNode::referenced_declaration() const
{
    const Json* value = attribute("referencedDeclaration");
    if (value == nullptr || !value->is_number_integer())
        return std::nullopt;
    return value->get<std::int64_t>();
}

std::span<const std::size_t> AstNode::children_of(std::string_view group) const
{
    for (const auto& g : children)
        if (g.name == group)
            return g.nodes;
    return {};
}

std::optional<std::size_t> AstNode::child(std::string_view group) const
{
    const auto nodes = children_of(group);
    if (nodes.empty())
        return std::nullopt;
    return nodes.front();
}

bool is_builtin_declaration(std::int64_t id) noexcept
{
    return id < 0 || id > std::numeric_limits<std::int32_t>::max();
}

bool is_reference_kind(std::string_view kind) noexcept
{
    return kind == "Identifier" || kind == "IdentifierPath" || kind == "UserDefinedTypeName";
}

std::optional<CompilerVersion> CompilerVersion::parse(std::string_view text)
{
    // Finds the first "X.Y.Z" run, tolerating prefixes such as "v" or
    // "Version: " and suffixes such as "+commit.abc".
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] < '0' || text[i] > '9')
            continue;
        int parts[3] = {0, 0, 0};
        std::size_t pos = i;
        bool ok = true;
        for (int k = 0; k < 3 && ok; ++k) {
            const auto* begin = text.data() + pos;
            auto [ptr, ec] = std::from_chars(begin, text.data() + text.size(), parts[k]);
            if (ec != std::errc() || ptr == begin) {
                ok = false;
                break;
            }
            pos = static_cast<std::size_t>(ptr - text.data());
            if (k < 2) {
                if (pos >= text.size() || text[pos] != '.') {
                    ok = false;
                    break;
                }
                ++pos;
            }
        }
        if (ok)
            return CompilerVersion{parts[0], parts[1], parts[2]};
        while (i < text.size() && ((text[i] >= '0' && text[i] <= '9') || text[i] == '.'))
            ++i;
    }
    return std::nullopt;
}

std::string CompilerVersion::to_string() const
{
    return std::to_string(major) + "." + std::to_string(minor) + "." + std::to_string(patch);
}

std::optional<std::size_t> AstDocument::index_of(std::int64_t id) const
{
    const auto it = by_id_.find(id);
    if (it == by_id_.end())
        return std::nullopt;
    return it->second;
}

AstDocument parse_ast(std::string_view json_text, std::optional<std::string> source)
{
    Json root;
    try {
        root = Json::parse(json_text);
    }
    catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::MalformedAst, std::string("invalid JSON: ") + e.what());
    }

    const Located located = locate(root);
    const Json& ast = *located.ast;

    AstDocument doc;
    if (located.version) {
        const auto version = CompilerVersion::parse(*located.version);
        if (!version)
            fail(ErrorCode::MalformedAst, "unparseable compiler version '" + *located.version + "'");
        if (*version < kMinimumCompilerVersion)
            fail(ErrorCode::UnsupportedVersion, "compiler " + version->to_string() + " is older than "
                                                    + kMinimumCompilerVersion.to_string());
        doc.compiler_version_ = version->to_string();
    }

    // The pre-0.4.12 format nests everything under "name"/"children".
    if (ast.is_object() && !ast.contains("nodeType") && ast.contains("name") && ast.contains("children"))
        fail(ErrorCode::UnsupportedVersion, "legacy AST layout (compiler older than 0.4.12)");
    if (!is_node(ast))
        fail(ErrorCode::MalformedAst, "AST root is not a node");

    if (source)
        doc.source_ = std::move(*source);
    else if (located.source)
        doc.source_ = *located.source;
    else
        fail(ErrorCode::MalformedAst, "no source text: supply it in the envelope or alongside the AST");
    doc.source_path_ = located.source_path;

    Builder builder(doc.nodes_, doc.source_.size(), true);
    builder.add(ast, std::nullopt);

    std::int64_t max_id = 0;
    for (std::size_t i = 0; i < doc.nodes_.size(); ++i) {
        const AstNode& node = doc.nodes_[i];
        if (node.synthetic_id)
            continue;
        if (!doc.by_id_.emplace(node.id, i).second)
            fail(ErrorCode::MalformedAst, "duplicate node id " + std::to_string(node.id));
        max_id = std::max(max_id, node.id);
    }
    for (std::size_t i = 0; i < doc.nodes_.size(); ++i) {
        AstNode& node = doc.nodes_[i];
        if (!node.synthetic_id)
            continue;
        node.id = ++max_id;
        doc.by_id_.emplace(node.id, i);
    }

    for (const AstNode& node : doc.nodes_) {
        if (!is_reference_kind(node.kind))
            continue;
        const auto target = node.referenced_declaration();
        if (!target || is_builtin_declaration(*target))
            continue;
        const auto it = doc.by_id_.find(*target);
        if (it == doc.by_id_.end() || doc.nodes_[it->second].synthetic_id)
            fail(ErrorCode::MissingReference, node.kind + " " + std::to_string(node.id)
                                                  + " references missing declaration " + std::to_string(*target));
    }
    return doc;
}

Json make_envelope(const Json& ast, std::string_view source, std::string_view compiler_version,
                   std::string_view source_path)
{
    Json envelope = Json::object();
    envelope["compilerVersion"] = compiler_version;
    envelope["sourcePath"] = source_path;
    envelope["source"] = source;
    envelope["ast"] = ast;
    return envelope;
}

// ---------------------------------------------------------------------------

LineIndex build_line_index(std::string_view source_bytes)
{
    LineIndex index;
    index.size_ = source_bytes.size();
    index.char_boundary_.assign(source_bytes.size() + 1, true);
    if (!source_bytes.empty())
        index.line_starts_.push_back(0);
    std::size_t i = 0;
    while (i < source_bytes.size())
        decode_one(source_bytes, i, index.line_starts_, index.char_boundary_);
    return index;
}

std::size_t LineIndex::lines_before(std::size_t offset) const
{
    if (offset > size_)
        throw Error(ErrorCode::SpanOutOfBounds, kModule,
                    "offset " + std::to_string(offset) + " beyond source size " + std::to_string(size_));
    if (!char_boundary_[offset])
        throw Error(ErrorCode::InvalidEncoding, kModule,
                    "offset " + std::to_string(offset) + " splits a UTF-8 character");
    return static_cast<std::size_t>(std::lower_bound(line_starts_.begin(), line_starts_.end(), offset)
                                    - line_starts_.begin());
}

LineRange span_to_lines(const SourceSpan& span, const LineIndex& index)
{
    if (span.start < 0 || span.length < 0 || static_cast<std::uint64_t>(span.end()) > index.source_size())
        throw Error(ErrorCode::SpanOutOfBounds, kModule,
                    "span " + format_src(span) + " outside source of " + std::to_string(index.source_size())
                        + " bytes");
    return {index.lines_before(static_cast<std::size_t>(span.start)),
            index.lines_before(static_cast<std::size_t>(span.end()))};
}

} // namespace gscan::ast
