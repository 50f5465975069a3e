#include <map>
#include <random>
#include <set>

#include "gscan/ast.hpp"
#include "support.hpp"

namespace gscan::test {
namespace {

using ast::Json;

// Independent oracle for the line convention: decode the prefix to code
// points, then count lines the way str.splitlines() does.
std::vector<std::uint32_t> decode(std::string_view bytes)
{
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < bytes.size();) {
        const auto b = static_cast<unsigned char>(bytes[i]);
        int extra = b < 0x80 ? 0 : b < 0xE0 ? 1 : b < 0xF0 ? 2 : 3;
        std::uint32_t cp = extra == 0 ? b : extra == 1 ? (b & 0x1F) : extra == 2 ? (b & 0x0F) : (b & 0x07);
        for (int k = 1; k <= extra; ++k)
            cp = (cp << 6) | (static_cast<unsigned char>(bytes[i + k]) & 0x3F);
        out.push_back(cp);
        i += 1 + extra;
    }
    return out;
}

bool is_line_break(std::uint32_t cp)
{
    static const std::set<std::uint32_t> breaks{'\n', '\r', 0x0B, 0x0C, 0x1C, 0x1D, 0x1E, 0x85, 0x2028, 0x2029};
    return breaks.count(cp) != 0;
}

std::size_t splitlines_count(const std::vector<std::uint32_t>& text)
{
    std::size_t lines = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && !is_line_break(text[i]))
            ++i;
        ++lines;
        if (i < text.size()) {
            if (text[i] == '\r' && i + 1 < text.size() && text[i + 1] == '\n')
                ++i;
            ++i;
        }
    }
    return lines;
}

std::size_t oracle_lines_before(std::string_view bytes, std::size_t offset)
{
    return splitlines_count(decode(bytes.substr(0, offset)));
}

TEST(ParseSrc, DecomposesFields)
{
    EXPECT_EQ(ast::parse_src("57:5:0"), (ast::SourceSpan{57, 5, 0}));
    EXPECT_EQ(ast::parse_src("0:0:0"), (ast::SourceSpan{0, 0, 0}));
    EXPECT_EQ(ast::parse_src("1:2:-1"), (ast::SourceSpan{1, 2, -1}));
}

TEST(ParseSrc, RejectsMalformed)
{
    for (const char* bad : {"57:5", "", "a:1:0", "1:2:3:4", "1::0", "-1:2:0", "1:2:0 "})
        EXPECT_GSCAN_ERROR(ast::parse_src(bad), ErrorCode::MalformedSpan) << bad;
}

TEST(ParseSrc, FormatRoundTrip)
{
    std::mt19937_64 rng(5);
    for (int i = 0; i < 500; ++i) {
        const ast::SourceSpan span{static_cast<std::int64_t>(rng() % 100000), static_cast<std::int64_t>(rng() % 5000),
                                   static_cast<std::int64_t>(rng() % 4)};
        EXPECT_EQ(ast::parse_src(ast::format_src(span)), span);
    }
}

TEST(LineIndex, Examples)
{
    const auto two = ast::build_line_index("ab\ncd");
    EXPECT_EQ(two.line_starts(), (std::vector<std::size_t>{0, 3}));
    EXPECT_EQ(two.line_count(), 2u);
    EXPECT_EQ(ast::build_line_index("").line_count(), 0u);
    EXPECT_EQ(ast::build_line_index("a\n").line_count(), 1u);
    EXPECT_EQ(ast::build_line_index("a\r\nb").line_count(), 2u);
}

TEST(LineIndex, MultiByteCharacterBeforeNewline)
{
    // "é" is two bytes; the second line starts at byte 4, not 3.
    const std::string text = "a\xC3\xA9\nb";
    const auto index = ast::build_line_index(text);
    EXPECT_EQ(index.line_starts(), (std::vector<std::size_t>{0, 4}));
    EXPECT_EQ(index.lines_before(4), 1u);
    EXPECT_EQ(index.lines_before(5), 2u);
    EXPECT_GSCAN_ERROR(index.lines_before(2), ErrorCode::InvalidEncoding);
}

TEST(LineIndex, RejectsInvalidUtf8)
{
    EXPECT_GSCAN_ERROR(ast::build_line_index("a\xFF"), ErrorCode::InvalidEncoding);
    EXPECT_GSCAN_ERROR(ast::build_line_index("\xC3"), ErrorCode::InvalidEncoding);
    EXPECT_GSCAN_ERROR(ast::build_line_index("\xED\xA0\x80"), ErrorCode::InvalidEncoding); // surrogate
}

TEST(LineIndex, MatchesSplitlinesOracleOnRandomText)
{
    const std::vector<std::string> pieces{"a", "bc", "\n", "\r", "\r\n", "\xC3\xA9", "\xE2\x82\xAC", "\xE2\x80\xA8",
                                          "\xC2\x85", "\x0B", "\x0C", "\xF0\x9F\x98\x80", " "};
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        std::string text;
        std::vector<std::size_t> boundaries{0};
        const auto length = rng() % 30;
        for (std::size_t k = 0; k < length; ++k) {
            const std::string& p = pieces[rng() % pieces.size()];
            // Keep every code point boundary, but "\r\n" is one unit only
            // when it comes from the same piece.
            text += p;
            boundaries.push_back(text.size());
        }
        const auto index = ast::build_line_index(text);
        EXPECT_EQ(index.line_count(), oracle_lines_before(text, text.size())) << trial;
        for (const auto b : boundaries)
            EXPECT_EQ(index.lines_before(b), oracle_lines_before(text, b)) << "trial " << trial << " offset " << b;
    }
}

TEST(SpanToLines, PrefixConvention)
{
    const auto index = ast::build_line_index("ab\ncd");
    EXPECT_EQ(ast::span_to_lines({0, 2, 0}, index), (ast::LineRange{0, 1}));
    EXPECT_EQ(ast::span_to_lines({0, 5, 0}, index), (ast::LineRange{0, 2}));
    EXPECT_EQ(ast::span_to_lines({4, 0, 0}, index), (ast::LineRange{2, 2}));
    // A span starting at column zero also touches the previous line.
    EXPECT_EQ(ast::span_to_lines({3, 2, 0}, index), (ast::LineRange{1, 2}));
    EXPECT_GSCAN_ERROR(ast::span_to_lines({4, 2, 0}, index), ErrorCode::SpanOutOfBounds);
}

TEST(SpanToLines, MatchesOracle)
{
    const std::string text = "pragma x;\n\ncontract C {\n  uint \xC3\xA9;\r\n}\n";
    const auto index = ast::build_line_index(text);
    for (std::size_t s = 0; s <= text.size(); ++s) {
        for (std::size_t e = s; e <= text.size(); ++e) {
            const bool inside = (s < text.size() && (static_cast<unsigned char>(text[s]) & 0xC0) == 0x80)
                                || (e < text.size() && (static_cast<unsigned char>(text[e]) & 0xC0) == 0x80);
            if (inside)
                continue;
            const auto range = ast::span_to_lines({static_cast<std::int64_t>(s), static_cast<std::int64_t>(e - s), 0},
                                                  index);
            EXPECT_EQ(range.first, oracle_lines_before(text, s));
            EXPECT_EQ(range.last, oracle_lines_before(text, e));
        }
    }
}

TEST(CompilerVersion, Parses)
{
    EXPECT_EQ(ast::CompilerVersion::parse("0.8.19+commit.7dd6d404.Emscripten.clang")->to_string(), "0.8.19");
    EXPECT_EQ(ast::CompilerVersion::parse("solc, the solidity compiler\nVersion: 0.4.26+commit")->to_string(),
              "0.4.26");
    EXPECT_FALSE(ast::CompilerVersion::parse("no version here").has_value());
    EXPECT_LT(*ast::CompilerVersion::parse("0.4.11"), ast::kMinimumCompilerVersion);
}

Json minimal_unit()
{
    return node("SourceUnit", 2,
                {{"absolutePath", "a.sol"},
                 {"nodes", Json::array({node("ContractDefinition", 1, {{"name", "A"}}, "0:12:0")})}},
                "0:12:0");
}

TEST(ParseAst, MinimalDocument)
{
    const auto doc = parse_root(minimal_unit(), "contract A{}");
    ASSERT_EQ(doc.size(), 2u);
    EXPECT_EQ(doc.node(doc.root()).kind, "SourceUnit");
    EXPECT_EQ(doc.node(1).kind, "ContractDefinition");
    EXPECT_EQ(doc.node(1).parent, std::optional<std::size_t>(0));
    EXPECT_EQ(doc.index_of(1), std::optional<std::size_t>(1));
    EXPECT_EQ(doc.compiler_version(), "unknown");
}

TEST(ParseAst, RejectsOldCompilers)
{
    const auto envelope = [](const char* version) {
        return ast::make_envelope(minimal_unit(), "contract A{}", version).dump();
    };
    EXPECT_GSCAN_ERROR(ast::parse_ast(envelope("0.4.11")), ErrorCode::UnsupportedVersion);
    EXPECT_EQ(ast::parse_ast(envelope("0.4.12")).compiler_version(), "0.4.12");
    const Json legacy = {{"name", "SourceUnit"}, {"children", Json::array()}, {"id", 1}, {"src", "0:0:0"}};
    EXPECT_GSCAN_ERROR(ast::parse_ast(legacy.dump(), ""), ErrorCode::UnsupportedVersion);
}

TEST(ParseAst, MissingReference)
{
    const Json use = node("Identifier", 3, {{"name", "x"}, {"referencedDeclaration", 99}});
    const Json root = node("SourceUnit", 4, {{"nodes", Json::array({node("ExpressionStatement", 5,
                                                                         {{"expression", use}})})}});
    EXPECT_GSCAN_ERROR(parse_root(root), ErrorCode::MissingReference);
}

TEST(ParseAst, BuiltinReferencesNeedNoDeclaration)
{
    for (const std::int64_t builtin : {std::int64_t{-15}, std::int64_t{4294967281}}) {
        const Json use = node("Identifier", 3, {{"name", "msg"}, {"referencedDeclaration", builtin}});
        EXPECT_NO_THROW(parse_root(node("SourceUnit", 4, {{"nodes", Json::array({use})}})));
    }
}

TEST(ParseAst, StructuralErrors)
{
    EXPECT_GSCAN_ERROR(ast::parse_ast("{", ""), ErrorCode::MalformedAst);
    EXPECT_GSCAN_ERROR(ast::parse_ast("[]", ""), ErrorCode::MalformedAst);
    Json no_src = minimal_unit();
    no_src.erase("src");
    EXPECT_GSCAN_ERROR(parse_root(no_src), ErrorCode::MalformedAst);
    Json duplicate = minimal_unit();
    duplicate["nodes"][0]["id"] = 2;
    EXPECT_GSCAN_ERROR(parse_root(duplicate), ErrorCode::MalformedAst);
    // Span past the end of the source.
    EXPECT_GSCAN_ERROR(parse_root(minimal_unit(), "short"), ErrorCode::MalformedAst);
    // No source anywhere.
    EXPECT_GSCAN_ERROR(ast::parse_ast(minimal_unit().dump()), ErrorCode::MalformedAst);
}

TEST(ParseAst, StandardJsonLayout)
{
    Json out;
    out["sources"]["a.sol"]["ast"] = minimal_unit();
    out["sources"]["a.sol"]["id"] = 0;
    const auto doc = ast::parse_ast(out.dump(), std::string("contract A{}"));
    EXPECT_EQ(doc.size(), 2u);
    EXPECT_EQ(doc.source_path(), "a.sol");
    out["sources"]["b.sol"]["ast"] = minimal_unit();
    EXPECT_GSCAN_ERROR(ast::parse_ast(out.dump(), std::string("contract A{}")), ErrorCode::MalformedAst);
}

TEST(ParseAst, DropsDocumentationNodes)
{
    Json unit = minimal_unit();
    unit["nodes"][0]["documentation"] = node("StructuredDocumentation", 7, {{"text", "hi"}});
    EXPECT_EQ(parse_root(unit, "contract A{}").size(), 2u);
}

TEST(ParseAst, SolcFixturePreservesChildOrderAndYulIds)
{
    const auto doc = load_fixture("solc/example_yul.json");
    EXPECT_EQ(doc.compiler_version(), "0.8.19");
    const auto& unit = doc.node(doc.root());
    ASSERT_EQ(unit.children_of("nodes").size(), 2u);
    EXPECT_EQ(doc.node(unit.children_of("nodes")[0]).kind, "PragmaDirective");
    EXPECT_EQ(doc.node(unit.children_of("nodes")[1]).kind, "ContractDefinition");

    std::int64_t max_real = 0;
    for (const auto& n : doc.nodes())
        if (!n.synthetic_id)
            max_real = std::max(max_real, n.id);
    std::size_t yul = 0;
    for (const auto& n : doc.nodes()) {
        if (n.kind.rfind("Yul", 0) == 0) {
            ++yul;
            EXPECT_TRUE(n.synthetic_id);
            EXPECT_GT(n.id, max_real);
        }
    }
    EXPECT_EQ(yul, 18u);

    // Function call arguments keep their emitted order: lt(i, 2).
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& n = doc.node(i);
        if (n.kind == "YulForLoop") {
            const auto& condition = doc.node(*n.child("condition"));
            const auto args = condition.children_of("arguments");
            ASSERT_EQ(args.size(), 2u);
            EXPECT_EQ(doc.node(args[0]).kind, "YulIdentifier");
            EXPECT_EQ(doc.node(args[1]).kind, "YulLiteral");
        }
    }
}

class FixtureInvariants : public ::testing::TestWithParam<std::string>
{};

TEST_P(FixtureInvariants, TreeAndSpanInvariants)
{
    const auto doc = load_fixture(GetParam());
    std::set<std::int64_t> ids;
    std::vector<std::size_t> parent_links(doc.size(), 0);
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& n = doc.node(i);
        EXPECT_TRUE(ids.insert(n.id).second) << "duplicate id " << n.id;
        EXPECT_EQ(n.parent.has_value(), i != doc.root());
        for (const auto& g : n.children)
            for (const auto c : g.nodes) {
                ++parent_links[c];
                EXPECT_EQ(doc.node(c).parent, std::optional<std::size_t>(i));
                EXPECT_GT(c, i) << "children follow their parent in preorder";
            }
        EXPECT_LE(static_cast<std::size_t>(n.src.end()), doc.source_bytes().size());
    }
    for (std::size_t i = 1; i < doc.size(); ++i)
        EXPECT_EQ(parent_links[i], 1u);

    const auto index = ast::build_line_index(doc.source_bytes());
    for (const auto& n : doc.nodes()) {
        const auto range = ast::span_to_lines(n.src, index);
        EXPECT_LE(range.first, range.last);
        EXPECT_LE(range.last, index.line_count());
    }
}

INSTANTIATE_TEST_SUITE_P(Solc, FixtureInvariants,
                         ::testing::Values("solc/example_yul.json", "solc/bank.json", "solc/constructs.json",
                                           "solc/synthetic/vuln-0000.json", "solc/synthetic/clean-0001.json",
                                           "golden/yul_loop.json"));

// Shifts every id and span of a subtree so that two copies can share a unit.
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
                if (n.contains(key) && n[key].is_number_integer() && !ast::is_builtin_declaration(n[key].get<std::int64_t>()))
                    n[key] = n[key].get<std::int64_t>() + id_offset;
        }
        for (auto& [key, value] : n.items())
            if (key != "nodeType")
                shift(value, id_offset, byte_offset);
    }
    else if (n.is_array()) {
        for (auto& element : n)
            shift(element, id_offset, byte_offset);
    }
}

TEST(ParseAst, MergedFileDoublesNodeCounts)
{
    const Json envelope = Json::parse(slurp(fixture("solc/bank.json")));
    const std::string source = envelope["source"];
    const Json& unit = envelope["ast"];

    Json second = unit["nodes"];
    shift(second, 100000, static_cast<std::int64_t>(source.size()));
    Json merged = unit;
    for (auto& n : second)
        merged["nodes"].push_back(n);
    merged["src"] = "0:" + std::to_string(2 * source.size()) + ":0";

    const auto single = ast::parse_ast(envelope.dump());
    const auto doubled = ast::parse_ast(merged.dump(), source + source);
    std::map<std::string, std::size_t> once, twice;
    for (const auto& n : single.nodes())
        ++once[n.kind];
    for (const auto& n : doubled.nodes())
        ++twice[n.kind];
    for (const auto& [kind, count] : once)
        EXPECT_EQ(twice[kind], kind == "SourceUnit" ? 1u : 2 * count) << kind;
    EXPECT_EQ(ast::build_line_index(source + source).line_count(), 2 * ast::build_line_index(source).line_count());
}

} // namespace
} // namespace gscan::test
