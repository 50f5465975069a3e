#include "gscan/features.hpp"

#include <optional>
#include <sstream>

#include "gscan/error.hpp"

namespace gscan::features {

namespace {

constexpr std::string_view kModule = "node_features";

constexpr std::size_t kLoopDim = 0;
constexpr std::size_t kCallMemberDim = 17;
constexpr std::size_t kReferenceDim = 18;
constexpr std::size_t kOtherKindDim = 19;
constexpr std::size_t kOperatorDim = 26;
constexpr std::size_t kLiteralDim = 27;
constexpr std::size_t kMemberDim = 28;

std::optional<std::string> attribute_text(const ast::AstNode& node, std::string_view key)
{
    const ast::Json* value = node.attribute(key);
    if (value == nullptr)
        return std::nullopt;
    if (value->is_string())
        return value->get<std::string>();
    if (value->is_boolean())
        return value->get<bool>() ? "true" : "false";
    return std::nullopt;
}

} // namespace

const FeatureSchema& FeatureSchema::standard()
{
    static const FeatureSchema schema = [] {
        FeatureSchema s;
        s.version_ = "gscan-features/1";

        const auto group = [&s](std::size_t dim, std::initializer_list<std::string_view> kinds) {
            int code = 1;
            for (const auto kind : kinds)
                s.kinds_.emplace(std::string(kind), KindCode{dim, code++});
        };
        group(kLoopDim, {"DoWhileStatement", "WhileStatement", "ForStatement", "YulForLoop"});
        group(1, {"SourceUnit", "PragmaDirective", "ImportDirective", "ContractDefinition", "InheritanceSpecifier",
                  "UsingForDirective", "StructDefinition", "EnumDefinition", "EnumValue",
                  "UserDefinedValueTypeDefinition", "StructuredDocumentation"});
        group(2, {"FunctionDefinition", "ModifierDefinition", "YulFunctionDefinition", "EventDefinition",
                  "ErrorDefinition", "ModifierInvocation", "OverrideSpecifier", "ParameterList"});
        group(3, {"VariableDeclaration", "VariableDeclarationStatement", "YulVariableDeclaration", "YulTypedName"});
        group(4, {"ElementaryTypeName", "UserDefinedTypeName", "ArrayTypeName", "FunctionTypeName", "IdentifierPath",
                  "ElementaryTypeNameExpression"});
        group(5, {"Mapping"});
        group(6, {"Assignment", "YulAssignment"});
        group(7, {"BinaryOperation", "UnaryOperation"});
        group(8, {"FunctionCall", "YulFunctionCall", "FunctionCallOptions", "NewExpression"});
        group(9, {"MemberAccess"});
        group(10, {"IndexAccess", "IndexRangeAccess"});
        group(11, {"Literal", "YulLiteral", "TupleExpression"});
        group(12, {"Identifier", "YulIdentifier"});
        group(13, {"Block", "UncheckedBlock", "YulBlock", "InlineAssembly", "PlaceholderStatement"});
        group(14, {"IfStatement", "Conditional", "YulIf", "YulSwitch", "YulCase", "TryStatement", "TryCatchClause"});
        group(15, {"Return", "Break", "Continue", "YulBreak", "YulContinue", "YulLeave", "Throw", "RevertStatement"});
        group(16, {"ExpressionStatement", "YulExpressionStatement", "EmitStatement"});

        s.attributes_ = {
            {20, "visibility", {{"internal", 1}, {"external", 2}, {"private", 3}, {"public", 4}}, 5},
            {21, "stateMutability", {{"pure", 1}, {"view", 2}, {"nonpayable", 3}, {"payable", 4}, {"constant", 5}}, 6},
            {22, "storageLocation", {{"default", 1}, {"storage", 2}, {"memory", 3}, {"calldata", 4}}, 5},
            {23, "constant", {{"false", 1}, {"true", 2}}, 3},
            {24, "stateVariable", {{"false", 1}, {"true", 2}}, 3},
            {25, "mutability", {{"mutable", 1}, {"immutable", 2}, {"constant", 3}}, 4},
        };

        for (const auto op : {"+", "-", "*", "/", "%", "**"})
            s.operator_classes_.emplace(op, 1);
        for (const auto op : {"==", "!=", "<", ">", "<=", ">="})
            s.operator_classes_.emplace(op, 2);
        for (const auto op : {"&&", "||", "!"})
            s.operator_classes_.emplace(op, 3);
        for (const auto op : {"&", "|", "^", "~", "<<", ">>", ">>>"})
            s.operator_classes_.emplace(op, 4);
        s.operator_classes_.emplace("=", 5);
        for (const auto op : {"+=", "-=", "*=", "/=", "%=", "|=", "&=", "^=", "<<=", ">>=", ">>>="})
            s.operator_classes_.emplace(op, 6);
        for (const auto op : {"++", "--"})
            s.operator_classes_.emplace(op, 7);
        s.operator_classes_.emplace("delete", 8);
        s.operator_other_ = 9;

        s.literal_kinds_ = {{"number", 1}, {"bool", 2}, {"string", 3}, {"hexString", 4}, {"unicodeString", 5}};
        s.literal_other_ = 6;

        s.call_members_ = {{"call", 1}, {"delegatecall", 2}, {"staticcall", 3}, {"callcode", 4}};
        return s;
    }();
    return schema;
}

FeatureSchema FeatureSchema::with_strict(bool strict) const
{
    FeatureSchema copy = *this;
    copy.strict_ = strict;
    return copy;
}

std::string FeatureSchema::manifest() const
{
    std::ostringstream out;
    out << "schema " << version_ << '\n';
    out << "dims " << kFeatureDim << '\n';
    for (const auto& [kind, code] : kinds_)
        out << "kind " << kind << ' ' << code.dim << ' ' << code.code << '\n';
    out << "kind * " << kOtherKindDim << " 1\n";
    for (const auto& table : attributes_) {
        for (const auto& [value, code] : table.codes)
            out << "attr " << table.key << ' ' << value << ' ' << table.dim << ' ' << code << '\n';
        out << "attr " << table.key << " * " << table.dim << ' ' << table.other << '\n';
    }
    for (const auto& [op, code] : operator_classes_)
        out << "operator " << op << ' ' << kOperatorDim << ' ' << code << '\n';
    out << "operator * " << kOperatorDim << ' ' << operator_other_ << '\n';
    for (const auto& [kind, code] : literal_kinds_)
        out << "literal " << kind << ' ' << kLiteralDim << ' ' << code << '\n';
    out << "literal * " << kLiteralDim << ' ' << literal_other_ << '\n';
    for (const auto& [member, code] : call_members_)
        out << "callmember " << member << ' ' << kCallMemberDim << ' ' << code << '\n';
    out << "reference builtin " << kReferenceDim << " 1\n";
    out << "reference declared " << kReferenceDim << " 2\n";
    out << "member transfer " << kMemberDim << " 1\n";
    out << "member send " << kMemberDim << " -1\n";
    return out.str();
}

FeatureVector FeatureSchema::encode(const ast::AstNode& node) const
{
    FeatureVector v{};

    if (const auto it = kinds_.find(node.kind); it != kinds_.end())
        v[it->second.dim] = static_cast<float>(it->second.code);
    else if (strict_)
        throw Error(ErrorCode::UnknownKind, kModule, "no feature code for node kind '" + node.kind + "'");
    else
        v[kOtherKindDim] = 1.0f;

    for (const auto& table : attributes_) {
        const auto value = attribute_text(node, table.key);
        if (!value)
            continue;
        const auto it = table.codes.find(*value);
        v[table.dim] = static_cast<float>(it == table.codes.end() ? table.other : it->second);
    }

    if (const auto op = node.string_attribute("operator")) {
        const auto it = operator_classes_.find(*op);
        v[kOperatorDim] = static_cast<float>(it == operator_classes_.end() ? operator_other_ : it->second);
    }

    if (node.kind == "Literal" || node.kind == "YulLiteral") {
        if (const auto kind = node.string_attribute("kind")) {
            const auto it = literal_kinds_.find(*kind);
            v[kLiteralDim] = static_cast<float>(it == literal_kinds_.end() ? literal_other_ : it->second);
        }
    }

    if (const auto member = node.string_attribute("memberName")) {
        if (const auto it = call_members_.find(*member); it != call_members_.end())
            v[kCallMemberDim] = static_cast<float>(it->second);
        if (*member == "transfer")
            v[kMemberDim] = 1.0f;
        else if (*member == "send")
            v[kMemberDim] = -1.0f;
    }

    if (const auto target = node.referenced_declaration())
        v[kReferenceDim] = ast::is_builtin_declaration(*target) ? 1.0f : 2.0f;

    return v;
}

FeatureVector encode_node(const ast::AstNode& node, const FeatureSchema& schema)
{
    return schema.encode(node);
}

FeatureMatrix encode_graph(const graph::CodeGraph& graph, const ast::AstDocument& doc, const FeatureSchema& schema)
{
    FeatureMatrix matrix(graph.node_count());
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        const auto index = doc.index_of(graph.ast_ids()[i]);
        if (!index)
            throw Error(ErrorCode::LengthMismatch, kModule,
                        "graph node " + std::to_string(i) + " has no AST counterpart");
        const FeatureVector v = schema.encode(doc.node(*index));
        std::copy(v.begin(), v.end(), matrix.row(i).begin());
    }
    return matrix;
}

} // namespace gscan::features
