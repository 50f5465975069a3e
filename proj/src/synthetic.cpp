#include "gscan/synthetic.hpp"

#include <algorithm>
#include <functional>
#include <iomanip>
#include <sstream>

#include "gscan/ast.hpp"
#include "gscan/random.hpp"
#include "json.hpp"

namespace gscan::synthetic {

namespace {

// Sorted keys, as the compiler emits them; preorder follows key order.
using Json = nlohmann::json;

// Builtin declaration ids as reported by solc 0.8.x.
constexpr std::int64_t kMsgId = 4294967281;
constexpr std::int64_t kRequireId = 4294967278;

class Writer
{
public:
    std::size_t pos() const noexcept { return text_.size(); }
    std::size_t line() const noexcept { return line_; }
    const std::string& text() const noexcept { return text_; }

    void put(std::string_view s)
    {
        line_ += static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
        text_ += s;
    }

    Json finish(std::string_view kind, std::size_t start, Json fields = Json::object())
    {
        return finish_span(kind, start, pos() - start, std::move(fields));
    }

    Json finish_span(std::string_view kind, std::size_t start, std::size_t length, Json fields = Json::object())
    {
        fields["nodeType"] = kind;
        fields["id"] = next_id_++;
        fields["src"] = std::to_string(start) + ":" + std::to_string(length) + ":0";
        return fields;
    }

private:
    std::string text_;
    std::size_t line_ = 1;
    std::int64_t next_id_ = 1;
};

using Expr = std::function<Json(Writer&)>;

Expr ident(std::string name, std::int64_t declaration)
{
    return [name = std::move(name), declaration](Writer& w) {
        const auto s = w.pos();
        w.put(name);
        return w.finish("Identifier", s, {{"name", name}, {"referencedDeclaration", declaration}});
    };
}

Expr member(Expr base, std::string name)
{
    return [base = std::move(base), name = std::move(name)](Writer& w) {
        const auto s = w.pos();
        Json e = base(w);
        w.put(".");
        w.put(name);
        return w.finish("MemberAccess", s, {{"expression", std::move(e)}, {"memberName", name}});
    };
}

Expr index(Expr base, Expr key)
{
    return [base = std::move(base), key = std::move(key)](Writer& w) {
        const auto s = w.pos();
        Json b = base(w);
        w.put("[");
        Json k = key(w);
        w.put("]");
        return w.finish("IndexAccess", s, {{"baseExpression", std::move(b)}, {"indexExpression", std::move(k)}});
    };
}

Expr binary(Expr lhs, std::string op, Expr rhs)
{
    return [lhs = std::move(lhs), op = std::move(op), rhs = std::move(rhs)](Writer& w) {
        const auto s = w.pos();
        Json l = lhs(w);
        w.put(" " + op + " ");
        Json r = rhs(w);
        return w.finish("BinaryOperation",
                        s,
                        {{"leftExpression", std::move(l)}, {"operator", op}, {"rightExpression", std::move(r)}});
    };
}

Expr assign(Expr lhs, std::string op, Expr rhs)
{
    return [lhs = std::move(lhs), op = std::move(op), rhs = std::move(rhs)](Writer& w) {
        const auto s = w.pos();
        Json l = lhs(w);
        w.put(" " + op + " ");
        Json r = rhs(w);
        return w.finish("Assignment",
                        s,
                        {{"leftHandSide", std::move(l)}, {"operator", op}, {"rightHandSide", std::move(r)}});
    };
}

Expr unary(std::string op, Expr operand, bool prefix)
{
    return [op = std::move(op), operand = std::move(operand), prefix](Writer& w) {
        const auto s = w.pos();
        if (prefix)
            w.put(op);
        Json e = operand(w);
        if (!prefix)
            w.put(op);
        return w.finish("UnaryOperation", s, {{"operator", op}, {"prefix", prefix}, {"subExpression", std::move(e)}});
    };
}

Expr literal(std::string text, std::string kind)
{
    return [text = std::move(text), kind = std::move(kind)](Writer& w) {
        const auto s = w.pos();
        w.put(text);
        return w.finish("Literal", s, {{"kind", kind}});
    };
}

Expr number(std::string digits)
{
    return literal(std::move(digits), "number");
}

Expr call(Expr callee, std::vector<Expr> args, std::string kind = "functionCall")
{
    return [callee = std::move(callee), args = std::move(args), kind = std::move(kind)](Writer& w) {
        const auto s = w.pos();
        Json c = callee(w);
        w.put("(");
        Json a = Json::array();
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (i > 0)
                w.put(", ");
            a.push_back(args[i](w));
        }
        w.put(")");
        return w.finish("FunctionCall", s, {{"arguments", std::move(a)}, {"expression", std::move(c)}, {"kind", kind}});
    };
}

Expr with_value(Expr callee, Expr value)
{
    return [callee = std::move(callee), value = std::move(value)](Writer& w) {
        const auto s = w.pos();
        Json c = callee(w);
        w.put("{value: ");
        Json v = value(w);
        w.put("}");
        return w.finish("FunctionCallOptions",
                        s,
                        {{"expression", std::move(c)}, {"names", Json::array({"value"})},
                         {"options", Json::array({std::move(v)})}});
    };
}

/// `payable(x)` / `address(x)`. The compiler spans the type expression of
/// payable as "payable(" including the parenthesis, and of address as
/// "address" alone.
Expr convert(std::string type, Expr operand)
{
    return [type = std::move(type), operand = std::move(operand)](Writer& w) {
        const auto s = w.pos();
        w.put(type);
        w.put("(");
        const std::size_t head = type == "payable" ? w.pos() - s : type.size();
        Json name = {{"name", "address"}};
        if (type == "payable")
            name["stateMutability"] = "payable";
        Json type_name = w.finish_span("ElementaryTypeName", s, head, std::move(name));
        Json type_expr = w.finish_span("ElementaryTypeNameExpression", s, head, {{"typeName", std::move(type_name)}});
        Json arg = operand(w);
        w.put(")");
        return w.finish("FunctionCall",
                        s,
                        {{"arguments", Json::array({std::move(arg)})}, {"expression", std::move(type_expr)},
                         {"kind", "typeConversion"}});
    };
}

Expr msg_member(std::string name)
{
    return member(ident("msg", kMsgId), std::move(name));
}

Expr require_call(Expr condition)
{
    return call(ident("require", kRequireId), {std::move(condition)});
}

using TypeEmitter = std::function<Json(Writer&)>;

TypeEmitter elementary(std::string name, bool in_mapping_key = false)
{
    return [name = std::move(name), in_mapping_key](Writer& w) {
        const auto s = w.pos();
        w.put(name);
        Json fields = {{"name", name}};
        if (name == "address" && !in_mapping_key)
            fields["stateMutability"] = "nonpayable";
        return w.finish("ElementaryTypeName", s, std::move(fields));
    };
}

TypeEmitter address_to_uint_mapping()
{
    return [](Writer& w) {
        const auto s = w.pos();
        w.put("mapping(");
        Json key = elementary("address", true)(w);
        w.put(" => ");
        Json value = elementary("uint256")(w);
        w.put(")");
        return w.finish("Mapping", s, {{"keyType", std::move(key)}, {"valueType", std::move(value)}});
    };
}

class Renderer
{
public:
    Renderer(const ContractPlan& plan, const Style& style)
        : plan_(plan)
        , style_(style)
    {}

    SyntheticContract run(std::string id);

private:
    const std::string& name(const std::string& role) const { return style_.name(role); }
    std::int64_t decl(const std::string& role) const { return declarations_.at(role); }
    Expr ref(const std::string& role) const { return ident(name(role), decl(role)); }

    void indent()
    {
        for (int i = 0; i < depth_; ++i)
            w_.put(style_.indent);
    }

    void comment(std::string_view text)
    {
        if (!style_.comments)
            return;
        indent();
        w_.put("// ");
        w_.put(text);
        w_.put("\n");
    }

    void blank()
    {
        if (style_.blank_lines)
            w_.put("\n");
    }

    void open_brace()
    {
        if (style_.brace_on_new_line) {
            w_.put("\n");
            indent();
        }
        else {
            w_.put(" ");
        }
    }

    Json variable(const TypeEmitter& type, const std::string& role, bool state, std::string location = "default")
    {
        const auto s = w_.pos();
        Json t = type(w_);
        w_.put(" ");
        if (location != "default")
            w_.put(location + " ");
        w_.put(role.empty() ? std::string() : name(role));
        Json v = w_.finish("VariableDeclaration",
                           s,
                           {{"constant", false}, {"mutability", "mutable"}, {"name", role.empty() ? "" : name(role)},
                            {"stateVariable", state}, {"storageLocation", location}, {"typeName", std::move(t)},
                            {"visibility", "internal"}});
        if (!role.empty())
            declarations_[role] = v["id"].get<std::int64_t>();
        return v;
    }

    /// Unnamed return parameter: the span is the type alone.
    Json return_variable(const TypeEmitter& type)
    {
        const auto s = w_.pos();
        Json t = type(w_);
        return w_.finish("VariableDeclaration",
                         s,
                         {{"constant", false}, {"mutability", "mutable"}, {"name", ""}, {"stateVariable", false},
                          {"storageLocation", "default"}, {"typeName", std::move(t)}, {"visibility", "internal"}});
    }

    Json parameters(const std::vector<std::function<Json()>>& items)
    {
        const auto s = w_.pos();
        w_.put("(");
        Json list = Json::array();
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (i > 0)
                w_.put(", ");
            list.push_back(items[i]());
        }
        w_.put(")");
        return w_.finish("ParameterList", s, {{"parameters", std::move(list)}});
    }

    Json empty_parameters_here() { return w_.finish_span("ParameterList", w_.pos(), 0, {{"parameters", Json::array()}}); }

    // Statements: each writes its own indentation and trailing newline.

    Json expression_statement(const Expr& e, bool mark = false)
    {
        indent();
        if (mark)
            vulnerable_lines_.push_back(w_.line());
        const auto s = w_.pos();
        Json x = e(w_);
        Json st = w_.finish("ExpressionStatement", s, {{"expression", std::move(x)}});
        w_.put(";\n");
        return st;
    }

    Json declaration_statement(const TypeEmitter& type, const std::string& role, const Expr* init, bool mark = false)
    {
        indent();
        if (mark)
            vulnerable_lines_.push_back(w_.line());
        const auto s = w_.pos();
        Json d = variable(type, role, false);
        Json fields = {{"assignments", Json::array({d["id"]})}, {"declarations", Json::array({d})}};
        if (init != nullptr) {
            w_.put(" = ");
            fields["initialValue"] = (*init)(w_);
        }
        Json st = w_.finish("VariableDeclarationStatement", s, std::move(fields));
        w_.put(";\n");
        return st;
    }

    Json return_statement(const Expr& e)
    {
        indent();
        const auto s = w_.pos();
        w_.put("return ");
        Json x = e(w_);
        Json st = w_.finish("Return", s, {{"expression", std::move(x)}});
        w_.put(";\n");
        return st;
    }

    Json block(const std::function<void(Json&)>& body)
    {
        const auto s = w_.pos();
        w_.put("{\n");
        ++depth_;
        Json statements = Json::array();
        body(statements);
        --depth_;
        indent();
        w_.put("}");
        return w_.finish("Block", s, {{"statements", std::move(statements)}});
    }

    struct FunctionSpec
    {
        std::string role;
        std::vector<std::function<Json()>> params;
        std::string visibility = "public";
        std::string mutability = "nonpayable";
        std::string modifier_role; // empty when unguarded
        std::optional<TypeEmitter> returns;
        std::function<void(Json&)> body;
    };

    Json function(const FunctionSpec& spec)
    {
        indent();
        const auto s = w_.pos();
        w_.put("function " + name(spec.role));
        Json params = parameters(spec.params);
        w_.put(" " + spec.visibility);
        if (spec.mutability != "nonpayable")
            w_.put(" " + spec.mutability);
        Json modifiers = Json::array();
        if (!spec.modifier_role.empty()) {
            w_.put(" ");
            const auto ms = w_.pos();
            w_.put(name(spec.modifier_role));
            Json path = w_.finish("IdentifierPath",
                                  ms,
                                  {{"name", name(spec.modifier_role)},
                                   {"referencedDeclaration", decl(spec.modifier_role)}});
            modifiers.push_back(w_.finish("ModifierInvocation", ms, {{"modifierName", std::move(path)}}));
        }
        Json returns;
        if (spec.returns) {
            w_.put(" returns ");
            returns = parameters({[&] { return return_variable(*spec.returns); }});
        }
        open_brace();
        if (!spec.returns)
            returns = empty_parameters_here();
        Json body = block(spec.body);
        Json fn = w_.finish("FunctionDefinition",
                            s,
                            {{"body", std::move(body)}, {"kind", "function"}, {"modifiers", std::move(modifiers)},
                             {"name", name(spec.role)}, {"parameters", std::move(params)},
                             {"returnParameters", std::move(returns)}, {"stateMutability", spec.mutability},
                             {"virtual", false}, {"visibility", spec.visibility}});
        w_.put("\n");
        return fn;
    }

    std::function<Json()> param(TypeEmitter type, std::string role)
    {
        return [this, type = std::move(type), role = std::move(role)] { return variable(type, role, false); };
    }

    // Contract members.

    Json state_variable(const TypeEmitter& type, const std::string& role)
    {
        indent();
        Json v = variable(type, role, true);
        w_.put(";\n");
        return v;
    }

    Json event_definition()
    {
        indent();
        const auto s = w_.pos();
        w_.put("event " + name("event"));
        Json params = parameters({param(elementary("address"), "event_who"), param(elementary("uint256"), "event_amount")});
        w_.put(";");
        Json ev = w_.finish("EventDefinition", s, {{"anonymous", false}, {"name", name("event")}, {"parameters", std::move(params)}});
        declarations_["event"] = ev["id"].get<std::int64_t>();
        w_.put("\n");
        return ev;
    }

    Json lock_modifier()
    {
        indent();
        const auto s = w_.pos();
        w_.put("modifier " + name("guard"));
        Json params = parameters({});
        open_brace();
        Json body = block([&](Json& st) {
            st.push_back(expression_statement(require_call(unary("!", ref("locked"), true))));
            st.push_back(expression_statement(assign(ref("locked"), "=", literal("true", "bool"))));
            indent();
            const auto ps = w_.pos();
            w_.put("_");
            st.push_back(w_.finish("PlaceholderStatement", ps));
            w_.put(";\n");
            st.push_back(expression_statement(assign(ref("locked"), "=", literal("false", "bool"))));
        });
        Json m = w_.finish("ModifierDefinition",
                           s,
                           {{"body", std::move(body)}, {"name", name("guard")}, {"parameters", std::move(params)},
                            {"virtual", false}, {"visibility", "internal"}});
        declarations_["guard"] = m["id"].get<std::int64_t>();
        w_.put("\n");
        return m;
    }

    Json deposit_function()
    {
        return function({.role = "deposit",
                         .params = {},
                         .mutability = "payable",
                         .body = [&](Json& st) {
                             st.push_back(expression_statement(
                                 assign(index(ref("balances"), msg_member("sender")), "+=", msg_member("value"))));
                             if (plan_.track_total)
                                 st.push_back(expression_statement(assign(ref("total"), "+=", msg_member("value"))));
                         }});
    }

    Expr recipient() const { return convert("payable", msg_member("sender")); }

    /// The external transfer; returns the statements it needs.
    void transfer_statements(Json& st)
    {
        comment("pay out");
        const bool mark = plan_.variant == Variant::Vulnerable;
        switch (plan_.subtype) {
        case Subtype::Call: {
            indent();
            if (mark)
                vulnerable_lines_.push_back(w_.line());
            const auto s = w_.pos();
            w_.put("(");
            Json ok = variable(elementary("bool"), "ok", false);
            w_.put(", )");
            w_.put(" = ");
            Json init = call(with_value(member(msg_member("sender"), "call"), ref("amount")),
                             {literal("\"\"", "string")})(w_);
            Json decl_stmt = w_.finish("VariableDeclarationStatement",
                                       s,
                                       {{"assignments", Json::array({ok["id"], nullptr})},
                                        {"declarations", Json::array({ok, nullptr})},
                                        {"initialValue", std::move(init)}});
            w_.put(";\n");
            st.push_back(std::move(decl_stmt));
            st.push_back(expression_statement(require_call(ref("ok"))));
            break;
        }
        case Subtype::Transfer:
            st.push_back(expression_statement(call(member(recipient(), "transfer"), {ref("amount")}), mark));
            break;
        case Subtype::Send:
            if (plan_.send_via_local) {
                const Expr init = call(member(recipient(), "send"), {ref("amount")});
                st.push_back(declaration_statement(elementary("bool"), "sent", &init, mark));
                st.push_back(expression_statement(require_call(ref("sent"))));
            }
            else {
                st.push_back(expression_statement(require_call(call(member(recipient(), "send"), {ref("amount")})),
                                                  mark));
            }
            break;
        }
    }

    void state_writes(Json& st, bool mark)
    {
        comment("update balances");
        if (plan_.withdraw_all)
            st.push_back(expression_statement(
                assign(index(ref("balances"), msg_member("sender")), "=", number("0")), mark));
        else
            st.push_back(expression_statement(
                assign(index(ref("balances"), msg_member("sender")), "-=", ref("amount")), mark));
        if (plan_.track_total)
            st.push_back(expression_statement(assign(ref("total"), "-=", ref("amount")), mark));
    }

    Json withdraw_function()
    {
        FunctionSpec spec;
        spec.role = plan_.withdraw_all ? "withdraw_all" : "withdraw";
        if (!plan_.withdraw_all)
            spec.params.push_back(param(elementary("uint256"), "amount"));
        if (plan_.variant == Variant::CleanLock)
            spec.modifier_role = "guard";
        spec.body = [&](Json& st) {
            if (plan_.extra_statement)
                st.push_back(expression_statement(
                    require_call(binary(msg_member("sender"), "!=", convert("address", number("0"))))));
            if (plan_.withdraw_all) {
                const Expr init = index(ref("balances"), msg_member("sender"));
                st.push_back(declaration_statement(elementary("uint256"), "amount", &init));
                st.push_back(expression_statement(require_call(binary(ref("amount"), ">", number("0")))));
            }
            else {
                st.push_back(expression_statement(
                    require_call(binary(index(ref("balances"), msg_member("sender")), ">=", ref("amount")))));
            }
            const bool writes_first = plan_.variant == Variant::CleanOrder;
            if (writes_first) {
                state_writes(st, false);
                transfer_statements(st);
            }
            else {
                transfer_statements(st);
                state_writes(st, plan_.variant == Variant::Vulnerable);
            }
            if (plan_.emit_event)
                st.push_back(emit_statement(msg_member("sender"), ref("amount")));
        };
        return function(spec);
    }

    Json emit_statement(const Expr& who, const Expr& amount)
    {
        indent();
        const auto s = w_.pos();
        w_.put("emit ");
        Json c = call(ident(name("event"), decl("event")), {who, amount})(w_);
        Json st = w_.finish("EmitStatement", s, {{"eventCall", std::move(c)}});
        w_.put(";\n");
        return st;
    }

    Json filler(Filler f)
    {
        switch (f) {
        case Filler::Getter:
            return function({.role = "getter",
                             .params = {param(elementary("address"), "getter_who")},
                             .mutability = "view",
                             .returns = elementary("uint256"),
                             .body = [&](Json& st) {
                                 st.push_back(return_statement(index(ref("balances"), ref("getter_who"))));
                             }});
        case Filler::Setter:
            return function({.role = "setter",
                             .params = {param(elementary("uint256"), "setter_value")},
                             .body = [&](Json& st) {
                                 st.push_back(expression_statement(assign(ref("limit"), "=", ref("setter_value"))));
                             }});
        case Filler::LoopSum:
            return function({.role = "loop_sum",
                             .params = {param(elementary("uint256"), "loop_n")},
                             .mutability = "pure",
                             .returns = elementary("uint256"),
                             .body = [&](Json& st) {
                                 const Expr zero = number("0");
                                 st.push_back(declaration_statement(elementary("uint256"), "loop_acc", &zero));
                                 st.push_back(for_loop());
                                 st.push_back(return_statement(ref("loop_acc")));
                             }});
        case Filler::Clamp:
            return function({.role = "clamp",
                             .params = {param(elementary("uint256"), "clamp_x")},
                             .mutability = "pure",
                             .returns = elementary("uint256"),
                             .body = [&](Json& st) { st.push_back(clamp_if()); }});
        case Filler::Countdown:
            return function({.role = "countdown",
                             .params = {param(elementary("uint256"), "count_n")},
                             .mutability = "pure",
                             .returns = elementary("uint256"),
                             .body = [&](Json& st) {
                                 const Expr zero = number("0");
                                 st.push_back(declaration_statement(elementary("uint256"), "count_steps", &zero));
                                 st.push_back(while_loop());
                                 st.push_back(return_statement(ref("count_steps")));
                             }});
        case Filler::Notify:
            return function({.role = "notify",
                             .params = {},
                             .body = [&](Json& st) { st.push_back(emit_statement(msg_member("sender"), number("0"))); }});
        case Filler::CodeSize:
            return function({.role = "code_size",
                             .params = {param(elementary("address"), "code_account")},
                             .mutability = "view",
                             .returns = elementary("bool"),
                             .body = [&](Json& st) {
                                 st.push_back(declaration_statement(elementary("uint256"), "code_size_var", nullptr));
                                 st.push_back(inline_assembly());
                                 st.push_back(return_statement(binary(ref("code_size_var"), ">", number("0"))));
                             }});
        }
        return Json();
    }

    Json for_loop()
    {
        indent();
        const auto s = w_.pos();
        w_.put("for (");
        const auto is = w_.pos();
        Json decl_node = variable(elementary("uint256"), "loop_i", false);
        w_.put(" = ");
        Json zero = number("0")(w_);
        Json init = w_.finish("VariableDeclarationStatement",
                              is,
                              {{"assignments", Json::array({decl_node["id"]})},
                               {"declarations", Json::array({decl_node})}, {"initialValue", std::move(zero)}});
        w_.put("; ");
        Json cond = binary(ref("loop_i"), "<", ref("loop_n"))(w_);
        w_.put("; ");
        const auto us = w_.pos();
        Json incr = unary("++", ref("loop_i"), false)(w_);
        Json update = w_.finish("ExpressionStatement", us, {{"expression", std::move(incr)}});
        w_.put(")");
        open_brace();
        Json body = block([&](Json& st) {
            st.push_back(expression_statement(assign(ref("loop_acc"), "+=", ref("loop_i"))));
        });
        Json loop = w_.finish("ForStatement",
                              s,
                              {{"body", std::move(body)}, {"condition", std::move(cond)},
                               {"initializationExpression", std::move(init)}, {"loopExpression", std::move(update)}});
        w_.put("\n");
        return loop;
    }

    Json while_loop()
    {
        indent();
        const auto s = w_.pos();
        w_.put("while (");
        Json cond = binary(ref("count_n"), ">", number("0"))(w_);
        w_.put(")");
        open_brace();
        Json body = block([&](Json& st) {
            st.push_back(expression_statement(unary("--", ref("count_n"), false)));
            st.push_back(expression_statement(unary("++", ref("count_steps"), false)));
        });
        Json loop = w_.finish("WhileStatement", s, {{"body", std::move(body)}, {"condition", std::move(cond)}});
        w_.put("\n");
        return loop;
    }

    Json clamp_if()
    {
        indent();
        const auto s = w_.pos();
        w_.put("if (");
        Json cond = binary(ref("clamp_x"), ">", number("100"))(w_);
        w_.put(")");
        open_brace();
        Json yes = block([&](Json& st) { st.push_back(return_statement(number("100"))); });
        if (style_.brace_on_new_line) {
            w_.put("\n");
            indent();
            w_.put("else");
        }
        else {
            w_.put(" else");
        }
        open_brace();
        Json no = block([&](Json& st) { st.push_back(return_statement(ref("clamp_x"))); });
        Json stmt = w_.finish("IfStatement",
                              s,
                              {{"condition", std::move(cond)}, {"falseBody", std::move(no)}, {"trueBody", std::move(yes)}});
        w_.put("\n");
        return stmt;
    }

    Json inline_assembly()
    {
        indent();
        const auto s = w_.pos();
        w_.put("assembly");
        open_brace();
        const auto bs = w_.pos();
        w_.put("{\n");
        ++depth_;
        indent();
        const auto as = w_.pos();
        const auto yul_ident = [&](const std::string& text) {
            const auto is = w_.pos();
            w_.put(text);
            return w_.finish("YulIdentifier", is, {{"name", text}});
        };
        Json target = yul_ident(name("code_size_var"));
        w_.put(" := ");
        const auto cs = w_.pos();
        Json fn = yul_ident("extcodesize");
        w_.put("(");
        Json arg = yul_ident(name("code_account"));
        w_.put(")");
        Json value = w_.finish("YulFunctionCall",
                               cs,
                               {{"arguments", Json::array({std::move(arg)})}, {"functionName", std::move(fn)}});
        Json assignment = w_.finish("YulAssignment",
                                    as,
                                    {{"value", std::move(value)}, {"variableNames", Json::array({std::move(target)})}});
        w_.put("\n");
        --depth_;
        indent();
        w_.put("}");
        Json yul_block = w_.finish("YulBlock", bs, {{"statements", Json::array({std::move(assignment)})}});
        Json st = w_.finish("InlineAssembly", s, {{"AST", std::move(yul_block)}, {"evmVersion", "paris"}});
        w_.put("\n");
        return st;
    }

    const ContractPlan& plan_;
    const Style& style_;
    Writer w_;
    std::map<std::string, std::int64_t> declarations_;
    std::vector<std::size_t> vulnerable_lines_;
    int depth_ = 0;
};

bool uses(const ContractPlan& plan, Filler f)
{
    return std::find(plan.fillers.begin(), plan.fillers.end(), f) != plan.fillers.end();
}

SyntheticContract Renderer::run(std::string id)
{
    w_.put("// SPDX-License-Identifier: MIT\n");
    const auto unit_start = w_.pos();
    const auto ps = w_.pos();
    w_.put("pragma solidity ^0.8.0;");
    Json pragma = w_.finish("PragmaDirective", ps, {{"literals", Json::array({"solidity", "^", "0.8", ".0"})}});
    w_.put("\n\n");

    const auto cs = w_.pos();
    w_.put("contract " + name("contract"));
    open_brace();
    w_.put("{\n");
    ++depth_;
    Json members = Json::array();
    members.push_back(state_variable(address_to_uint_mapping(), "balances"));
    if (plan_.track_total)
        members.push_back(state_variable(elementary("uint256"), "total"));
    if (uses(plan_, Filler::Setter))
        members.push_back(state_variable(elementary("uint256"), "limit"));
    const bool lock = plan_.variant == Variant::CleanLock || plan_.unused_lock;
    if (lock)
        members.push_back(state_variable(elementary("bool"), "locked"));
    if (plan_.emit_event || uses(plan_, Filler::Notify))
        members.push_back(event_definition());
    if (lock) {
        blank();
        members.push_back(lock_modifier());
    }
    blank();
    members.push_back(deposit_function());

    // Withdraw sits at a plan-determined slot among the fillers.
    const std::size_t slot = plan_.fillers.size() / 2;
    for (std::size_t i = 0; i <= plan_.fillers.size(); ++i) {
        if (i == slot) {
            blank();
            members.push_back(withdraw_function());
        }
        if (i < plan_.fillers.size()) {
            blank();
            members.push_back(filler(plan_.fillers[i]));
        }
    }
    --depth_;
    w_.put("}");
    Json contract = w_.finish("ContractDefinition",
                              cs,
                              {{"abstract", false}, {"contractKind", "contract"}, {"name", name("contract")},
                               {"nodes", std::move(members)}});
    w_.put("\n");
    Json unit = w_.finish("SourceUnit", unit_start, {{"license", "MIT"}, {"nodes", Json::array({pragma, contract})}});

    SyntheticContract out;
    out.id = std::move(id);
    out.source = w_.text();
    out.line_count = w_.line() - 1;
    out.plan = plan_;
    out.vulnerable_lines = vulnerable_lines_;
    out.ast_json = ast::make_envelope(ast::Json::parse(unit.dump()), out.source, kSyntheticCompilerVersion,
                                      out.id + ".sol")
                       .dump();
    return out;
}

const std::vector<std::pair<std::string, std::vector<std::string>>>& name_pools()
{
    static const std::vector<std::pair<std::string, std::vector<std::string>>> pools = {
        {"contract", {"Vault", "Bank", "EtherStore", "Wallet", "Treasury", "Escrow", "Pool", "Reserve"}},
        {"balances", {"balances", "deposits", "ledger", "credit", "funds", "userBalance", "shares"}},
        {"total", {"total", "totalSupply", "reserve", "supply", "tvl"}},
        {"limit", {"limit", "cap", "threshold", "ceiling"}},
        {"locked", {"locked", "entered", "busy", "mutex"}},
        {"guard", {"nonReentrant", "noReentry", "lock", "guarded", "mutexed"}},
        {"event", {"Withdrawn", "Withdrawal", "Paid", "Payout", "Sent"}},
        {"event_who", {"who", "account", "user", "to"}},
        {"event_amount", {"amount", "value", "wad", "qty"}},
        {"deposit", {"deposit", "fund", "topUp", "addFunds"}},
        {"withdraw", {"withdraw", "claim", "redeem", "cashOut"}},
        {"withdraw_all", {"withdrawAll", "claimAll", "exit", "drain"}},
        {"amount", {"amount", "amt", "wad", "qty", "howMuch"}},
        {"ok", {"ok", "success", "sentOk", "done"}},
        {"sent", {"sent", "delivered", "paid", "okSend"}},
        {"getter", {"balanceOf", "getBalance", "creditOf", "fundsOf"}},
        {"getter_who", {"who", "account", "user", "holder"}},
        {"setter", {"setLimit", "updateCap", "configure", "setThreshold"}},
        {"setter_value", {"newLimit", "v", "x", "newCap"}},
        {"loop_sum", {"sumTo", "triangle", "accumulate", "series"}},
        {"loop_n", {"n", "upTo", "count", "bound"}},
        {"loop_acc", {"acc", "s", "result", "runningSum"}},
        {"loop_i", {"i", "j", "k", "idx"}},
        {"clamp", {"clamp", "capAt", "bounded", "limitTo"}},
        {"clamp_x", {"x", "input", "raw", "val"}},
        {"countdown", {"countdown", "stepsTo", "drainCount", "ticks"}},
        {"count_n", {"n", "left", "remaining", "c"}},
        {"count_steps", {"steps", "t", "iterations", "m"}},
        {"notify", {"ping", "poke", "heartbeat", "signal"}},
        {"code_size", {"isContract", "hasCode", "isDeployed", "codeExists"}},
        {"code_account", {"account", "target", "addr", "who"}},
        {"code_size_var", {"size", "len", "codeLen", "sz"}},
    };
    return pools;
}

} // namespace

std::string_view to_string(Subtype subtype)
{
    switch (subtype) {
    case Subtype::Call:
        return "call";
    case Subtype::Send:
        return "send";
    case Subtype::Transfer:
        return "transfer";
    }
    return "call";
}

std::optional<Subtype> parse_subtype(std::string_view text)
{
    for (const auto s : kSubtypes)
        if (to_string(s) == text)
            return s;
    return std::nullopt;
}

std::string_view to_string(Variant variant)
{
    switch (variant) {
    case Variant::Vulnerable:
        return "vulnerable";
    case Variant::CleanOrder:
        return "clean-order";
    case Variant::CleanLock:
        return "clean-lock";
    }
    return "vulnerable";
}

Style default_style()
{
    Style style;
    for (const auto& [role, pool] : name_pools())
        style.names[role] = pool.front();
    return style;
}

Style random_style(std::mt19937_64& rng)
{
    Style style;
    for (const auto& [role, pool] : name_pools())
        style.names[role] = pick(pool, rng);
    static const std::vector<std::string> indents = {"    ", "  ", "\t"};
    style.indent = pick(indents, rng);
    style.blank_lines = bernoulli(rng, 0.7);
    style.comments = bernoulli(rng, 0.3);
    style.brace_on_new_line = bernoulli(rng, 0.2);
    return style;
}

ContractPlan random_plan(std::mt19937_64& rng, Subtype subtype, Variant variant)
{
    ContractPlan plan;
    plan.subtype = subtype;
    plan.variant = variant;
    plan.track_total = bernoulli(rng, 0.5);
    plan.withdraw_all = bernoulli(rng, 0.3);
    plan.send_via_local = subtype == Subtype::Send && bernoulli(rng, 0.5);
    plan.emit_event = bernoulli(rng, 0.4);
    plan.unused_lock = variant != Variant::CleanLock && bernoulli(rng, 0.2);
    plan.extra_statement = bernoulli(rng, 0.2);
    std::vector<Filler> all = {Filler::Getter, Filler::Setter,    Filler::LoopSum, Filler::Clamp,
                               Filler::Countdown, Filler::Notify, Filler::CodeSize};
    shuffle(all, rng);
    all.resize(uniform_index(rng, 3));
    plan.fillers = std::move(all);
    return plan;
}

SyntheticContract render(const ContractPlan& plan, const Style& style, std::string id)
{
    return Renderer(plan, style).run(std::move(id));
}

std::vector<SyntheticContract> generate_synthetic_corpus(std::size_t n_clean, std::size_t n_vulnerable,
                                                         std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<SyntheticContract> out;
    out.reserve(n_clean + n_vulnerable);
    const auto make_id = [](std::string_view prefix, std::size_t i) {
        std::ostringstream s;
        s << prefix << '-' << std::setw(4) << std::setfill('0') << i;
        return s.str();
    };
    for (std::size_t i = 0; i < n_vulnerable; ++i) {
        const ContractPlan plan = random_plan(rng, kSubtypes[i % 3], Variant::Vulnerable);
        out.push_back(render(plan, random_style(rng), make_id("vuln", i)));
    }
    for (std::size_t i = 0; i < n_clean; ++i) {
        const Variant variant = i % 2 == 0 ? Variant::CleanOrder : Variant::CleanLock;
        const ContractPlan plan = random_plan(rng, kSubtypes[(i / 2) % 3], variant);
        out.push_back(render(plan, random_style(rng), make_id("clean", i)));
    }
    return out;
}

} // namespace gscan::synthetic
