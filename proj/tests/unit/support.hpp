#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "gscan/ast.hpp"
#include "gscan/error.hpp"

namespace gscan::test {

inline std::filesystem::path fixture(const std::string& relative)
{
    return std::filesystem::path(GSCAN_FIXTURE_DIR) / relative;
}

inline std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline ast::AstDocument load_fixture(const std::string& relative)
{
    return ast::parse_ast(slurp(fixture(relative)));
}

/// Hand-built compact-AST node. `id` < 0 leaves the id out (Yul style).
inline ast::Json node(const std::string& kind, std::int64_t id, ast::Json fields = ast::Json::object(),
                      const std::string& src = "0:0:0")
{
    ast::Json n = ast::Json::object();
    n["nodeType"] = kind;
    if (id >= 0)
        n["id"] = id;
    n["src"] = src;
    for (auto& [key, value] : fields.items())
        n[key] = value;
    return n;
}

inline ast::AstDocument parse_root(const ast::Json& root, std::string source = std::string(64, ' '))
{
    return ast::parse_ast(root.dump(), std::move(source));
}

/// Runs `f` and returns the gscan error code it throws, if any.
template <typename F>
std::optional<ErrorCode> error_of(F&& f)
{
    try {
        f();
    }
    catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

} // namespace gscan::test

#define EXPECT_GSCAN_ERROR(expr, error_code) EXPECT_EQ(::gscan::test::error_of([&] { (void)(expr); }), error_code)
