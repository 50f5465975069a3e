/**
 * @file compiler.hpp
 * @brief Runs an external Solidity compiler to obtain a compact AST.
 *
 * The compiler is $GSCAN_SOLC when set, otherwise `solc` on PATH. Both the
 * native binary and solcjs work: input goes through --standard-json.
 */
#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace gscan::compiler {

/// Path or command name of the compiler, or nullopt when none is usable.
std::optional<std::string> find_compiler();

/// First X.Y.Z reported by `<compiler> --version`. Throws CompilerUnavailable.
std::string compiler_version(const std::string& compiler);

/// Compiles one source file and returns an AST envelope (see
/// ast::make_envelope). Throws CompilerUnavailable, MalformedAst (compile
/// errors), Io.
std::string compile_to_envelope(const std::filesystem::path& source_path);

} // namespace gscan::compiler
