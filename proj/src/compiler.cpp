#include "gscan/compiler.hpp"

#include <cstdlib>
#include <random>
#include <unistd.h>

#include "gscan/ast.hpp"
#include "gscan/error.hpp"
#include "gscan/io.hpp"

namespace gscan::compiler {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kModule = "compiler";

std::string shell_quote(const std::string& s)
{
    std::string out = "'";
    for (const char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    return out + "'";
}

bool on_path(const std::string& name)
{
    const char* path = std::getenv("PATH");
    if (path == nullptr)
        return false;
    std::string_view rest(path);
    while (!rest.empty()) {
        const auto colon = rest.find(':');
        const auto dir = rest.substr(0, colon);
        if (!dir.empty() && ::access((fs::path(dir) / name).c_str(), X_OK) == 0)
            return true;
        if (colon == std::string_view::npos)
            break;
        rest.remove_prefix(colon + 1);
    }
    return false;
}

/// Temp files named after the process and a random tag; removed on scope exit.
class TempFile
{
public:
    explicit TempFile(std::string_view suffix)
    {
        std::random_device rd;
        path_ = fs::temp_directory_path()
                / ("gscan-" + std::to_string(::getpid()) + "-" + std::to_string(rd()) + std::string(suffix));
    }
    ~TempFile()
    {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    TempFile(const TempFile&) = delete;
    TempFile& operator=(const TempFile&) = delete;

    const fs::path& path() const noexcept { return path_; }

private:
    fs::path path_;
};

/// Runs `command`, capturing stdout through a file (solcjs truncates pipes).
std::string run(const std::string& command, const std::string& stdin_text)
{
    TempFile in(".in");
    TempFile out(".out");
    io::write_file(in.path(), stdin_text);
    const std::string full =
        command + " < " + shell_quote(in.path().string()) + " > " + shell_quote(out.path().string()) + " 2>/dev/null";
    const int status = std::system(full.c_str());
    if (status != 0)
        throw Error(ErrorCode::CompilerUnavailable, kModule, "'" + command + "' exited with status "
                                                                 + std::to_string(status));
    return io::read_file(out.path());
}

} // namespace

std::optional<std::string> find_compiler()
{
    if (const char* env = std::getenv("GSCAN_SOLC"); env != nullptr && *env != '\0') {
        if (::access(env, X_OK) == 0 || on_path(env))
            return std::string(env);
        return std::nullopt;
    }
    if (on_path("solc"))
        return std::string("solc");
    return std::nullopt;
}

std::string compiler_version(const std::string& compiler)
{
    const std::string text = run(shell_quote(compiler) + " --version", "");
    const auto version = ast::CompilerVersion::parse(text);
    if (!version)
        throw Error(ErrorCode::CompilerUnavailable, kModule, "cannot read a version from '" + compiler + " --version'");
    return version->to_string();
}

std::string compile_to_envelope(const fs::path& source_path)
{
    const auto compiler = find_compiler();
    if (!compiler)
        throw Error(ErrorCode::CompilerUnavailable, kModule,
                    "no Solidity compiler: set GSCAN_SOLC or put solc on PATH, or scan a pre-generated AST");
    const std::string source = io::read_file(source_path);
    const std::string name = source_path.filename().string();

    ast::Json input;
    input["language"] = "Solidity";
    input["sources"][name]["content"] = source;
    input["settings"]["outputSelection"]["*"][""] = ast::Json::array({"ast"});

    std::string output = run(shell_quote(*compiler) + " --standard-json", input.dump());
    // solcjs may print a notice line before the JSON document.
    const auto brace = output.find('{');
    if (brace == std::string::npos)
        throw Error(ErrorCode::CompilerUnavailable, kModule, "compiler produced no JSON output");
    ast::Json result;
    try {
        result = ast::Json::parse(output.substr(brace));
    }
    catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::CompilerUnavailable, kModule, std::string("unreadable compiler output: ") + e.what());
    }
    std::string messages;
    if (const auto it = result.find("errors"); it != result.end())
        for (const auto& e : *it)
            if (e.value("severity", "") == "error")
                messages += "\n" + e.value("formattedMessage", e.value("message", "error"));
    if (!messages.empty())
        throw Error(ErrorCode::MalformedAst, kModule, "compilation failed:" + messages);

    const auto sources = result.find("sources");
    if (sources == result.end() || !sources->contains(name) || !(*sources)[name].contains("ast"))
        throw Error(ErrorCode::MalformedAst, kModule, "compiler output holds no AST for " + name);
    return ast::make_envelope((*sources)[name]["ast"], source, compiler_version(*compiler), source_path.string())
        .dump();
}

} // namespace gscan::compiler
