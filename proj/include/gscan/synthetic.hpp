/**
 * @file synthetic.hpp
 * @brief Labeled reentrancy corpus generator.
 *
 * Each contract is rendered twice at once: as Solidity text and as the
 * compact-AST JSON the compiler produces for that text (same node kinds,
 * child groups, attributes that feed features, and byte spans). Ids are
 * assigned in post-order like the compiler's, but are not identical to it.
 *
 * A plan fixes the program structure; a style fixes identifiers, layout and
 * comments. Two renders of one plan under different styles produce the same
 * code graph.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace gscan::synthetic {

enum class Subtype : std::uint8_t { Call, Send, Transfer };
inline constexpr Subtype kSubtypes[] = {Subtype::Call, Subtype::Send, Subtype::Transfer};

std::string_view to_string(Subtype subtype);
std::optional<Subtype> parse_subtype(std::string_view text);

enum class Variant : std::uint8_t {
    /// External call first, state writes after, no lock.
    Vulnerable,
    /// State writes before the external call.
    CleanOrder,
    /// Vulnerable ordering guarded by a reentrancy lock modifier.
    CleanLock,
};

std::string_view to_string(Variant variant);

enum class Filler : std::uint8_t { Getter, Setter, LoopSum, Clamp, Countdown, Notify, CodeSize };

struct ContractPlan
{
    Subtype subtype = Subtype::Call;
    Variant variant = Variant::Vulnerable;
    /// A second state variable updated alongside the balance.
    bool track_total = false;
    /// `withdrawAll()` reads the amount into a local instead of taking it as a parameter.
    bool withdraw_all = false;
    /// send: `bool sent = ...send(x); require(sent);` instead of `require(...send(x));`
    bool send_via_local = false;
    bool emit_event = false;
    /// Lock modifier present even though withdraw does not use it.
    bool unused_lock = false;
    /// One extra guard statement at the top of withdraw.
    bool extra_statement = false;
    std::vector<Filler> fillers;

    friend bool operator==(const ContractPlan&, const ContractPlan&) = default;
};

struct Style
{
    /// Identifier per role; see default_style() for the role keys.
    std::map<std::string, std::string> names;
    std::string indent = "    ";
    bool blank_lines = true;
    bool comments = false;
    bool brace_on_new_line = false;

    const std::string& name(const std::string& role) const { return names.at(role); }
};

Style default_style();
Style random_style(std::mt19937_64& rng);
ContractPlan random_plan(std::mt19937_64& rng, Subtype subtype, Variant variant);

struct SyntheticContract
{
    std::string id;
    std::string source;
    /// Envelope {compilerVersion, sourcePath, source, ast}; see ast::make_envelope.
    std::string ast_json;
    std::size_t line_count = 0;
    /// 1-based lines holding the external call and the state writes after it.
    std::vector<std::size_t> vulnerable_lines;
    ContractPlan plan;
};

inline constexpr std::string_view kSyntheticCompilerVersion = "0.8.19";

SyntheticContract render(const ContractPlan& plan, const Style& style, std::string id);

/**
 * n_clean clean and n_vulnerable vulnerable contracts, subtypes in rotation,
 * clean ones split between reordering and locking. Ids are "clean-NNNN" and
 * "vuln-NNNN". Deterministic in `seed`.
 */
std::vector<SyntheticContract> generate_synthetic_corpus(std::size_t n_clean, std::size_t n_vulnerable,
                                                         std::uint64_t seed);

} // namespace gscan::synthetic
