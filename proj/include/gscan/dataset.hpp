/**
 * @file dataset.hpp
 * @brief Dataset records, content-addressed deduplication, seeded splits, and
 *        the on-disk corpus layout.
 *
 * Corpus directory:
 *   manifest.json          ids, digests, subtypes, split membership
 *   records/<digest>.bin   one record container per representative
 *   labels/<id>.lines      vulnerable line numbers, one per line
 *   sources/<id>.sol       source text when known
 *   asts/<id>.json         AST envelope when known
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gscan/ast.hpp"
#include "gscan/features.hpp"
#include "gscan/graph.hpp"
#include "gscan/labels.hpp"
#include "gscan/synthetic.hpp"

namespace gscan::dataset {

using synthetic::Subtype;

struct DatasetRecord
{
    std::string id;
    graph::CodeGraph graph;
    features::FeatureMatrix features;
    labels::NodeLabels labels;
    Subtype subtype = Subtype::Call;
    /// canonical_hash(graph)
    std::string digest;
    std::size_t line_count = 0;
    std::vector<std::size_t> vulnerable_lines;

    bool vulnerable() const noexcept { return !vulnerable_lines.empty(); }
};

/// Hex sha256 of graph.canonical_serialization().
std::string canonical_hash(const graph::CodeGraph& graph);

/// Graph, features and node labels for one parsed contract.
DatasetRecord build_record(std::string id, const ast::AstDocument& doc, std::vector<std::size_t> vulnerable_lines,
                           Subtype subtype);

/**
 * The transfer kind a contract exercises: the first call/send/transfer
 * member access on a vulnerable line, else the first anywhere, else call.
 */
Subtype infer_subtype(const ast::AstDocument& doc, const std::vector<std::size_t>& vulnerable_lines);

/// One record per digest, the one with the smallest id; result sorted by id.
std::vector<DatasetRecord> deduplicate(std::vector<DatasetRecord> records);

enum class Split : std::uint8_t { Train, Validation, Test };
std::string_view to_string(Split split);
std::optional<Split> parse_split(std::string_view text);

struct SplitRatios
{
    double train = 0.84;
    double validation = 0.08;
    double test = 0.08;

    friend bool operator==(const SplitRatios&, const SplitRatios&) = default;
};

struct SplitManifest
{
    std::vector<std::string> train;
    std::vector<std::string> validation;
    std::vector<std::string> test;
    std::uint64_t seed = 0;
    SplitRatios ratios;

    const std::vector<std::string>& ids(Split split) const;
    std::optional<Split> split_of(std::string_view id) const;

    friend bool operator==(const SplitManifest&, const SplitManifest&) = default;
};

/**
 * Sorts ids, shuffles with `seed`, then takes round(n*train) for training,
 * round(n*validation) for validation (capped by what is left) and the rest
 * for test. Throws BadRatios unless all ratios are >= 0 and sum to 1.
 */
SplitManifest split(std::vector<std::string> ids, const SplitRatios& ratios, std::uint64_t seed);

/// Versioned binary container with a trailing sha256. decode throws
/// BadCheckpoint on corruption.
std::string encode_record(const DatasetRecord& record);
DatasetRecord decode_record(std::string_view bytes);

struct CorpusEntry
{
    std::string source;
    std::string ast_json;
};

struct CorpusStats
{
    std::size_t input_count = 0;
    std::size_t duplicates_removed = 0;
};

struct Corpus
{
    std::vector<DatasetRecord> records;
    SplitManifest manifest;
    CorpusStats stats;

    const DatasetRecord& by_id(std::string_view id) const;
    std::vector<const DatasetRecord*> records_in(Split split) const;
};

/// Parses each envelope, builds records and collects sources/ASTs for the
/// corpus directory.
struct BuiltRecords
{
    std::vector<DatasetRecord> records;
    std::map<std::string, CorpusEntry> entries;
};

BuiltRecords records_from_synthetic(const std::vector<synthetic::SyntheticContract>& contracts);

/**
 * Reads every *.json AST under `dir`. Vulnerable lines come from a sibling
 * <stem>.lines file (absent means clean); ids are file stems.
 */
BuiltRecords records_from_ast_dir(const std::filesystem::path& dir);

/// Deduplicates and splits; write_corpus persists the result.
Corpus build_corpus(BuiltRecords built, const SplitRatios& ratios, std::uint64_t seed);
void write_corpus(const std::filesystem::path& dir, const Corpus& corpus,
                  const std::map<std::string, CorpusEntry>& entries);
/// Throws Io, BadCheckpoint, SchemaMismatch.
Corpus load_corpus(const std::filesystem::path& dir);

/// Line-number list format used by labels/<id>.lines.
std::string format_lines(const std::vector<std::size_t>& lines);
std::vector<std::size_t> parse_lines(std::string_view text);

} // namespace gscan::dataset
