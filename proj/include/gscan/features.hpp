/**
 * @file features.hpp
 * @brief 29-dimensional node feature encoding.
 *
 * Layout:
 *   0      loop kind (DoWhile 1, While 2, For 3, YulForLoop 4)
 *   1-16   merged node-kind groups (see FeatureSchema::standard())
 *   17     low-level call member (call, delegatecall, staticcall, callcode)
 *   18     reference target (builtin 1, user declaration 2)
 *   19     kind outside every group
 *   20     visibility (internal 1, external 2, private 3, public 4, other 5)
 *   21-27  stateMutability, storageLocation, constant, stateVariable,
 *          mutability, operator class, literal kind
 *   28     memberName (transfer 1, send -1)
 * Code 0 always means "not applicable". Codes are raw integers.
 */
#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gscan/ast.hpp"
#include "gscan/graph.hpp"

namespace gscan::features {

inline constexpr std::size_t kFeatureDim = 29;

using FeatureVector = std::array<float, kFeatureDim>;

/// Row-major n x 29 matrix.
class FeatureMatrix
{
public:
    FeatureMatrix() = default;
    explicit FeatureMatrix(std::size_t rows)
        : rows_(rows)
        , values_(rows * kFeatureDim, 0.0f)
    {}

    std::size_t rows() const noexcept { return rows_; }
    static constexpr std::size_t cols() noexcept { return kFeatureDim; }

    std::span<float> row(std::size_t i) { return {values_.data() + i * kFeatureDim, kFeatureDim}; }
    std::span<const float> row(std::size_t i) const { return {values_.data() + i * kFeatureDim, kFeatureDim}; }
    const std::vector<float>& values() const noexcept { return values_; }
    std::vector<float>& values() noexcept { return values_; }

    friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::vector<float> values_;
};

class FeatureSchema
{
public:
    /// The schema shipped with this build.
    static const FeatureSchema& standard();

    const std::string& version() const noexcept { return version_; }

    /// With strict set, a kind outside every group raises UnknownKind instead
    /// of landing in dim 19.
    bool strict() const noexcept { return strict_; }
    FeatureSchema with_strict(bool strict) const;

    /// Versioned text form stored in checkpoints; two schemas encode
    /// identically iff their manifests match.
    std::string manifest() const;

    FeatureVector encode(const ast::AstNode& node) const;

private:
    struct KindCode
    {
        std::size_t dim;
        int code;
    };

    FeatureSchema() = default;

    std::string version_;
    bool strict_ = false;
    std::map<std::string, KindCode, std::less<>> kinds_;
    // attribute dimension -> (attribute key, value -> code, code for other values)
    struct AttributeTable
    {
        std::size_t dim;
        std::string key;
        std::map<std::string, int, std::less<>> codes;
        int other;
    };
    std::vector<AttributeTable> attributes_;
    std::map<std::string, int, std::less<>> operator_classes_;
    int operator_other_ = 0;
    std::map<std::string, int, std::less<>> literal_kinds_;
    int literal_other_ = 0;
    std::map<std::string, int, std::less<>> call_members_;
};

/// Throws UnknownKind under a strict schema.
FeatureVector encode_node(const ast::AstNode& node, const FeatureSchema& schema = FeatureSchema::standard());

/// Row i encodes graph node i.
FeatureMatrix encode_graph(const graph::CodeGraph& graph, const ast::AstDocument& doc,
                           const FeatureSchema& schema = FeatureSchema::standard());

} // namespace gscan::features
