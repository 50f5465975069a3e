/**
 * @file labels.hpp
 * @brief Line labels <-> node labels.
 *
 * Lines are numbered from 1. The prefix-count convention in ast.hpp can yield
 * the pseudo-line 0 (a span starting at offset 0 or at a column-zero byte
 * touches the line before it); line 0 reads as clean and ignores writes.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "gscan/ast.hpp"

namespace gscan::labels {

class LineLabels
{
public:
    LineLabels() = default;
    explicit LineLabels(std::size_t line_count)
        : bits_(line_count, 0)
    {}

    /// `lines` holds 1-based vulnerable line numbers.
    static LineLabels from_lines(std::size_t line_count, std::span<const std::size_t> lines);

    std::size_t line_count() const noexcept { return bits_.size(); }
    bool get(std::size_t line) const noexcept { return line >= 1 && line <= bits_.size() && bits_[line - 1] != 0; }
    void set(std::size_t line, bool value) noexcept
    {
        if (line >= 1 && line <= bits_.size())
            bits_[line - 1] = value ? 1 : 0;
    }
    bool any() const noexcept;
    std::vector<std::size_t> marked_lines() const;
    const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

    friend bool operator==(const LineLabels&, const LineLabels&) = default;

private:
    std::vector<std::uint8_t> bits_;
};

/// One 0/1 entry per graph node, index-aligned with CodeGraph order.
using NodeLabels = std::vector<std::uint8_t>;

/**
 * Node i is 1 iff some line in span_to_lines(spans[i]) is labeled; all zeros
 * when no line is labeled. Throws SpanOutOfBounds.
 */
NodeLabels annotate_node_labels(std::span<const ast::SourceSpan> spans, const LineLabels& line_labels,
                                std::string_view source_bytes);

enum class ProjectionMode {
    /// A line is 1 iff any covering node is 1.
    Union,
    /// Walks nodes in index order and overwrites the covered lines with each
    /// node's label, so later clean nodes can clear earlier verdicts.
    Overwrite,
};

/// Throws SpanOutOfBounds, LengthMismatch.
LineLabels project_node_predictions(std::span<const ast::SourceSpan> spans, std::span<const std::uint8_t> node_labels,
                                    std::string_view source_bytes, std::size_t line_count,
                                    ProjectionMode mode = ProjectionMode::Union);

} // namespace gscan::labels
