#include "gscan/labels.hpp"

#include "gscan/error.hpp"

namespace gscan::labels {

namespace {

constexpr std::string_view kModule = "label_mapper";

} // namespace

LineLabels LineLabels::from_lines(std::size_t line_count, std::span<const std::size_t> lines)
{
    LineLabels labels(line_count);
    for (const std::size_t line : lines) {
        if (line == 0 || line > line_count)
            throw Error(ErrorCode::SpanOutOfBounds, kModule,
                        "line " + std::to_string(line) + " outside 1.." + std::to_string(line_count));
        labels.set(line, true);
    }
    return labels;
}

bool LineLabels::any() const noexcept
{
    for (const auto b : bits_)
        if (b != 0)
            return true;
    return false;
}

std::vector<std::size_t> LineLabels::marked_lines() const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i] != 0)
            out.push_back(i + 1);
    return out;
}

NodeLabels annotate_node_labels(std::span<const ast::SourceSpan> spans, const LineLabels& line_labels,
                                std::string_view source_bytes)
{
    if (!line_labels.any())
        return NodeLabels(spans.size(), 0);

    const ast::LineIndex index = ast::build_line_index(source_bytes);
    NodeLabels out;
    out.reserve(spans.size());
    for (const auto& span : spans) {
        const ast::LineRange range = ast::span_to_lines(span, index);
        std::uint8_t label = 0;
        for (std::size_t line = range.first; line <= range.last && label == 0; ++line)
            label = line_labels.get(line) ? 1 : 0;
        out.push_back(label);
    }
    return out;
}

LineLabels project_node_predictions(std::span<const ast::SourceSpan> spans, std::span<const std::uint8_t> node_labels,
                                    std::string_view source_bytes, std::size_t line_count, ProjectionMode mode)
{
    if (spans.size() != node_labels.size())
        throw Error(ErrorCode::LengthMismatch, kModule,
                    std::to_string(spans.size()) + " spans but " + std::to_string(node_labels.size()) + " labels");

    LineLabels out(line_count);
    bool any = false;
    for (const auto l : node_labels)
        any = any || l != 0;
    if (!any)
        return out;

    const ast::LineIndex index = ast::build_line_index(source_bytes);
    for (std::size_t i = 0; i < spans.size(); ++i) {
        const bool vulnerable = node_labels[i] != 0;
        if (mode == ProjectionMode::Union && !vulnerable)
            continue;
        const ast::LineRange range = ast::span_to_lines(spans[i], index);
        for (std::size_t line = range.first; line <= range.last; ++line)
            out.set(line, vulnerable);
    }
    return out;
}

} // namespace gscan::labels
