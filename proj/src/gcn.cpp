#include "gscan/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gscan/error.hpp"
#include "gscan/random.hpp"

namespace gscan::gcn {

namespace {

constexpr std::string_view kModule = "gcn_core";

[[noreturn]] void shape_error(const std::string& what)
{
    throw Error(ErrorCode::ShapeMismatch, kModule, what);
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m)
{
    return m.allFinite();
}

template <typename T>
void check_architecture(const ModelParams<T>& params, std::size_t input_dim)
{
    if (params.conv.empty() || params.dense.empty())
        shape_error("model needs at least one convolution and one dense layer");
    std::size_t width = input_dim;
    const auto check = [&](const Layer<T>& layer, const char* what, std::size_t index) {
        if (static_cast<std::size_t>(layer.weight.rows()) != width || layer.bias.cols() != layer.weight.cols())
            shape_error(std::string(what) + std::to_string(index) + " expects input width "
                        + std::to_string(layer.weight.rows()) + ", got " + std::to_string(width));
        width = static_cast<std::size_t>(layer.weight.cols());
    };
    for (std::size_t i = 0; i < params.conv.size(); ++i)
        check(params.conv[i], "conv", i);
    for (std::size_t i = 0; i < params.dense.size(); ++i)
        check(params.dense[i], "dense", i);
    if (width != kClassCount)
        shape_error("final layer must produce " + std::to_string(kClassCount) + " classes");
}

template <typename T>
void check_inputs(const Matrix<T>& features, const NormalizedAdjacency<T>& adjacency, const ModelParams<T>& params)
{
    if (params.conv.empty())
        shape_error("model has no convolution layers");
    if (static_cast<std::size_t>(features.rows()) != adjacency.size())
        shape_error(std::to_string(features.rows()) + " feature rows for a " + std::to_string(adjacency.size())
                    + "-node operator");
    check_architecture(params, static_cast<std::size_t>(features.cols()));
}

template <typename T>
void relu_inplace(Matrix<T>& m)
{
    m = m.cwiseMax(T(0));
}

template <typename T>
Prediction<T> softmax_rows(const Matrix<T>& logits)
{
    Prediction<T> out;
    out.probabilities.resize(logits.rows(), logits.cols());
    out.labels.resize(static_cast<std::size_t>(logits.rows()));
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const T shift = logits.row(i).maxCoeff();
        T sum = T(0);
        for (Eigen::Index k = 0; k < logits.cols(); ++k) {
            const T e = std::exp(logits(i, k) - shift);
            out.probabilities(i, k) = e;
            sum += e;
        }
        out.probabilities.row(i) /= sum;
        out.labels[static_cast<std::size_t>(i)] = out.probabilities(i, 1) > out.probabilities(i, 0) ? 1 : 0;
    }
    return out;
}

template <typename T>
void check_labels(std::size_t rows, std::span<const std::uint8_t> labels)
{
    if (labels.size() != rows)
        throw Error(ErrorCode::LengthMismatch, kModule,
                    std::to_string(rows) + " predictions but " + std::to_string(labels.size()) + " labels");
    for (const auto l : labels)
        if (l > 1)
            throw Error(ErrorCode::LengthMismatch, kModule, "label values must be 0 or 1");
}

template <typename T>
std::vector<T> per_node_weights(std::span<const std::uint8_t> labels, const std::optional<ClassWeights>& weights,
                                T& total)
{
    std::vector<T> w(labels.size(), T(1));
    if (weights)
        for (std::size_t i = 0; i < labels.size(); ++i)
            w[i] = static_cast<T>((*weights)[labels[i]]);
    total = T(0);
    for (const T x : w)
        total += x;
    return w;
}

} // namespace

// ---------------------------------------------------------------------------

template <typename T>
NormalizedAdjacency<T> normalize_adjacency(std::size_t node_count, std::span<const graph::Edge> edges)
{
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    pairs.reserve(edges.size() * 2 + node_count);
    for (const auto& e : edges) {
        if (e.src >= node_count || e.dst >= node_count)
            shape_error("edge endpoint outside " + std::to_string(node_count) + " nodes");
        pairs.emplace_back(e.src, e.dst);
        pairs.emplace_back(e.dst, e.src);
    }
    for (std::size_t i = 0; i < node_count; ++i)
        pairs.emplace_back(i, i);
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    std::vector<double> degree(node_count, 0.0);
    for (const auto& [u, v] : pairs)
        degree[static_cast<std::size_t>(u)] += 1.0;

    std::vector<Eigen::Triplet<T, std::int64_t>> triplets;
    triplets.reserve(pairs.size());
    for (const auto& [u, v] : pairs) {
        const double value =
            1.0 / std::sqrt(degree[static_cast<std::size_t>(u)] * degree[static_cast<std::size_t>(v)]);
        triplets.emplace_back(u, v, static_cast<T>(value));
    }
    NormalizedAdjacency<T> out;
    out.op.resize(static_cast<std::int64_t>(node_count), static_cast<std::int64_t>(node_count));
    out.op.setFromTriplets(triplets.begin(), triplets.end());
    out.op.makeCompressed();
    return out;
}

Architecture Architecture::standard()
{
    Architecture arch;
    arch.input_dim = 29;
    arch.conv_widths.assign(7, 500);
    arch.dense_widths = {300, 100, kClassCount};
    return arch;
}

template <typename T>
Architecture ModelParams<T>::architecture() const
{
    Architecture arch;
    arch.input_dim = conv.empty() ? 0 : static_cast<std::size_t>(conv.front().weight.rows());
    for (const auto& l : conv)
        arch.conv_widths.push_back(static_cast<std::size_t>(l.weight.cols()));
    for (const auto& l : dense)
        arch.dense_widths.push_back(static_cast<std::size_t>(l.weight.cols()));
    return arch;
}

template <typename T>
ModelParams<T> ModelParams<T>::zeros(const Architecture& arch)
{
    if (arch.dense_widths.empty() || arch.dense_widths.back() != kClassCount)
        shape_error("the last dense layer must produce " + std::to_string(kClassCount) + " classes");
    ModelParams<T> p;
    std::size_t width = arch.input_dim;
    for (const std::size_t w : arch.conv_widths) {
        p.conv.push_back({Matrix<T>::Zero(width, w), RowVector<T>::Zero(w)});
        width = w;
    }
    for (const std::size_t w : arch.dense_widths) {
        p.dense.push_back({Matrix<T>::Zero(width, w), RowVector<T>::Zero(w)});
        width = w;
    }
    return p;
}

template <typename T>
ModelParams<T> ModelParams<T>::initialize(const Architecture& arch, std::uint64_t seed)
{
    ModelParams<T> p = zeros(arch);
    std::mt19937_64 rng(seed);
    const auto uniform = [&rng]() { return uniform_unit(rng); };
    // Variance 2/fan_in keeps the ReLU stack from shrinking node-dependent
    // signal layer by layer; biases start at zero.
    const auto fill = [&](Layer<T>& layer) {
        const double bound = std::sqrt(6.0 / static_cast<double>(layer.weight.rows()));
        for (Eigen::Index i = 0; i < layer.weight.size(); ++i)
            layer.weight.data()[i] = static_cast<T>((2.0 * uniform() - 1.0) * bound);
    };
    for (auto& l : p.conv)
        fill(l);
    for (auto& l : p.dense)
        fill(l);
    return p;
}

template <typename T>
std::vector<std::span<T>> ModelParams<T>::tensors()
{
    std::vector<std::span<T>> out;
    const auto push = [&out](Layer<T>& l) {
        out.emplace_back(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
        out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
    };
    for (auto& l : conv)
        push(l);
    for (auto& l : dense)
        push(l);
    return out;
}

template <typename T>
std::vector<std::span<const T>> ModelParams<T>::tensors() const
{
    std::vector<std::span<const T>> out;
    const auto push = [&out](const Layer<T>& l) {
        out.emplace_back(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
        out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
    };
    for (const auto& l : conv)
        push(l);
    for (const auto& l : dense)
        push(l);
    return out;
}

template <typename T>
std::vector<std::string> ModelParams<T>::tensor_names() const
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < conv.size(); ++i) {
        out.push_back("conv" + std::to_string(i) + ".weight");
        out.push_back("conv" + std::to_string(i) + ".bias");
    }
    for (std::size_t i = 0; i < dense.size(); ++i) {
        out.push_back("dense" + std::to_string(i) + ".weight");
        out.push_back("dense" + std::to_string(i) + ".bias");
    }
    return out;
}

template <typename T>
std::size_t ModelParams<T>::parameter_count() const
{
    std::size_t n = 0;
    for (const auto& t : tensors())
        n += t.size();
    return n;
}

namespace {

/// Â·m into a fresh matrix; without noalias Eigen routes sparse products
/// through a temporary and runs several times slower.
template <typename T>
Matrix<T> aggregate(const SparseOperator<T>& op, const Matrix<T>& m)
{
    Matrix<T> out(op.rows(), m.cols());
    out.noalias() = op * m;
    return out;
}

template <typename T>
Matrix<T> multiply(const Matrix<T>& a, const Matrix<T>& b)
{
    Matrix<T> out(a.rows(), b.cols());
    out.noalias() = a * b;
    return out;
}

} // namespace

template <typename T>
Matrix<T> gcn_layer_forward(const Matrix<T>& h, const NormalizedAdjacency<T>& adjacency, const Layer<T>& layer)
{
    if (static_cast<std::size_t>(h.rows()) != adjacency.size())
        shape_error(std::to_string(h.rows()) + " rows for a " + std::to_string(adjacency.size()) + "-node operator");
    if (h.cols() != layer.weight.rows() || layer.bias.cols() != layer.weight.cols())
        shape_error("layer expects width " + std::to_string(layer.weight.rows()) + ", got "
                    + std::to_string(h.cols()));
    Matrix<T> out = multiply(aggregate(adjacency.op, h), layer.weight);
    out.rowwise() += layer.bias;
    relu_inplace(out);
    return out;
}

template <typename T>
Prediction<T> model_forward(const Matrix<T>& features, const NormalizedAdjacency<T>& adjacency,
                            const ModelParams<T>& params)
{
    check_inputs(features, adjacency, params);
    Matrix<T> h = features;
    for (const auto& layer : params.conv)
        h = gcn_layer_forward(h, adjacency, layer);
    for (std::size_t i = 0; i < params.dense.size(); ++i) {
        Matrix<T> z = multiply(h, params.dense[i].weight);
        z.rowwise() += params.dense[i].bias;
        if (i + 1 < params.dense.size())
            relu_inplace(z);
        h = std::move(z);
    }
    if (!all_finite(h))
        throw Error(ErrorCode::NonFiniteValue, kModule, "non-finite logits");
    return softmax_rows(h);
}

template <typename T>
T cross_entropy_loss(const Prediction<T>& prediction, std::span<const std::uint8_t> labels,
                     const std::optional<ClassWeights>& class_weights)
{
    const auto rows = static_cast<std::size_t>(prediction.probabilities.rows());
    check_labels<T>(rows, labels);
    if (rows == 0)
        return T(0);
    T total = T(0);
    const auto w = per_node_weights<T>(labels, class_weights, total);
    T loss = T(0);
    for (std::size_t i = 0; i < rows; ++i) {
        const T p = prediction.probabilities(static_cast<Eigen::Index>(i), labels[i]);
        loss -= w[i] * std::log(std::max(p, static_cast<T>(kProbabilityFloor)));
    }
    return total > T(0) ? loss / total : T(0);
}

template <typename T>
LossAndGradients<T> compute_gradients(const ModelParams<T>& params, const Matrix<T>& features,
                                      const NormalizedAdjacency<T>& adjacency, std::span<const std::uint8_t> labels,
                                      const std::optional<ClassWeights>& class_weights)
{
    check_inputs(features, adjacency, params);
    const auto n = static_cast<std::size_t>(features.rows());
    check_labels<T>(n, labels);

    // Forward, keeping Â·H for every convolution and every activation.
    std::vector<Matrix<T>> aggregated(params.conv.size());
    std::vector<Matrix<T>> conv_out(params.conv.size());
    const Matrix<T>* h = &features;
    for (std::size_t l = 0; l < params.conv.size(); ++l) {
        aggregated[l] = aggregate(adjacency.op, *h);
        conv_out[l] = multiply(aggregated[l], params.conv[l].weight);
        conv_out[l].rowwise() += params.conv[l].bias;
        relu_inplace(conv_out[l]);
        h = &conv_out[l];
    }
    std::vector<Matrix<T>> dense_out(params.dense.size());
    for (std::size_t l = 0; l < params.dense.size(); ++l) {
        dense_out[l] = multiply(*h, params.dense[l].weight);
        dense_out[l].rowwise() += params.dense[l].bias;
        if (l + 1 < params.dense.size())
            relu_inplace(dense_out[l]);
        h = &dense_out[l];
    }
    if (!all_finite(*h))
        throw Error(ErrorCode::NonFiniteValue, kModule, "non-finite logits");

    LossAndGradients<T> result;
    result.prediction = softmax_rows(*h);
    result.loss = cross_entropy_loss(result.prediction, labels, class_weights);
    result.gradients = ModelParams<T>::zeros(params.architecture());
    if (n == 0)
        return result;

    // d loss / d logits = w_i / W * (p - onehot); zero where p_true is floored.
    T total = T(0);
    const auto w = per_node_weights<T>(labels, class_weights, total);
    Matrix<T> delta = result.prediction.probabilities;
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        if (delta(r, labels[i]) < static_cast<T>(kProbabilityFloor) || total <= T(0)) {
            delta.row(r).setZero();
            continue;
        }
        delta(r, labels[i]) -= T(1);
        delta.row(r) *= w[i] / total;
    }

    for (std::size_t l = params.dense.size(); l-- > 0;) {
        const Matrix<T>& input = l == 0 ? conv_out.back() : dense_out[l - 1];
        auto& grad = result.gradients.dense[l];
        grad.weight.noalias() = input.transpose() * delta;
        grad.bias = delta.colwise().sum();
        Matrix<T> upstream(delta.rows(), params.dense[l].weight.rows());
        upstream.noalias() = delta * params.dense[l].weight.transpose();
        if (l > 0)
            upstream = upstream.cwiseProduct((dense_out[l - 1].array() > T(0)).template cast<T>().matrix());
        delta = std::move(upstream);
    }

    for (std::size_t l = params.conv.size(); l-- > 0;) {
        delta = delta.cwiseProduct((conv_out[l].array() > T(0)).template cast<T>().matrix());
        auto& grad = result.gradients.conv[l];
        grad.weight.noalias() = aggregated[l].transpose() * delta;
        grad.bias = delta.colwise().sum();
        if (l > 0) {
            // Â is symmetric, so Âᵀ·δ·Wᵀ = Â·(δ·Wᵀ).
            Matrix<T> projected(delta.rows(), params.conv[l].weight.rows());
            projected.noalias() = delta * params.conv[l].weight.transpose();
            delta = aggregate(adjacency.op, projected);
        }
    }

    for (const auto& t : result.gradients.tensors())
        for (const T x : t)
            if (!std::isfinite(static_cast<double>(x)))
                throw Error(ErrorCode::NonFiniteValue, kModule, "non-finite gradient");
    return result;
}

// ---------------------------------------------------------------------------

#define GSCAN_INSTANTIATE(T)                                                                                           \
    template struct ModelParams<T>;                                                                                    \
    template NormalizedAdjacency<T> normalize_adjacency<T>(std::size_t, std::span<const graph::Edge>);                 \
    template Matrix<T> gcn_layer_forward<T>(const Matrix<T>&, const NormalizedAdjacency<T>&, const Layer<T>&);         \
    template Prediction<T> model_forward<T>(const Matrix<T>&, const NormalizedAdjacency<T>&, const ModelParams<T>&);   \
    template T cross_entropy_loss<T>(const Prediction<T>&, std::span<const std::uint8_t>,                              \
                                     const std::optional<ClassWeights>&);                                              \
    template LossAndGradients<T> compute_gradients<T>(const ModelParams<T>&, const Matrix<T>&,                         \
                                                      const NormalizedAdjacency<T>&, std::span<const std::uint8_t>,    \
                                                      const std::optional<ClassWeights>&);

GSCAN_INSTANTIATE(float)
GSCAN_INSTANTIATE(double)

#undef GSCAN_INSTANTIATE

} // namespace gscan::gcn
