/**
 * @file gcn.hpp
 * @brief Graph-convolution node classifier: forward pass, loss, and exact
 *        reverse-mode gradients.
 *
 * Each convolution computes ReLU(Â·H·W + b) where Â = D^-1/2 (A_sym + I) D^-1/2
 * and A_sym = max(A, Aᵀ). The convolution stack is followed by per-node dense
 * layers (ReLU on all but the last) and a Softmax over the two classes.
 *
 * Everything is templated on the scalar: float for training and inference,
 * double for numerical checks.
 */
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "gscan/graph.hpp"

namespace gscan::gcn {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;
template <typename T>
using SparseOperator = Eigen::SparseMatrix<T, Eigen::RowMajor, std::int64_t>;

inline constexpr std::size_t kClassCount = 2;
inline constexpr double kProbabilityFloor = 1e-12;

template <typename T>
struct NormalizedAdjacency
{
    SparseOperator<T> op;

    std::size_t size() const noexcept { return static_cast<std::size_t>(op.rows()); }
};

template <typename T>
NormalizedAdjacency<T> normalize_adjacency(std::size_t node_count, std::span<const graph::Edge> edges);

template <typename T>
NormalizedAdjacency<T> normalize_adjacency(const graph::CodeGraph& graph)
{
    return normalize_adjacency<T>(graph.node_count(), graph.edges());
}

struct Architecture
{
    std::size_t input_dim = 29;
    /// Output width of each convolution, in order.
    std::vector<std::size_t> conv_widths;
    /// Output width of each dense layer; the last one is kClassCount.
    std::vector<std::size_t> dense_widths;

    /// 29 -> 7 x 500 convolutions -> 300 -> 100 -> 2.
    static Architecture standard();

    friend bool operator==(const Architecture&, const Architecture&) = default;
};

template <typename T>
struct Layer
{
    Matrix<T> weight; // d_in x d_out
    RowVector<T> bias; // 1 x d_out
};

template <typename T>
struct ModelParams
{
    std::vector<Layer<T>> conv;
    std::vector<Layer<T>> dense;

    Architecture architecture() const;

    static ModelParams zeros(const Architecture& arch);
    /// Weights Uniform(-sqrt(6/fan_in), sqrt(6/fan_in)) from a seeded mt19937_64;
    /// biases zero.
    static ModelParams initialize(const Architecture& arch, std::uint64_t seed);

    template <typename U>
    ModelParams<U> cast() const
    {
        ModelParams<U> out;
        for (const auto& l : conv)
            out.conv.push_back({l.weight.template cast<U>(), l.bias.template cast<U>()});
        for (const auto& l : dense)
            out.dense.push_back({l.weight.template cast<U>(), l.bias.template cast<U>()});
        return out;
    }

    /// Flat views over every tensor in a fixed order: conv0.weight,
    /// conv0.bias, ..., dense0.weight, dense0.bias, ...
    std::vector<std::span<T>> tensors();
    std::vector<std::span<const T>> tensors() const;
    std::vector<std::string> tensor_names() const;
    std::size_t parameter_count() const;
};

template <typename T>
struct Prediction
{
    Matrix<T> probabilities; // n x 2
    std::vector<std::uint8_t> labels; // argmax, ties go to class 0
};

using ClassWeights = std::array<double, kClassCount>;

/// ReLU(Â·H·W + b). Throws ShapeMismatch.
template <typename T>
Matrix<T> gcn_layer_forward(const Matrix<T>& h, const NormalizedAdjacency<T>& adjacency, const Layer<T>& layer);

/// Throws ShapeMismatch, NonFiniteValue.
template <typename T>
Prediction<T> model_forward(const Matrix<T>& features, const NormalizedAdjacency<T>& adjacency,
                            const ModelParams<T>& params);

/// Weighted mean of -log(max(p_true, 1e-12)); unweighted when no weights
/// are given. Throws LengthMismatch.
template <typename T>
T cross_entropy_loss(const Prediction<T>& prediction, std::span<const std::uint8_t> labels,
                     const std::optional<ClassWeights>& class_weights = std::nullopt);

template <typename T>
struct LossAndGradients
{
    T loss{};
    ModelParams<T> gradients;
    Prediction<T> prediction;
};

/// Forward + backward in one pass. Throws ShapeMismatch, LengthMismatch,
/// NonFiniteValue.
template <typename T>
LossAndGradients<T> compute_gradients(const ModelParams<T>& params, const Matrix<T>& features,
                                      const NormalizedAdjacency<T>& adjacency, std::span<const std::uint8_t> labels,
                                      const std::optional<ClassWeights>& class_weights = std::nullopt);

} // namespace gscan::gcn
