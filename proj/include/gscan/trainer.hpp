/**
 * @file trainer.hpp
 * @brief Mini-batch training: disjoint-union batches, Adam, per-epoch metric
 *        log, best-validation checkpoint selection.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gscan/dataset.hpp"
#include "gscan/evaluator.hpp"
#include "gscan/gcn.hpp"
#include "json.hpp"

namespace gscan::trainer {

struct Hyperparameters
{
    std::size_t epochs = 1600;
    /// Graphs per batch.
    std::size_t batch_size = 100;
    double learning_rate = 1e-4;
    std::uint64_t seed = 0;
    std::optional<gcn::ClassWeights> class_weights;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    /// 1600 epochs, batch 100, lr 1e-4.
    static Hyperparameters paper();
    /// paper() with 200 epochs.
    static Hyperparameters quick();

    nlohmann::json to_json() const;
};

/// Disjoint union of member graphs.
struct BatchGraph
{
    std::vector<std::string> ids;
    /// offsets[g] is the first node of graph g; offsets.back() is the node count.
    std::vector<std::size_t> offsets;
    gcn::Matrix<float> features;
    std::vector<graph::Edge> edges;
    gcn::NormalizedAdjacency<float> adjacency;
    labels::NodeLabels labels;

    std::size_t node_count() const noexcept { return offsets.empty() ? 0 : offsets.back(); }
    std::size_t graph_count() const noexcept { return ids.size(); }
};

BatchGraph make_batch(std::span<const dataset::DatasetRecord* const> members);

/// Shuffles by `seed` and groups into batches of at most batch_size graphs.
/// Throws EmptyDataset.
std::vector<BatchGraph> make_batches(std::vector<const dataset::DatasetRecord*> records, std::size_t batch_size,
                                     std::uint64_t seed);

template <typename T>
struct AdamState
{
    gcn::ModelParams<T> m;
    gcn::ModelParams<T> v;
    std::uint64_t step = 0;

    static AdamState zeros_like(const gcn::ModelParams<T>& params)
    {
        const auto arch = params.architecture();
        return {gcn::ModelParams<T>::zeros(arch), gcn::ModelParams<T>::zeros(arch), 0};
    }
};

/// Bias-corrected Adam update. Throws ShapeMismatch.
template <typename T>
void adam_step(gcn::ModelParams<T>& params, const gcn::ModelParams<T>& grads, AdamState<T>& state,
               double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);

struct EpochRecord
{
    std::size_t epoch = 0;
    std::string split;
    double loss = 0;
    evaluator::Metrics metrics;

    /// One line of the metric log.
    nlohmann::ordered_json to_json() const;
};

struct TrainResult
{
    gcn::ModelParams<float> final_params;
    /// Parameters after the epoch with the best validation node F1 (earliest
    /// on ties); the final parameters when there is no validation set.
    gcn::ModelParams<float> best_params;
    std::size_t best_epoch = 0;
    double best_validation_f1 = 0;
    std::vector<EpochRecord> log;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Throws EmptyDataset, DivergedLoss, and numeric errors from the model.
TrainResult train(const std::vector<const dataset::DatasetRecord*>& train_set,
                  const std::vector<const dataset::DatasetRecord*>& validation_set, const Hyperparameters& hyper,
                  gcn::ModelParams<float> initial, const EpochCallback& on_epoch = {});

/// Per-node argmax labels for each record, computed in batches.
std::vector<labels::NodeLabels> predict(const gcn::ModelParams<float>& params,
                                        const std::vector<const dataset::DatasetRecord*>& records,
                                        std::size_t batch_size = 100);

gcn::Matrix<float> feature_matrix(const features::FeatureMatrix& features);

} // namespace gscan::trainer
