#include "gscan/trainer.hpp"

#include <cmath>
#include <random>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "gscan/error.hpp"
#include "gscan/random.hpp"

namespace gscan::trainer {

namespace {

constexpr std::string_view kModule = "trainer";

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Activations are tens of MB and reallocated every step; keep them on the
/// heap instead of a fresh mmap (and page faults) per allocation.
void keep_large_allocations()
{
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch)
{
    return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(epoch)));
}

struct Pass
{
    double loss_sum = 0; // node-weighted
    std::size_t nodes = 0;
    evaluator::Confusion confusion;

    void add(double batch_loss, const labels::NodeLabels& predicted, const labels::NodeLabels& truth)
    {
        loss_sum += batch_loss * static_cast<double>(truth.size());
        nodes += truth.size();
        confusion += evaluator::confusion(predicted, truth);
    }

    EpochRecord record(std::size_t epoch, std::string split) const
    {
        EpochRecord r;
        r.epoch = epoch;
        r.split = std::move(split);
        r.loss = nodes == 0 ? 0.0 : loss_sum / static_cast<double>(nodes);
        r.metrics = evaluator::metrics(confusion);
        return r;
    }
};

} // namespace

Hyperparameters Hyperparameters::paper()
{
    return {};
}

Hyperparameters Hyperparameters::quick()
{
    Hyperparameters h;
    h.epochs = 200;
    return h;
}

nlohmann::json Hyperparameters::to_json() const
{
    nlohmann::json out = {{"epochs", epochs},       {"batch_size", batch_size}, {"learning_rate", learning_rate},
                          {"seed", seed},           {"beta1", beta1},           {"beta2", beta2},
                          {"epsilon", epsilon}};
    if (class_weights)
        out["class_weights"] = {(*class_weights)[0], (*class_weights)[1]};
    else
        out["class_weights"] = nullptr;
    return out;
}

gcn::Matrix<float> feature_matrix(const features::FeatureMatrix& features)
{
    return Eigen::Map<const gcn::Matrix<float>>(features.values().data(), static_cast<Eigen::Index>(features.rows()),
                                                static_cast<Eigen::Index>(features::kFeatureDim));
}

BatchGraph make_batch(std::span<const dataset::DatasetRecord* const> members)
{
    BatchGraph batch;
    batch.offsets.push_back(0);
    std::size_t total = 0;
    for (const auto* r : members)
        total += r->graph.node_count();
    batch.features.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(features::kFeatureDim));
    batch.labels.reserve(total);
    for (const auto* r : members) {
        const std::size_t base = batch.offsets.back();
        const std::size_t n = r->graph.node_count();
        if (r->features.rows() != n || r->labels.size() != n)
            throw Error(ErrorCode::LengthMismatch, kModule, "record " + r->id + " is not node-aligned");
        batch.ids.push_back(r->id);
        batch.features.middleRows(static_cast<Eigen::Index>(base), static_cast<Eigen::Index>(n)) =
            feature_matrix(r->features);
        for (const auto& e : r->graph.edges())
            batch.edges.push_back({static_cast<std::uint32_t>(e.src + base), static_cast<std::uint32_t>(e.dst + base)});
        batch.labels.insert(batch.labels.end(), r->labels.begin(), r->labels.end());
        batch.offsets.push_back(base + n);
    }
    batch.adjacency = gcn::normalize_adjacency<float>(total, batch.edges);
    return batch;
}

std::vector<BatchGraph> make_batches(std::vector<const dataset::DatasetRecord*> records, std::size_t batch_size,
                                     std::uint64_t seed)
{
    if (records.empty())
        throw Error(ErrorCode::EmptyDataset, kModule, "no graphs to batch");
    if (batch_size == 0)
        throw Error(ErrorCode::ShapeMismatch, kModule, "batch size must be positive");
    std::mt19937_64 rng(seed);
    shuffle(records, rng);
    std::vector<BatchGraph> out;
    for (std::size_t i = 0; i < records.size(); i += batch_size) {
        const std::size_t n = std::min(batch_size, records.size() - i);
        out.push_back(make_batch(std::span(records).subspan(i, n)));
    }
    return out;
}

template <typename T>
void adam_step(gcn::ModelParams<T>& params, const gcn::ModelParams<T>& grads, AdamState<T>& state,
               double learning_rate, double beta1, double beta2, double epsilon)
{
    if (!(grads.architecture() == params.architecture()) || !(state.m.architecture() == params.architecture())
        || !(state.v.architecture() == params.architecture()))
        throw Error(ErrorCode::ShapeMismatch, kModule, "optimizer state does not match the parameters");
    ++state.step;
    const double correction1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double correction2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    const T b1 = static_cast<T>(beta1);
    const T b2 = static_cast<T>(beta2);
    const T step_size = static_cast<T>(learning_rate / correction1);
    const T c2 = static_cast<T>(correction2);
    const T eps = static_cast<T>(epsilon);

    auto p = params.tensors();
    const auto g = grads.tensors();
    auto m = state.m.tensors();
    auto v = state.v.tensors();
    for (std::size_t t = 0; t < p.size(); ++t) {
        for (std::size_t i = 0; i < p[t].size(); ++i) {
            const T gi = g[t][i];
            m[t][i] = b1 * m[t][i] + (T(1) - b1) * gi;
            v[t][i] = b2 * v[t][i] + (T(1) - b2) * gi * gi;
            p[t][i] -= step_size * m[t][i] / (std::sqrt(v[t][i] / c2) + eps);
        }
    }
}

template void adam_step<float>(gcn::ModelParams<float>&, const gcn::ModelParams<float>&, AdamState<float>&, double,
                               double, double, double);
template void adam_step<double>(gcn::ModelParams<double>&, const gcn::ModelParams<double>&, AdamState<double>&,
                                double, double, double, double);

nlohmann::ordered_json EpochRecord::to_json() const
{
    return {{"epoch", epoch},
            {"split", split},
            {"loss", loss},
            {"accuracy", metrics.accuracy},
            {"precision", metrics.precision},
            {"recall", metrics.recall},
            {"f1", metrics.f1}};
}

TrainResult train(const std::vector<const dataset::DatasetRecord*>& train_set,
                  const std::vector<const dataset::DatasetRecord*>& validation_set, const Hyperparameters& hyper,
                  gcn::ModelParams<float> initial, const EpochCallback& on_epoch)
{
    if (train_set.empty())
        throw Error(ErrorCode::EmptyDataset, kModule, "training split is empty");
    if (hyper.epochs == 0 || hyper.batch_size == 0 || !(hyper.learning_rate > 0))
        throw Error(ErrorCode::ShapeMismatch, kModule, "epochs, batch size and learning rate must be positive");
    keep_large_allocations();

    std::vector<BatchGraph> validation_batches;
    for (std::size_t i = 0; i < validation_set.size(); i += hyper.batch_size) {
        const std::size_t n = std::min(hyper.batch_size, validation_set.size() - i);
        validation_batches.push_back(make_batch(std::span(validation_set).subspan(i, n)));
    }

    TrainResult result;
    result.final_params = std::move(initial);
    AdamState<float> adam = AdamState<float>::zeros_like(result.final_params);
    bool have_best = false;

    const auto log = [&](EpochRecord r) {
        if (on_epoch)
            on_epoch(r);
        result.log.push_back(std::move(r));
    };

    for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
        Pass train_pass;
        for (const auto& batch : make_batches(train_set, hyper.batch_size, epoch_seed(hyper.seed, epoch))) {
            auto step = gcn::compute_gradients(result.final_params, batch.features, batch.adjacency, batch.labels,
                                               hyper.class_weights);
            if (!std::isfinite(step.loss))
                throw Error(ErrorCode::DivergedLoss, kModule, "loss became non-finite in epoch " + std::to_string(epoch));
            train_pass.add(step.loss, step.prediction.labels, batch.labels);
            adam_step(result.final_params, step.gradients, adam, hyper.learning_rate, hyper.beta1, hyper.beta2,
                      hyper.epsilon);
        }
        log(train_pass.record(epoch, "train"));

        if (validation_batches.empty())
            continue;
        Pass val_pass;
        for (const auto& batch : validation_batches) {
            const auto prediction = gcn::model_forward(batch.features, batch.adjacency, result.final_params);
            const float loss = gcn::cross_entropy_loss(prediction, batch.labels, hyper.class_weights);
            if (!std::isfinite(loss))
                throw Error(ErrorCode::DivergedLoss, kModule, "validation loss became non-finite");
            val_pass.add(loss, prediction.labels, batch.labels);
        }
        EpochRecord val = val_pass.record(epoch, "validation");
        if (!have_best || val.metrics.f1 > result.best_validation_f1) {
            have_best = true;
            result.best_validation_f1 = val.metrics.f1;
            result.best_epoch = epoch;
            result.best_params = result.final_params;
        }
        log(std::move(val));
    }
    if (!have_best) {
        result.best_params = result.final_params;
        result.best_epoch = hyper.epochs;
    }
    return result;
}

std::vector<labels::NodeLabels> predict(const gcn::ModelParams<float>& params,
                                        const std::vector<const dataset::DatasetRecord*>& records,
                                        std::size_t batch_size)
{
    std::vector<labels::NodeLabels> out;
    out.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); i += batch_size) {
        const std::size_t n = std::min(batch_size, records.size() - i);
        const BatchGraph batch = make_batch(std::span(records).subspan(i, n));
        const auto prediction = gcn::model_forward(batch.features, batch.adjacency, params);
        for (std::size_t g = 0; g < batch.graph_count(); ++g)
            out.emplace_back(prediction.labels.begin() + static_cast<std::ptrdiff_t>(batch.offsets[g]),
                             prediction.labels.begin() + static_cast<std::ptrdiff_t>(batch.offsets[g + 1]));
    }
    return out;
}

} // namespace gscan::trainer
