#include "gscan/checkpoint.hpp"

#include <cmath>

#include "gscan/error.hpp"
#include "gscan/features.hpp"
#include "gscan/io.hpp"

namespace gscan::checkpoint {

namespace {

constexpr std::string_view kModule = "checkpoint";
constexpr std::string_view kMagic = "GSCANCKP";
constexpr std::uint32_t kVersion = 1;

} // namespace

std::string encode(const Checkpoint& checkpoint)
{
    io::ByteWriter w;
    w.raw(kMagic);
    w.u32(kVersion);
    w.str(checkpoint.schema_manifest);
    w.str(checkpoint.metadata.dump());

    const auto names = checkpoint.params.tensor_names();
    const auto arch = checkpoint.params.architecture();
    w.u64(arch.input_dim);
    w.u64(arch.conv_widths.size());
    for (const auto width : arch.conv_widths)
        w.u64(width);
    w.u64(arch.dense_widths.size());
    for (const auto width : arch.dense_widths)
        w.u64(width);

    const auto tensors = checkpoint.params.tensors();
    w.u64(tensors.size());
    std::size_t t = 0;
    const auto write_layer = [&](const gcn::Layer<float>& layer) {
        w.str(names[t++]);
        w.u64(static_cast<std::uint64_t>(layer.weight.rows()));
        w.u64(static_cast<std::uint64_t>(layer.weight.cols()));
        for (Eigen::Index i = 0; i < layer.weight.size(); ++i)
            w.f32(layer.weight.data()[i]);
        w.str(names[t++]);
        w.u64(1);
        w.u64(static_cast<std::uint64_t>(layer.bias.cols()));
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i)
            w.f32(layer.bias.data()[i]);
    };
    for (const auto& layer : checkpoint.params.conv)
        write_layer(layer);
    for (const auto& layer : checkpoint.params.dense)
        write_layer(layer);

    const std::string sum = io::sha256_raw(w.bytes());
    w.raw(sum);
    return w.take();
}

Checkpoint decode(std::string_view bytes, std::string_view expected_manifest)
{
    if (bytes.size() < kMagic.size() + 32 || bytes.substr(0, kMagic.size()) != kMagic)
        throw Error(ErrorCode::BadCheckpoint, kModule, "not a checkpoint file");
    const auto body = bytes.substr(0, bytes.size() - 32);
    if (io::sha256_raw(body) != bytes.substr(bytes.size() - 32))
        throw Error(ErrorCode::BadCheckpoint, kModule, "content digest mismatch");

    io::ByteReader r(body, ErrorCode::BadCheckpoint, kModule);
    r.raw(kMagic.size());
    if (const auto version = r.u32(); version != kVersion)
        r.fail("unsupported checkpoint version " + std::to_string(version));

    Checkpoint cp;
    cp.schema_manifest = r.str();
    if (!expected_manifest.empty() && cp.schema_manifest != expected_manifest)
        throw Error(ErrorCode::SchemaMismatch, kModule,
                    "checkpoint was trained on a different feature schema than this build encodes");
    try {
        cp.metadata = nlohmann::json::parse(r.str());
    }
    catch (const nlohmann::json::exception& e) {
        r.fail(std::string("metadata: ") + e.what());
    }

    gcn::Architecture arch;
    arch.input_dim = static_cast<std::size_t>(r.u64());
    arch.conv_widths.resize(r.count(8));
    for (auto& width : arch.conv_widths)
        width = static_cast<std::size_t>(r.u64());
    arch.dense_widths.resize(r.count(8));
    for (auto& width : arch.dense_widths)
        width = static_cast<std::size_t>(r.u64());
    if (arch.input_dim != features::kFeatureDim)
        throw Error(ErrorCode::SchemaMismatch, kModule,
                    "checkpoint expects " + std::to_string(arch.input_dim) + " input features");
    try {
        cp.params = gcn::ModelParams<float>::zeros(arch);
    }
    catch (const Error& e) {
        r.fail(std::string("architecture: ") + e.what());
    }

    const auto names = cp.params.tensor_names();
    auto tensors = cp.params.tensors();
    if (r.count(1) != tensors.size())
        r.fail("tensor count does not match the architecture");
    for (std::size_t t = 0; t < tensors.size(); ++t) {
        if (r.str() != names[t])
            r.fail("expected tensor " + names[t]);
        const auto rows = r.u64();
        const auto cols = r.u64();
        if (rows * cols != tensors[t].size())
            r.fail("tensor " + names[t] + " has the wrong shape");
        for (auto& v : tensors[t]) {
            v = r.f32();
            if (!std::isfinite(v))
                r.fail("tensor " + names[t] + " holds a non-finite value");
        }
    }
    if (r.remaining() != 0)
        r.fail("trailing bytes");
    return cp;
}

std::string digest(const Checkpoint& checkpoint)
{
    return io::sha256_hex(encode(checkpoint));
}

void save(const std::filesystem::path& path, const Checkpoint& checkpoint)
{
    io::write_file(path, encode(checkpoint));
}

Checkpoint load(const std::filesystem::path& path)
{
    return decode(io::read_file(path), features::FeatureSchema::standard().manifest());
}

} // namespace gscan::checkpoint
