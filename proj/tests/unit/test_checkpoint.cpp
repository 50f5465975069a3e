#include <random>

#include "gscan/checkpoint.hpp"
#include "gscan/features.hpp"
#include "support.hpp"

namespace gscan::test {
namespace {

checkpoint::Checkpoint sample()
{
    checkpoint::Checkpoint c;
    c.params = gcn::ModelParams<float>::initialize({29, {6, 5}, {4, 2}}, 3);
    c.schema_manifest = features::FeatureSchema::standard().manifest();
    c.metadata = {{"epoch", 7}, {"note", "x"}};
    return c;
}

bool same_params(const gcn::ModelParams<float>& a, const gcn::ModelParams<float>& b)
{
    if (!(a.architecture() == b.architecture()))
        return false;
    const auto ta = a.tensors(), tb = b.tensors();
    for (std::size_t t = 0; t < ta.size(); ++t)
        if (!std::equal(ta[t].begin(), ta[t].end(), tb[t].begin()))
            return false;
    return true;
}

TEST(Checkpoint, RoundTrip)
{
    const auto c = sample();
    const auto bytes = checkpoint::encode(c);
    EXPECT_EQ(bytes.substr(0, 8), "GSCANCKP");
    const auto back = checkpoint::decode(bytes, c.schema_manifest);
    EXPECT_TRUE(same_params(back.params, c.params));
    EXPECT_EQ(back.schema_manifest, c.schema_manifest);
    EXPECT_EQ(back.metadata, c.metadata);
    EXPECT_EQ(checkpoint::encode(back), bytes);
}

TEST(Checkpoint, DigestIsStableAndSensitive)
{
    auto c = sample();
    const auto d = checkpoint::digest(c);
    EXPECT_EQ(d, checkpoint::digest(sample()));
    EXPECT_EQ(d.size(), 64u);
    c.params.dense[0].weight(0, 0) += 1e-6f;
    EXPECT_NE(checkpoint::digest(c), d);
}

TEST(Checkpoint, CorruptionDetected)
{
    const auto bytes = checkpoint::encode(sample());
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        std::string bad = bytes;
        bad[rng() % bad.size()] ^= static_cast<char>(1 + rng() % 255);
        EXPECT_GSCAN_ERROR(checkpoint::decode(bad, ""), ErrorCode::BadCheckpoint);
    }
    EXPECT_GSCAN_ERROR(checkpoint::decode(bytes.substr(0, bytes.size() - 1), ""), ErrorCode::BadCheckpoint);
    EXPECT_GSCAN_ERROR(checkpoint::decode("", ""), ErrorCode::BadCheckpoint);
}

TEST(Checkpoint, SchemaMismatch)
{
    const auto bytes = checkpoint::encode(sample());
    EXPECT_GSCAN_ERROR(checkpoint::decode(bytes, "schema other\n"), ErrorCode::SchemaMismatch);
    EXPECT_NO_THROW(checkpoint::decode(bytes, ""));
}

TEST(Checkpoint, SaveLoad)
{
    const auto path = std::filesystem::temp_directory_path() / ("gscan-ckpt-" + std::to_string(std::random_device{}()));
    const auto c = sample();
    checkpoint::save(path, c);
    const auto back = checkpoint::load(path);
    std::filesystem::remove(path);
    EXPECT_TRUE(same_params(back.params, c.params));
    EXPECT_GSCAN_ERROR(checkpoint::load(path), ErrorCode::Io);
}

} // namespace
} // namespace gscan::test
