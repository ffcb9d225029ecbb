#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "elmboost/model_store.hpp"
#include "oracles.hpp"

using namespace elmboost;

namespace {

BoostedModel trained_model(std::uint64_t seed = 5, Activation act = Activation::tanh) {
    std::mt19937_64 rng(seed);
    const Matrix x = oracle::random_matrix(40, 6, rng, 0.4);
    std::vector<int> labels(40);
    for (int& l : labels) l = static_cast<int>(rng() % 3);
    HyperParams hp;
    hp.lambda = 0.5;
    hp.alpha = 0.5;
    hp.t_steps = 2;
    hp.levels = 3;
    hp.hidden = 7;
    hp.activation = act;
    hp.master_seed = seed;
    return train(x, one_hot_encode(labels, 3).y, hp).first;
}

ModelFileError::Kind load_error(const std::vector<std::uint8_t>& bytes) {
    try {
        deserialize_model(bytes);
    } catch (const ModelFileError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error";
    return ModelFileError::Kind::bad_field;
}

}  // namespace

TEST(ModelStore, HeaderLayout) {
    const auto bytes = serialize_model(trained_model());
    EXPECT_EQ(kModelHeaderBytes, 4u + 4 + 4 + 8 + 8 + 8 + 5 * 4 + 1);
    EXPECT_EQ(bytes.size(), 57u + 8u * 3 * 2 * 7 * 3 + 8u);
    EXPECT_EQ(bytes.size(), model_file_size(3, 2, 7, 3));
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "ELMB");
    EXPECT_EQ(bytes[4], 1);  // version, little-endian
    EXPECT_EQ(bytes[8], 1);  // generator id
    EXPECT_EQ(bytes[12], 5);  // seed low byte
    EXPECT_EQ(bytes[36], 3);  // levels
    EXPECT_EQ(bytes[40], 2);  // t_steps
    EXPECT_EQ(bytes[44], 7);  // hidden
    EXPECT_EQ(bytes[48], 6);  // input width
    EXPECT_EQ(bytes[52], 3);  // classes
    EXPECT_EQ(bytes[56], 0);  // tanh
}

TEST(ModelStore, Crc64MatchesXzCheckValue) {
    const std::string check = "123456789";
    EXPECT_EQ(crc64({reinterpret_cast<const std::uint8_t*>(check.data()), check.size()}),
              0x995DC9BBDF1939FAULL);
}

TEST(ModelStore, RoundTripIsExactAndCanonical) {
    for (Activation act : {Activation::tanh, Activation::sign}) {
        const BoostedModel model = trained_model(11, act);
        const auto bytes = serialize_model(model);
        const BoostedModel back = deserialize_model(bytes);
        EXPECT_EQ(back, model);
        EXPECT_EQ(serialize_model(back), bytes);
    }
}

TEST(ModelStore, FileRoundTripPredictsIdentically) {
    const auto path = std::filesystem::temp_directory_path() / "elmboost_model_test.elmb";
    const BoostedModel model = trained_model();
    save_model(model, path);
    const BoostedModel back = load_model(path);
    std::mt19937_64 rng(3);
    const Matrix x = oracle::random_matrix(15, 6, rng, 0.4);
    EXPECT_EQ(predict_scores(back, x), predict_scores(model, x));
    std::filesystem::remove(path);
    EXPECT_THROW(load_model(path), IoError);
}

TEST(ModelStore, DistinctErrors) {
    const auto good = serialize_model(trained_model());

    auto bad_magic = good;
    bad_magic[0] = 'X';
    EXPECT_EQ(load_error(bad_magic), ModelFileError::Kind::bad_magic);

    auto bad_version = good;
    bad_version[4] = 2;
    EXPECT_EQ(load_error(bad_version), ModelFileError::Kind::unsupported_version);

    auto flipped = good;
    flipped[kModelHeaderBytes + 10] ^= 0x01;
    EXPECT_EQ(load_error(flipped), ModelFileError::Kind::checksum_mismatch);

    auto truncated = good;
    truncated.resize(good.size() - 1);
    EXPECT_EQ(load_error(truncated), ModelFileError::Kind::truncated);
    truncated.resize(30);
    EXPECT_EQ(load_error(truncated), ModelFileError::Kind::truncated);

    auto longer = good;
    longer.push_back(0);
    EXPECT_EQ(load_error(longer), ModelFileError::Kind::size_mismatch);
}

TEST(ModelStore, EveryPayloadByteIsCovered) {
    const auto good = serialize_model(trained_model());
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        auto bytes = good;
        const std::size_t at = 57 + rng() % (bytes.size() - 57 - 8);
        bytes[at] ^= static_cast<std::uint8_t>(1 + rng() % 255);
        ASSERT_EQ(load_error(bytes), ModelFileError::Kind::checksum_mismatch);
    }
}
