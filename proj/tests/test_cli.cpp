#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "../tools/commands.hpp"
#include "synthetic.hpp"

using namespace elmboost;
using namespace elmboost::cli;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("elmboost_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        synthetic::write_idx_dataset(dir_ / "mnist", synthetic::images(400, 8, 10, 1),
                                     synthetic::images(150, 8, 10, 2));
        cfg_.dataset_dir = dir_;
        cfg_.hyper.hidden = 0;
        cfg_.hyper.t_steps = 2;
        cfg_.hyper.levels = 2;
        cfg_.hyper.master_seed = 3;
        cfg_.quiet = true;
        cfg_.models = {dir_ / "model.elmb"};
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string run(void (*cmd)(const RunConfig&, std::ostream&), const RunConfig& cfg) {
        std::ostringstream out;
        cmd(cfg, out);
        return out.str();
    }

    std::vector<std::string> lines(const std::string& text) {
        std::vector<std::string> out;
        std::istringstream in(text);
        for (std::string line; std::getline(in, line);) out.push_back(line);
        return out;
    }

    int exec(const std::string& args) {
        const std::string cmd = std::string(ELMBOOST_CLI_PATH) + " " + args + " >/dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    fs::path dir_;
    RunConfig cfg_;
};

}  // namespace

TEST_F(CliTest, TrainWritesModelAndResidualCsv) {
    cfg_.train_subset = 100;
    const auto csv = lines(run(cmd_train, cfg_));
    ASSERT_EQ(csv.size(), 5u);
    EXPECT_EQ(csv[0], "level,step,residual_norm");
    EXPECT_EQ(csv[1].rfind("0,0,", 0), 0u);
    EXPECT_EQ(csv[4].rfind("1,1,", 0), 0u);
    const BoostedModel model = load_model(cfg_.models.front());
    EXPECT_EQ(model.hyper.hidden, 64u);  // J defaults to M
    EXPECT_EQ(model.input_width, 64u);
    EXPECT_EQ(model.weights.size(), 4u);
}

TEST_F(CliTest, OutputsAreByteIdenticalAcrossRuns) {
    const std::string first = run(cmd_train, cfg_);
    const auto model_bytes = read_file_bytes(cfg_.models.front());
    EXPECT_EQ(run(cmd_train, cfg_), first);
    EXPECT_EQ(read_file_bytes(cfg_.models.front()), model_bytes);

    EXPECT_EQ(run(cmd_curve, cfg_), run(cmd_curve, cfg_));
    EXPECT_EQ(run(cmd_noise, cfg_), run(cmd_noise, cfg_));
    RunConfig hash = cfg_;
    hash.hashes = 500;
    EXPECT_EQ(run(cmd_hash_sim, hash), run(cmd_hash_sim, hash));
}

TEST_F(CliTest, CurveMatchesSavedModelAndNoiseZeroMatchesFinalLevel) {
    run(cmd_train, cfg_);
    const auto curve = lines(run(cmd_curve, cfg_));
    ASSERT_EQ(curve.size(), 3u);
    EXPECT_EQ(curve[0], "level,activation,eta");

    const BoostedModel model = load_model(cfg_.models.front());
    const Dataset test = normalize(load_split(cfg_, false));
    const auto expected = level_accuracy_curve(model, test.x, test.labels);
    EXPECT_EQ(curve[1], "0,tanh," + format_double(expected[0]));
    EXPECT_EQ(curve[2], "1,tanh," + format_double(expected[1]));
    EXPECT_GT(expected[1], 0.8);

    RunConfig noise = cfg_;
    noise.noise_fractions = {0.0, 0.1};
    const auto rows = lines(run(cmd_noise, noise));
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0], "noise_fraction,eta");
    EXPECT_EQ(rows[1], "0," + format_double(expected[1]));
}

TEST_F(CliTest, CurveAcceptsSeveralModels) {
    run(cmd_train, cfg_);
    RunConfig sign = cfg_;
    sign.hyper.activation = Activation::sign;
    sign.models = {dir_ / "sign.elmb"};
    run(cmd_train, sign);
    RunConfig both = cfg_;
    both.models = {dir_ / "model.elmb", dir_ / "sign.elmb"};
    const auto rows = lines(run(cmd_curve, both));
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows[3].rfind("0,sign,", 0), 0u);
}

TEST_F(CliTest, ModelDatasetMismatchIsRejected) {
    run(cmd_train, cfg_);
    synthetic::write_idx_dataset(dir_ / "fmnist", synthetic::images(50, 6, 10, 4), synthetic::images(50, 6, 10, 5));
    RunConfig other = cfg_;
    other.dataset = "fmnist";
    EXPECT_THROW(run(cmd_curve, other), DimensionError);
}

TEST_F(CliTest, HashSimEndpointsAndBounds) {
    RunConfig hash = cfg_;
    hash.angles = 5;
    const auto rows = lines(run(cmd_hash_sim, hash));
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_EQ(rows[0], "theta,analytic,empirical,deviation,bound");
    EXPECT_EQ(rows[1], "0,1,1,0,0");
    EXPECT_EQ(rows[5].rfind("3.1415926535897931,0,0,0,0", 0), 0u);
    // theta = pi/2 row
    std::istringstream mid(rows[3]);
    std::vector<double> v;
    for (std::string cell; std::getline(mid, cell, ',');) v.push_back(std::stod(cell));
    EXPECT_NEAR(v[1], 0.5, 1e-12);
    EXPECT_LE(std::abs(v[2] - 0.5), 0.015);
}

TEST_F(CliTest, HashSimValidatesFlags) {
    RunConfig bad = cfg_;
    bad.dim = 1;
    EXPECT_THROW(run(cmd_hash_sim, bad), ArgumentError);
    bad = cfg_;
    bad.hashes = 99;
    EXPECT_THROW(run(cmd_hash_sim, bad), ArgumentError);
}

TEST_F(CliTest, NoiseRejectsFractionOutsideUnitInterval) {
    run(cmd_train, cfg_);
    RunConfig bad = cfg_;
    bad.noise_fractions = {1.5};
    EXPECT_THROW(run(cmd_noise, bad), ArgumentError);
}

TEST_F(CliTest, ExitCodes) {
    const std::string data = "--dataset-dir " + dir_.string() + " --quiet";
    const std::string model = " --model " + (dir_ / "m.elmb").string();
    EXPECT_EQ(exec("train " + data + model + " --t-steps 1 --levels 1 --out " + (dir_ / "r.csv").string()), kOk);
    EXPECT_EQ(exec("hash-sim --hashes 200 --quiet"), kOk);
    EXPECT_EQ(exec("train " + data), kUsage);                        // missing --model
    EXPECT_EQ(exec("train " + data + model + " --alpha 2"), kUsage);  // out of range
    EXPECT_EQ(exec("curve " + data + model + " --activation relu"), kUsage);
    EXPECT_EQ(exec("noise " + data + model + " --noise-fraction 1.5"), kUsage);
    EXPECT_EQ(exec("bogus"), kUsage);

    fs::remove(dir_ / "mnist" / "train-labels-idx1-ubyte");
    EXPECT_EQ(exec("train " + data + model), kIo);
    EXPECT_EQ(exec("curve " + data + " --model " + (dir_ / "missing.elmb").string()), kIo);
}

TEST_F(CliTest, MissingLabelFileNamesThePath) {
    fs::remove(dir_ / "mnist" / "train-labels-idx1-ubyte");
    try {
        run(cmd_train, cfg_);
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("train-labels-idx1-ubyte"), std::string::npos);
    }
}

TEST_F(CliTest, GzipDatasetFilesAreFound) {
    const auto plain = dir_ / "mnist" / "t10k-labels-idx1-ubyte";
    const auto bytes = read_file_bytes(plain);
    gzFile gz = gzopen((plain.string() + ".gz").c_str(), "wb");
    gzwrite(gz, bytes.data(), static_cast<unsigned>(bytes.size()));
    gzclose(gz);
    fs::remove(plain);
    EXPECT_EQ(load_split(cfg_, false).size(), 150u);
}
