#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include "commands.hpp"

namespace {

using namespace elmboost;
using namespace elmboost::cli;

void add_dataset_flags(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--dataset-dir", cfg.dataset_dir, "Directory holding <dataset>/ IDX files")
        ->capture_default_str();
    cmd->add_option("--dataset", cfg.dataset, "Dataset name")
        ->check(CLI::IsMember({"mnist", "fmnist"}))
        ->capture_default_str();
    cmd->add_option("--train-subset", cfg.train_subset, "Use only the first n training rows (0 = all)");
    cmd->add_option("--test-subset", cfg.test_subset, "Use only the first n test rows (0 = all)");
}

void add_output_flags(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--out", cfg.out, "CSV output path (default: stdout)");
    cmd->add_flag("--quiet", cfg.quiet, "Suppress progress logging");
}

void add_hyper_flags(CLI::App* cmd, RunConfig& cfg) {
    static const std::map<std::string, Activation> activations{{"tanh", Activation::tanh},
                                                               {"sign", Activation::sign}};
    auto& hp = cfg.hyper;
    cmd->add_option("--lambda", hp.lambda, "Ridge regularizer")->check(CLI::NonNegativeNumber)->capture_default_str();
    cmd->add_option("--alpha", hp.alpha, "Discount factor in (0, 1]")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--t-steps", hp.t_steps, "Ridge steps per level (T)")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--levels", hp.levels, "Boosting levels (L)")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--hidden", hp.hidden, "Hidden width J (0 = input width M)")->capture_default_str();
    cmd->add_option("--activation", hp.activation, "tanh or sign")
        ->transform(CLI::CheckedTransformer(activations, CLI::ignore_case))
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    cfg.hyper.hidden = 0;

    CLI::App app{"Multi-level ridge-regression boosting for random-projection classifiers"};
    app.require_subcommand(1);

    auto* train_cmd = app.add_subcommand("train", "Train a model; writes the model file and a residual CSV");
    add_dataset_flags(train_cmd, cfg);
    add_hyper_flags(train_cmd, cfg);
    add_output_flags(train_cmd, cfg);
    train_cmd->add_option("--seed", cfg.hyper.master_seed, "Master seed of the projection streams");
    train_cmd->add_option("--model", cfg.models, "Model file to write")->required()->expected(1);

    auto* curve_cmd = app.add_subcommand("curve", "Test accuracy after each boosting level");
    add_dataset_flags(curve_cmd, cfg);
    add_output_flags(curve_cmd, cfg);
    curve_cmd->add_option("--model", cfg.models, "Model file(s) to evaluate")->required();

    auto* noise_cmd = app.add_subcommand("noise", "Accuracy with test pixels randomly set to zero");
    add_dataset_flags(noise_cmd, cfg);
    add_output_flags(noise_cmd, cfg);
    noise_cmd->add_option("--model", cfg.models, "Model file to evaluate")->required()->expected(1);
    noise_cmd->add_option("--noise-fraction", cfg.noise_fractions, "Fraction(s) of pixels zeroed per image")
        ->delimiter(',')
        ->capture_default_str();
    noise_cmd->add_option("--seed", cfg.hyper.master_seed, "Seed of the pixel dropout");

    auto* hash_cmd = app.add_subcommand("hash-sim", "Sign-hash collision rate against 1 - theta/pi");
    add_output_flags(hash_cmd, cfg);
    hash_cmd->add_option("--dim", cfg.dim, "Vector dimension")->capture_default_str();
    hash_cmd->add_option("--hashes", cfg.hashes, "Random hyperplanes per pair (J)")->capture_default_str();
    hash_cmd->add_option("--angles", cfg.angles, "Evenly spaced angles in [0, pi]")->capture_default_str();
    hash_cmd->add_option("--trials", cfg.trials, "Random pairs averaged per angle")->capture_default_str();
    hash_cmd->add_option("--seed", cfg.hyper.master_seed, "Seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    const std::map<CLI::App*, std::function<void(const RunConfig&, std::ostream&)>> commands{
        {train_cmd, cmd_train}, {curve_cmd, cmd_curve}, {noise_cmd, cmd_noise}, {hash_cmd, cmd_hash_sim}};

    try {
        std::ofstream file;
        if (!cfg.out.empty()) {
            file.open(cfg.out, std::ios::trunc);
            if (!file) throw IoError("cannot write " + cfg.out.string());
        }
        std::ostream& csv = cfg.out.empty() ? std::cout : file;
        for (const auto& [cmd, run] : commands) {
            if (cmd->parsed()) run(cfg, csv);
        }
        csv.flush();
        if (!csv) throw IoError("failed writing CSV output");
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const NotPositiveDefinite& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const Error& e) {
        // I/O, malformed files, and model/dataset mismatches.
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    }
    return kOk;
}
