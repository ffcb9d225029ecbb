#pragma once

// Subcommand implementations for the elmboost CLI. Each writes CSV to an
// ostream so the commands can be driven from tests without a process boundary.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "elmboost/elmboost.hpp"

namespace elmboost::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kIo = 2, kNumerical = 3 };

struct RunConfig {
    std::filesystem::path dataset_dir = "data";
    std::string dataset = "mnist";
    HyperParams hyper;            // hidden == 0 means "use the input width"
    std::size_t train_subset = 0;  // 0 = all rows
    std::size_t test_subset = 0;
    std::vector<double> noise_fractions{0.0, 0.1};
    std::filesystem::path out;                 // empty = stdout
    std::vector<std::filesystem::path> models;
    std::size_t dim = 50;
    std::size_t hashes = 10000;
    std::size_t angles = 13;
    std::size_t trials = 1;
    bool quiet = false;
};

inline std::string format_double(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

/// Looks for `name` (optionally .gz) under dir/<dataset>/ and then dir/.
inline std::filesystem::path find_dataset_file(const RunConfig& cfg, const std::string& name) {
    for (const auto& base : {cfg.dataset_dir / cfg.dataset, cfg.dataset_dir}) {
        for (const auto& candidate : {base / name, base / (name + ".gz")}) {
            if (std::filesystem::is_regular_file(candidate)) return candidate;
        }
    }
    throw IoError("dataset file not found: " + (cfg.dataset_dir / cfg.dataset / name).string() +
                  " (also tried .gz and " + (cfg.dataset_dir / name).string() + ")");
}

inline RawDataset load_split(const RunConfig& cfg, bool train_split) {
    const std::string prefix = train_split ? "train" : "t10k";
    const auto images = load_idx_images(find_dataset_file(cfg, prefix + "-images-idx3-ubyte"));
    const auto labels = load_idx_labels(find_dataset_file(cfg, prefix + "-labels-idx1-ubyte"));
    RawDataset raw = pair_dataset(images, labels, 10);
    const std::size_t subset = train_split ? cfg.train_subset : cfg.test_subset;
    return subset > 0 ? head(raw, subset) : raw;
}

inline std::ostream& log(const RunConfig& cfg) {
    static std::ostringstream sink;
    if (cfg.quiet) {
        sink.str("");
        return sink;
    }
    return std::clog;
}

inline void check_compatible(const BoostedModel& model, const Dataset& data) {
    if (model.input_width != data.x.cols() || model.classes != data.classes) {
        throw DimensionError("model expects M=" + std::to_string(model.input_width) +
                             ", K=" + std::to_string(model.classes) + " but dataset has M=" +
                             std::to_string(data.x.cols()) + ", K=" +
                             std::to_string(data.classes));
    }
}

/// Trains on the training split, saves the model, writes `level,step,residual_norm`.
inline void cmd_train(const RunConfig& cfg, std::ostream& csv) {
    if (cfg.models.size() != 1) throw ArgumentError("train needs exactly one --model output path");
    const Dataset data = normalize(load_split(cfg, true));
    HyperParams hp = cfg.hyper;
    if (hp.hidden == 0) hp.hidden = data.x.cols();
    log(cfg) << "training on " << data.x.rows() << " samples, M=" << data.x.cols() << " J=" << hp.hidden
             << " T=" << hp.t_steps << " L=" << hp.levels << " lambda=" << hp.lambda
             << " alpha=" << hp.alpha << " activation=" << to_string(hp.activation)
             << " seed=" << hp.master_seed << "\n";
    if (data.degenerate_rows > 0) {
        log(cfg) << "warning: " << data.degenerate_rows << " constant images normalized to zero\n";
    }
    TrainOptions options;
    options.on_level = [&](std::size_t level, double) {
        log(cfg) << "level " << level << " done\n";
    };
    const auto [model, report] = train(data, one_hot_encode(data.labels, data.classes), hp, options);
    save_model(model, cfg.models.front());

    csv << "level,step,residual_norm\n";
    for (std::size_t l = 0; l < report.levels; ++l)
        for (std::size_t t = 0; t < report.t_steps; ++t)
            csv << l << ',' << t << ',' << format_double(report.residual_norm(l, t)) << '\n';
}

/// Per-level test accuracy of each model: `level,activation,eta`.
inline void cmd_curve(const RunConfig& cfg, std::ostream& csv) {
    if (cfg.models.empty()) throw ArgumentError("curve needs at least one --model");
    const Dataset test = normalize(load_split(cfg, false));
    csv << "level,activation,eta\n";
    for (const auto& path : cfg.models) {
        const BoostedModel model = load_model(path);
        check_compatible(model, test);
        const auto curve = level_accuracy_curve(model, test.x, test.labels);
        for (std::size_t l = 0; l < curve.size(); ++l) {
            csv << l << ',' << to_string(model.hyper.activation) << ',' << format_double(curve[l]) << '\n';
            log(cfg) << path.filename().string() << " level " << l << " eta " << curve[l] << "\n";
        }
    }
}

/// Accuracy of a cleanly trained model on test images with pixels zeroed: `noise_fraction,eta`.
inline void cmd_noise(const RunConfig& cfg, std::ostream& csv) {
    if (cfg.models.size() != 1) throw ArgumentError("noise needs exactly one --model");
    for (double f : cfg.noise_fractions) {
        if (!(f >= 0.0 && f <= 1.0)) throw ArgumentError("noise fraction " + format_double(f) + " outside [0, 1]");
    }
    const BoostedModel model = load_model(cfg.models.front());
    const RawDataset clean = load_split(cfg, false);
    csv << "noise_fraction,eta\n";
    for (double f : cfg.noise_fractions) {
        const Dataset test = normalize(zero_pixel_noise(clean, f, cfg.hyper.master_seed));
        check_compatible(model, test);
        const double eta = accuracy(classify(predict_scores(model, test.x)), test.labels);
        csv << format_double(f) << ',' << format_double(eta) << '\n';
        log(cfg) << "noise " << f << " eta " << eta << "\n";
    }
}

/// Analytic vs empirical sign-hash collision rates at evenly spaced angles in [0, π]:
/// `theta,analytic,empirical,deviation,bound`, bound being three binomial standard deviations.
inline void cmd_hash_sim(const RunConfig& cfg, std::ostream& csv) {
    if (cfg.dim < 2) throw ArgumentError("hash-sim needs --dim >= 2");
    if (cfg.hashes < 100) throw ArgumentError("hash-sim needs --hashes >= 100");
    if (cfg.angles < 2) throw ArgumentError("hash-sim needs --angles >= 2");
    if (cfg.trials < 1) throw ArgumentError("hash-sim needs --trials >= 1");

    SplitMix64 rng(cfg.hyper.master_seed);
    csv << "theta,analytic,empirical,deviation,bound\n";
    for (std::size_t a = 0; a < cfg.angles; ++a) {
        const double theta = std::numbers::pi * static_cast<double>(a) / static_cast<double>(cfg.angles - 1);
        double analytic = 0.0, empirical = 0.0;
        for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
            // Random unit x and a unit u orthogonal to it; y = cos θ x + sin θ u.
            const Matrix basis = generate_projection({rng.next(), 2, cfg.dim}, 0, 0);
            std::vector<double> x(basis.row(0).begin(), basis.row(0).end());
            std::vector<double> u(basis.row(1).begin(), basis.row(1).end());
            double xx = 0, xu = 0;
            for (std::size_t i = 0; i < cfg.dim; ++i) xx += x[i] * x[i];
            for (double& v : x) v /= std::sqrt(xx);
            for (std::size_t i = 0; i < cfg.dim; ++i) xu += x[i] * u[i];
            double uu = 0;
            for (std::size_t i = 0; i < cfg.dim; ++i) {
                u[i] -= xu * x[i];
                uu += u[i] * u[i];
            }
            for (double& v : u) v /= std::sqrt(uu);

            std::vector<double> y(cfg.dim);
            for (std::size_t i = 0; i < cfg.dim; ++i) {
                if (a == 0) y[i] = x[i];
                else if (a + 1 == cfg.angles) y[i] = -x[i];
                else y[i] = std::cos(theta) * x[i] + std::sin(theta) * u[i];
            }
            analytic += collision_probability(x, y);
            empirical += estimate_collision_rate(x, y, cfg.hashes, rng.next());
        }
        analytic /= static_cast<double>(cfg.trials);
        empirical /= static_cast<double>(cfg.trials);
        const double bound =
            3.0 * std::sqrt(analytic * (1.0 - analytic) / static_cast<double>(cfg.hashes * cfg.trials));
        csv << format_double(theta) << ',' << format_double(analytic) << ',' << format_double(empirical)
            << ',' << format_double(empirical - analytic) << ',' << format_double(bound) << '\n';
    }
}

}  // namespace elmboost::cli
