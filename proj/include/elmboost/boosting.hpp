#pragma once

// Multi-level ridge-regression boosting over random-projection features.
//
// Training keeps a running residual G (initially the one-hot targets Y). Each
// level fits T ridge models in sequence; step t of level l fits
//
//     W = ridge(H, G - alpha * A),   H = h(X R(l,t)^T)
//
// where A is the sum of H W over the earlier steps of the same level. When the
// level ends, G <- G - alpha * A. Equivalently the fitting target is a single
// matrix E that starts each level equal to G and loses alpha * H W per step,
// which is how it is held here. Prediction sums alpha * h(X R(l,t)^T) W(l,t)
// over all (l, t) and takes the row-wise argmax.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "elmboost/dataset.hpp"
#include "elmboost/error.hpp"
#include "elmboost/linalg.hpp"
#include "elmboost/matrix.hpp"
#include "elmboost/projection.hpp"

namespace elmboost {

struct HyperParams {
    double lambda = 1.0;
    double alpha = 0.5;
    std::size_t t_steps = 50;
    std::size_t levels = 8;
    std::size_t hidden = 784;  // J
    Activation activation = Activation::tanh;
    std::uint64_t master_seed = 0;

    void validate() const {
        if (!(lambda >= 0.0)) throw ArgumentError("lambda must be >= 0");
        if (!(alpha > 0.0 && alpha <= 1.0)) throw ArgumentError("alpha must be in (0, 1]");
        if (t_steps == 0) throw ArgumentError("t_steps must be >= 1");
        if (levels == 0) throw ArgumentError("levels must be >= 1");
        if (hidden == 0) throw ArgumentError("hidden width must be >= 1");
    }

    friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

/// Trained ensemble. Holds only output weights; projections are regenerated from the seed.
struct BoostedModel {
    HyperParams hyper;
    GeneratorId generator = GeneratorId::splitmix_box_muller;
    std::size_t input_width = 0;  // M
    std::size_t classes = 0;      // K
    std::vector<Matrix> weights;  // levels * t_steps matrices of J×K, level-major

    const Matrix& weight(std::size_t level, std::size_t step) const {
        return weights[level * hyper.t_steps + step];
    }

    ProjectionSpec projection() const {
        return {hyper.master_seed, hyper.hidden, input_width, generator};
    }

    friend bool operator==(const BoostedModel&, const BoostedModel&) = default;
};

struct TrainReport {
    std::size_t levels = 0;
    std::size_t t_steps = 0;
    /// ‖E‖_F after each step, level-major.
    std::vector<double> residual_norms;
    /// Held-out accuracy using levels 0..l, filled when an evaluation set is supplied.
    std::vector<double> level_accuracy;
    /// Final residual G = Y - (training fit).
    Matrix final_residual;

    double residual_norm(std::size_t level, std::size_t step) const {
        return residual_norms[level * t_steps + step];
    }
};

/// Held-out samples scored after every level during training.
struct EvalSet {
    std::reference_wrapper<const Matrix> x;
    std::span<const int> labels;
};

struct TrainOptions {
    std::optional<EvalSet> eval;
    /// Called after every ridge step with (level, step, residual norm).
    std::function<void(std::size_t, std::size_t, double)> on_step;
    /// Called after every level with (level, held-out accuracy or NaN).
    std::function<void(std::size_t, double)> on_level;
};

/// Row-wise argmax; ties go to the lowest index.
inline std::vector<int> classify(const Matrix& scores) {
    if (scores.empty()) throw DimensionError("classify: empty score matrix");
    std::vector<int> out(scores.rows());
    for (std::size_t i = 0; i < scores.rows(); ++i) {
        const auto row = scores.row(i);
        std::size_t best = 0;
        for (std::size_t k = 1; k < row.size(); ++k) {
            if (row[k] > row[best]) best = k;
        }
        out[i] = static_cast<int>(best);
    }
    return out;
}

inline double accuracy(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size()) {
        throw DimensionError("accuracy: " + std::to_string(predicted.size()) + " predictions vs " +
                             std::to_string(truth.size()) + " labels");
    }
    if (truth.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

namespace detail {

/// acc += alpha * delta in place; the first term is assigned so a single term is exact.
inline void accumulate(std::optional<Matrix>& acc, const Matrix& delta, double alpha) {
    if (!acc) {
        Matrix first = delta;
        for (double& v : first.values()) v *= alpha;
        acc = std::move(first);
        return;
    }
    auto a = acc->values();
    const auto d = delta.values();
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += alpha * d[i];
}

}  // namespace detail

/// Fits the levels × t_steps ensemble to targets y (N×K) on samples x (N×M).
inline std::pair<BoostedModel, TrainReport> train(const Matrix& x, const Matrix& y,
                                                  const HyperParams& hyper,
                                                  const TrainOptions& options = {}) {
    hyper.validate();
    if (x.rows() != y.rows()) {
        throw DimensionError("train: samples " + x.shape() + " and targets " + y.shape() +
                             " have different row counts");
    }
    if (x.empty() || y.cols() == 0) throw DimensionError("train: empty training data");
    if (options.eval) {
        if (options.eval->x.get().cols() != x.cols()) {
            throw DimensionError("train: evaluation samples " + options.eval->x.get().shape() +
                                 " differ in width from training samples " + x.shape());
        }
        if (options.eval->labels.size() != options.eval->x.get().rows()) {
            throw DimensionError("train: evaluation labels do not match evaluation samples");
        }
    }

    BoostedModel model;
    model.hyper = hyper;
    model.input_width = x.cols();
    model.classes = y.cols();
    model.weights.reserve(hyper.levels * hyper.t_steps);

    TrainReport report;
    report.levels = hyper.levels;
    report.t_steps = hyper.t_steps;
    report.residual_norms.reserve(hyper.levels * hyper.t_steps);

    const ProjectionSpec spec = model.projection();
    const double alpha = hyper.alpha;
    Matrix target = y;  // E: level residual minus alpha times this level's fit so far
    std::optional<Matrix> eval_scores;

    for (std::size_t level = 0; level < hyper.levels; ++level) {
        for (std::size_t step = 0; step < hyper.t_steps; ++step) {
            const Matrix r = generate_projection(spec, level, step);
            const Matrix h = encode(x, r, hyper.activation);
            Matrix w;
            try {
                w = ridge_solve(h, target, hyper.lambda);
            } catch (const NotPositiveDefinite& e) {
                throw NotPositiveDefinite(e.pivot(), level, step);
            }
            const Matrix fit = matmul(h, w);
            auto t = target.values();
            const auto f = fit.values();
            for (std::size_t i = 0; i < t.size(); ++i) t[i] -= alpha * f[i];

            const double norm = frobenius_norm(target);
            report.residual_norms.push_back(norm);
            if (options.on_step) options.on_step(level, step, norm);

            if (options.eval) {
                detail::accumulate(eval_scores, matmul(encode(options.eval->x.get(), r, hyper.activation), w),
                                   alpha);
            }
            model.weights.push_back(std::move(w));
        }
        double eta = std::numeric_limits<double>::quiet_NaN();
        if (options.eval) {
            eta = accuracy(classify(*eval_scores), options.eval->labels);
            report.level_accuracy.push_back(eta);
        }
        if (options.on_level) options.on_level(level, eta);
    }
    report.final_residual = std::move(target);
    return {std::move(model), std::move(report)};
}

inline std::pair<BoostedModel, TrainReport> train(const Dataset& data, const TargetMatrix& targets,
                                                  const HyperParams& hyper,
                                                  const TrainOptions& options = {}) {
    return train(data.x, targets.y, hyper, options);
}

/// Calls visit(level, scores) after each level, where scores sums levels 0..level.
template <typename Visit>
void for_each_level_scores(const BoostedModel& model, const Matrix& x, std::size_t last_level,
                           Visit&& visit) {
    if (x.cols() != model.input_width) {
        throw DimensionError("predict: samples have width " + std::to_string(x.cols()) +
                             ", model expects " + std::to_string(model.input_width));
    }
    if (last_level >= model.hyper.levels) {
        throw ArgumentError("predict: level " + std::to_string(last_level) +
                            " out of range for a model with " +
                            std::to_string(model.hyper.levels) + " levels");
    }
    const ProjectionSpec spec = model.projection();
    std::optional<Matrix> scores;
    for (std::size_t level = 0; level <= last_level; ++level) {
        for (std::size_t step = 0; step < model.hyper.t_steps; ++step) {
            const Matrix h = encode(x, generate_projection(spec, level, step), model.hyper.activation);
            detail::accumulate(scores, matmul(h, model.weight(level, step)), model.hyper.alpha);
        }
        visit(level, static_cast<const Matrix&>(*scores));
    }
}

/// N'×K scores summed over levels 0..up_to_level (all levels by default).
inline Matrix predict_scores(const BoostedModel& model, const Matrix& x,
                             std::optional<std::size_t> up_to_level = std::nullopt) {
    const std::size_t last = up_to_level.value_or(model.hyper.levels - 1);
    Matrix out;
    for_each_level_scores(model, x, last, [&](std::size_t level, const Matrix& scores) {
        if (level == last) out = scores;
    });
    return out;
}

/// Held-out accuracy after each level, computed in one pass.
inline std::vector<double> level_accuracy_curve(const BoostedModel& model, const Matrix& x,
                                                std::span<const int> labels) {
    if (labels.size() != x.rows()) throw DimensionError("accuracy curve: label count mismatch");
    std::vector<double> curve;
    for_each_level_scores(model, x, model.hyper.levels - 1,
                          [&](std::size_t, const Matrix& scores) {
                              curve.push_back(accuracy(classify(scores), labels));
                          });
    return curve;
}

}  // namespace elmboost
