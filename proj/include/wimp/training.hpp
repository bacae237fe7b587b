#pragma once

// Adam, gradient clipping and the epoch loop with per-epoch learning-rate
// decay and early stopping on the dev set.

#include "wimp/autodiff.hpp"
#include "wimp/corpus.hpp"
#include "wimp/error.hpp"
#include "wimp/evaluation.hpp"
#include "wimp/model.hpp"
#include "wimp/rng.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace wimp {

struct AdamState {
    std::vector<ad::Tensor> m;
    std::vector<ad::Tensor> v;
    std::size_t t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

inline AdamState make_adam_state(std::span<const ad::Var> params) {
    AdamState s;
    for (const auto& p : params) {
        s.m.emplace_back(p.shape(), 0.0);
        s.v.emplace_back(p.shape(), 0.0);
    }
    return s;
}

// One bias-corrected Adam update from the gradients currently stored in
// `params`.
inline void adam_step(std::span<ad::Var> params, AdamState& state, double lr) {
    if (state.m.size() != params.size()) throw ShapeError("adam_step: state tracks a different parameter set");
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (state.m[k].shape() != params[k].shape()) {
            throw ShapeError("adam_step: state for " + params[k].name() + " has shape " +
                             ad::shape_string(state.m[k].shape()));
        }
        if (!params[k].grad().all_finite()) {
            throw NumericError("adam_step: non-finite gradient in parameter '" + params[k].name() + "'");
        }
    }
    ++state.t;
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& theta = params[k].mutable_value();
        const auto& g = params[k].grad();
        auto& m = state.m[k];
        auto& v = state.v[k];
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            theta[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + state.eps);
        }
    }
}

// Rescale all gradients so their joint L2 norm is at most `max_norm`.
// Returns the norm before clipping.
inline double clip_global_norm(std::span<ad::Var> params, double max_norm) {
    double sq = 0.0;
    for (const auto& p : params)
        for (double g : p.grad().data()) sq += g * g;
    const double norm = std::sqrt(sq);
    if (std::isfinite(norm) && norm > max_norm && max_norm > 0.0) {
        const double f = max_norm / norm;
        for (auto& p : params)
            for (auto& g : p.grad().data()) g *= f;
    }
    return norm;
}

struct TrainConfig {
    double lr0 = 0.001;
    double lr_decay = 0.9;  // per epoch: lr = lr0 * lr_decay^(epoch - 1)
    std::size_t batch_size = 20;
    double dropout_p = 0.5;
    std::size_t max_epochs = 100;
    std::size_t patience = 10;
    std::uint64_t seed = 0;
    double clip_norm = 5.0;  // 0 disables clipping

    void validate() const {
        if (!(lr0 > 0.0)) throw ConfigError("lr0 must be positive");
        if (!(lr_decay > 0.0)) throw ConfigError("lr_decay must be positive");
        if (batch_size == 0) throw ConfigError("batch_size must be positive");
        if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw ConfigError("dropout_p must be in [0, 1)");
        if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
        if (!(clip_norm >= 0.0)) throw ConfigError("clip_norm must be non-negative");
    }

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double lr = 0.0;
    double train_loss = 0.0;  // mean sentence loss over the epoch
    double dev_metric = 0.0;  // macro-F1 (crf) or RMS (sig)

    friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

inline void write_history_header(std::ostream& out) { out << "epoch,lr,train_loss,dev_metric\n"; }

inline void write_history_record(std::ostream& out, const EpochRecord& r) {
    out << r.epoch << ',' << detail::format_number(r.lr) << ',' << detail::format_number(r.train_loss) << ','
        << detail::format_number(r.dev_metric) << '\n';
}

struct TrainResult {
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;
    double best_dev_metric = 0.0;
};

// Model-selection metric: macro-F1 for crf (higher wins), RMS for sig (lower wins).
inline double dev_metric(const Model& model, const std::vector<AnnotatedUtterance>& dev) {
    const auto r = evaluate(model, dev);
    return model.head() == HeadKind::crf ? r.macro_f1 : r.rms;
}

inline bool dev_is_better(HeadKind head, double candidate, double best) {
    return head == HeadKind::crf ? candidate > best : candidate < best;
}

using EpochCallback = std::function<void(const EpochRecord&)>;

// Trains `model` in place and leaves it holding the best-dev parameters.
// Each epoch shuffles the training set, walks it in batches, averages the
// sentence losses of a batch, clips and takes one Adam step. Training stops
// once the dev metric has failed to improve on `patience` consecutive epochs
// (patience 0 behaves like 1: the first non-improving epoch ends the run), or
// at `max_epochs`.
inline TrainResult train(Model& model, const DatasetSplit& split, const TrainConfig& config,
                         const EpochCallback& on_epoch = {}) {
    config.validate();
    if (split.train.empty() || split.dev.empty()) throw DomainError("train: empty train or dev set");

    Rng rng(config.seed);
    auto params = model.parameters();
    auto adam = make_adam_state(params);
    TrainResult result;
    std::vector<ad::Tensor> best = model.snapshot();
    std::size_t stale = 0;

    std::vector<std::size_t> order(split.train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const double lr = config.lr0 * std::pow(config.lr_decay, static_cast<double>(epoch - 1));
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            std::vector<ad::Var> losses;
            for (std::size_t k = start; k < end; ++k) {
                losses.push_back(model.sentence_loss(split.train[order[k]], true, config.dropout_p, rng));
                loss_sum += losses.back().item();
            }
            auto batch = ad::scale(ad::sum(ad::stack_rows(losses)), 1.0 / static_cast<double>(losses.size()));
            for (auto& p : params) p.zero_grad();
            ad::backward(batch);
            if (config.clip_norm > 0.0) clip_global_norm(params, config.clip_norm);
            adam_step(params, adam, lr);
        }

        EpochRecord rec{epoch, lr, loss_sum / static_cast<double>(order.size()), dev_metric(model, split.dev)};
        result.history.push_back(rec);
        if (on_epoch) on_epoch(rec);

        if (result.best_epoch == 0 || dev_is_better(model.head(), rec.dev_metric, result.best_dev_metric)) {
            result.best_epoch = epoch;
            result.best_dev_metric = rec.dev_metric;
            best = model.snapshot();
            stale = 0;
        } else if (++stale >= config.patience) {
            break;
        }
    }
    model.restore(best);
    return result;
}

} // namespace wimp
