#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lobtrend/features.hpp"
#include "lobtrend/metrics.hpp"
#include "lobtrend/models.hpp"

namespace lobtrend::training {

struct TrainSpec {
    double lr = 1.0e-3;
    int batch_size = 64;
    int max_epochs = 50;
    int patience = 10; // epochs without val macro-F1 improvement
    uint64_t seed = 0;
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_f1 = 0.0;
    double seconds = 0.0;
};

struct RunRecord {
    std::vector<EpochStats> epochs;
    int best_epoch = -1; // 1-based; -1 when no epoch ran
    double best_val_f1 = 0.0;
    int64_t parameter_count = 0;

    int epochs_to_best() const { return best_epoch; }
};

struct Evaluation {
    double loss = 0.0;
    std::vector<int> predictions;
    std::vector<double> probabilities; // [n,3] row-major
    double macro_f1 = 0.0;
};

// Copies windows [first, first+count) into a [count, T, F] input tensor.
template <class S>
ad::Tensor<S> gather_windows(const WindowSet& ws, const std::vector<int64_t>& order,
                             int64_t first, int64_t count) {
    const int64_t row = ws.window * ws.features;
    std::vector<S> data(static_cast<size_t>(count * row));
    for (int64_t b = 0; b < count; ++b) {
        const double* src = ws.window_at(order[static_cast<size_t>(first + b)]);
        S* dst = data.data() + b * row;
        for (int64_t i = 0; i < row; ++i) dst[i] = static_cast<S>(src[i]);
    }
    return ad::Tensor<S>::from({count, ws.window, ws.features}, std::move(data));
}

// Forward pass over a whole window set without gradients: mean cross-entropy,
// argmax predictions, softmax probabilities, macro-F1.
template <class S>
Evaluation evaluate(const nn::Model<S>& model, const WindowSet& data, int batch_size) {
    ad::NoGradGuard ng;
    Evaluation ev;
    ev.predictions.reserve(static_cast<size_t>(data.count));
    ev.probabilities.reserve(static_cast<size_t>(data.count * 3));
    std::vector<int64_t> order(static_cast<size_t>(data.count));
    for (int64_t i = 0; i < data.count; ++i) order[static_cast<size_t>(i)] = i;

    double loss_sum = 0.0;
    for (int64_t first = 0; first < data.count; first += batch_size) {
        const int64_t count = std::min<int64_t>(batch_size, data.count - first);
        auto x = gather_windows<S>(data, order, first, count);
        auto logits = model.forward(x);
        std::vector<int> targets(data.labels.begin() + first,
                                 data.labels.begin() + first + count);
        loss_sum += static_cast<double>(ad::cross_entropy(logits, targets).item()) *
                    static_cast<double>(count);
        for (int64_t b = 0; b < count; ++b) {
            const S* row = logits.data() + b * 3;
            double mx = static_cast<double>(row[0]);
            int arg = 0;
            for (int c = 1; c < 3; ++c)
                if (static_cast<double>(row[c]) > mx) {
                    mx = static_cast<double>(row[c]);
                    arg = c;
                }
            ev.predictions.push_back(arg);
            double den = 0.0;
            double e[3];
            for (int c = 0; c < 3; ++c) {
                e[c] = std::exp(static_cast<double>(row[c]) - mx);
                den += e[c];
            }
            for (int c = 0; c < 3; ++c) ev.probabilities.push_back(e[c] / den);
        }
    }
    ev.loss = loss_sum / static_cast<double>(data.count);
    ev.macro_f1 = metrics::f1_macro(data.labels, ev.predictions);
    return ev;
}

// Minimizes cross-entropy with Adam over shuffled mini-batches, tracks val
// macro-F1 each epoch, stops on patience, and leaves the model holding the
// best-validation parameters. Throws TrainingDivergence if the loss becomes
// non-finite.
template <class S>
RunRecord train(nn::Model<S>& model, const WindowSet& train_data, const WindowSet& val_data,
                const TrainSpec& spec) {
    if (spec.lr < 0.0) throw ConfigError("train: lr must be >= 0");
    if (spec.patience < 1) throw ConfigError("train: patience must be >= 1");
    if (spec.batch_size < 1) throw ConfigError("train: batch size must be >= 1");
    if (train_data.count == 0 || val_data.count == 0)
        throw DataError("train: empty split");

    auto params = model.parameters();
    ad::AdamState<S> adam;
    Rng shuffle_rng(spec.seed);
    Rng dropout_rng(spec.seed ^ 0x9e3779b97f4a7c15ull);

    RunRecord record;
    record.parameter_count = model.parameter_count();
    auto best_values = model.snapshot_parameter_values();
    int epochs_since_best = 0;

    std::vector<int64_t> order(static_cast<size_t>(train_data.count));
    for (int64_t i = 0; i < train_data.count; ++i) order[static_cast<size_t>(i)] = i;

    for (int epoch = 1; epoch <= spec.max_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        for (int64_t first = 0; first < train_data.count; first += spec.batch_size) {
            const int64_t count = std::min<int64_t>(spec.batch_size, train_data.count - first);
            auto x = gather_windows<S>(train_data, order, first, count);
            std::vector<int> targets(static_cast<size_t>(count));
            for (int64_t b = 0; b < count; ++b)
                targets[static_cast<size_t>(b)] =
                    train_data.labels[static_cast<size_t>(order[static_cast<size_t>(first + b)])];

            model.zero_grad();
            auto logits = model.forward(x, &dropout_rng);
            auto loss = ad::cross_entropy(logits, targets);
            const double loss_value = static_cast<double>(loss.item());
            if (!std::isfinite(loss_value))
                throw TrainingDivergence("training loss became non-finite at epoch " +
                                         std::to_string(epoch));
            loss_sum += loss_value * static_cast<double>(count);
            ad::backward(loss);
            ad::adam_step(params, adam, spec.lr);
        }

        auto val = evaluate(model, val_data, spec.batch_size);
        const auto t1 = std::chrono::steady_clock::now();

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = loss_sum / static_cast<double>(train_data.count);
        stats.val_loss = val.loss;
        stats.val_f1 = val.macro_f1;
        stats.seconds = std::chrono::duration<double>(t1 - t0).count();
        record.epochs.push_back(stats);

        if (record.best_epoch < 0 || val.macro_f1 > record.best_val_f1) {
            record.best_epoch = epoch;
            record.best_val_f1 = val.macro_f1;
            best_values = model.snapshot_parameter_values();
            epochs_since_best = 0;
        } else if (++epochs_since_best >= spec.patience) {
            break;
        }
    }

    // Hand back the best-validation checkpoint, not the last state.
    model.load_parameter_values(best_values);
    return record;
}

// ---------------------------------------------------------------------------
// Hyperparameter sweep.
// ---------------------------------------------------------------------------

struct SweepCell {
    int64_t sequence_size = 128;
    double lr = 1.0e-3;
    int layers = 4;
    std::string optimizer = "adam";
};

struct SweepEntry {
    SweepCell cell;
    bool supported = true; // lion cells are enumerated but not trained
    RunRecord record;
};

struct SweepOutcome {
    std::vector<SweepEntry> entries; // supported entries ranked by val F1
    bool complete = true;            // false when the budget cut the grid short
};

// The searched grid: sequence size x learning rate x layer count x optimizer.
inline std::vector<SweepCell> default_sweep_grid() {
    std::vector<SweepCell> grid;
    for (int64_t seq : {64, 128, 256, 384, 512})
        for (double lr : {1.0e-3, 3.0e-4, 1.0e-4})
            for (int layers : {2, 3, 4, 6})
                for (const char* opt : {"adam", "lion"})
                    grid.push_back({seq, lr, layers, opt});
    return grid;
}

// Trains every supported cell on identical data and seed. `window_builder`
// materializes (train, val) windows for a given sequence size. `budget`
// limits the number of trained cells; 0 means unlimited.
template <class S>
SweepOutcome hyperparameter_sweep(
    const nn::ModelConfig& base, const TrainSpec& train_spec,
    const std::function<std::pair<WindowSet, WindowSet>(int64_t)>& window_builder,
    const std::vector<SweepCell>& grid, int64_t budget = 0) {
    SweepOutcome out;
    int64_t trained = 0;
    for (const auto& cell : grid) {
        SweepEntry entry;
        entry.cell = cell;
        if (cell.optimizer != "adam") {
            // Adam won the search for both models; other optimizers stay
            // enumerated but unsupported.
            entry.supported = false;
            out.entries.push_back(std::move(entry));
            continue;
        }
        if (budget > 0 && trained >= budget) {
            out.complete = false;
            break;
        }
        auto [train_ws, val_ws] = window_builder(cell.sequence_size);
        nn::ModelConfig cfg = base;
        cfg.window = cell.sequence_size;
        cfg.num_blocks = cell.layers;
        auto model = nn::Model<S>::build(cfg);
        TrainSpec spec = train_spec;
        spec.lr = cell.lr;
        entry.record = train(model, train_ws, val_ws, spec);
        out.entries.push_back(std::move(entry));
        ++trained;
    }
    std::stable_sort(out.entries.begin(), out.entries.end(),
                     [](const SweepEntry& a, const SweepEntry& b) {
                         if (a.supported != b.supported) return a.supported;
                         return a.record.best_val_f1 > b.record.best_val_f1;
                     });
    return out;
}

} // namespace lobtrend::training
