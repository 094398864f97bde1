#ifndef THERMOFUSE_NN_TRAIN_HPP
#define THERMOFUSE_NN_TRAIN_HPP

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermofuse/data/augment.hpp"
#include "thermofuse/data/class_weights.hpp"
#include "thermofuse/data/loader.hpp"
#include "thermofuse/data/split.hpp"
#include "thermofuse/nn/checkpoint.hpp"
#include "thermofuse/nn/loss.hpp"
#include "thermofuse/nn/model.hpp"
#include "thermofuse/nn/optimizer.hpp"

namespace thermofuse::nn {

struct NonFiniteLoss : std::runtime_error {
    explicit NonFiniteLoss(int epoch, double value)
        : std::runtime_error("NonFiniteLoss: loss became " + std::to_string(value) + " in epoch " +
                             std::to_string(epoch)) {}
};

struct TrainConfig {
    int epochs = 50;
    int batch_size = 32;
    double learning_rate = 1e-4;
    std::string optimizer_id = "adam";
    int early_stop_patience = 10;
    std::uint64_t seed = 0;
    bool freeze_backbone = false;  // §"feature extraction" reading; default fine-tunes everything
    bool augment = true;
    data::AugmentationConfig aug;
};

struct EpochStats {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;
};

struct TrainedRun {
    std::vector<EpochStats> history;
    int best_epoch = -1;
    double best_val_loss = std::numeric_limits<double>::infinity();
    bool early_stopped = false;
};

namespace detail {

template <typename T>
struct Snapshot {
    std::vector<Tensor<T>> params;
    std::vector<Tensor<T>> buffers;
};

template <typename T>
Snapshot<T> take_snapshot(Network<T>& net) {
    Snapshot<T> s;
    for (auto& p : net.params()) s.params.push_back(*p.value);
    for (auto& b : net.buffers()) s.buffers.push_back(*b.value);
    return s;
}

template <typename T>
void restore_snapshot(Network<T>& net, const Snapshot<T>& s) {
    std::size_t i = 0;
    for (auto& p : net.params()) *p.value = s.params[i++];
    i = 0;
    for (auto& b : net.buffers()) *b.value = s.buffers[i++];
}

}  // namespace detail

inline void write_history_csv(const std::vector<EpochStats>& history,
                              const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    out << "epoch,train_loss,val_loss,val_acc\n";
    for (const auto& e : history)
        out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ',' << e.val_acc << '\n';
}

// Trains on the four folds != `fold`, validates on `fold`; the split's test
// ids are hard-forbidden in the loader for the whole run. Early stop watches
// validation loss; the best-validation weights are restored into the model
// before returning.
template <typename T>
TrainedRun train(Model<T>& model, data::SampleLoader& loader, const data::SplitPlan& split,
                 int fold, const data::ClassWeights& weights, const TrainConfig& config) {
    if (fold < 1 || fold > data::kNumFolds)
        throw std::invalid_argument("fold must be in 1..5, got " + std::to_string(fold));
    if (config.optimizer_id != "adam")
        throw std::invalid_argument("unknown optimizer '" + config.optimizer_id + "'");
    if (loader.options().modality != model.config.modality)
        throw std::invalid_argument("loader modality does not match model modality");

    loader.forbid(split.test_ids);
    auto train_ids = split.train_ids(fold);
    const auto val_ids = split.ids_in_fold(fold);

    std::vector<ParamRef<T>> opt_params;
    for (auto& p : model.net.params())
        if (!config.freeze_backbone || p.name.rfind("head.", 0) == 0) opt_params.push_back(p);
    Adam<T> adam(opt_params, config.learning_rate);

    const std::vector<double> w(weights.w.begin(), weights.w.end());
    Rng shuffle_rng(derive_seed(config.seed, 0x5f5));
    Rng aug_rng(derive_seed(config.seed, 0xa46));

    TrainedRun run;
    detail::Snapshot<T> best;
    int stale = 0;

    auto eval_pass = [&](const std::vector<std::string>& ids, double& loss_out, double& acc_out) {
        double loss_acc = 0.0;
        std::int64_t correct = 0;
        std::size_t at = 0;
        while (at < ids.size()) {
            const std::size_t take = std::min(std::size_t(config.batch_size), ids.size() - at);
            std::vector<data::FusedSample> batch;
            std::vector<int> labels;
            batch.reserve(take);
            for (std::size_t i = 0; i < take; ++i) {
                batch.push_back(loader.load(ids[at + i]));
                labels.push_back(batch.back().label);
            }
            at += take;
            Tensor<T> x = data::stack_batch<T>(batch);
            Tensor<T> z = model.logits(x, false);
            auto res = weighted_cross_entropy(z, labels, w);
            loss_acc += res.value * double(take);
            for (std::size_t i = 0; i < take; ++i) {
                const T* zp = z.sample_ptr(int(i));
                int arg = 0;
                for (int c = 1; c < z.c; ++c)
                    if (zp[c] > zp[arg]) arg = c;
                if (arg == labels[i]) ++correct;
            }
        }
        loss_out = ids.empty() ? 0.0 : loss_acc / double(ids.size());
        acc_out = ids.empty() ? 0.0 : double(correct) / double(ids.size());
    };

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        shuffle_rng.shuffle(train_ids);
        double epoch_loss = 0.0;

        // batch boundaries; a trailing singleton is folded into the previous
        // batch because train-mode batch-norm needs n >= 2 on the head vectors
        std::vector<std::size_t> starts;
        for (std::size_t at = 0; at < train_ids.size(); at += std::size_t(config.batch_size))
            starts.push_back(at);
        for (std::size_t bi = 0; bi < starts.size(); ++bi) {
            std::size_t lo = starts[bi];
            std::size_t hi = bi + 1 < starts.size() ? starts[bi + 1] : train_ids.size();
            if (bi + 2 == starts.size() && train_ids.size() - starts[bi + 1] == 1) {
                hi = train_ids.size();  // absorb the singleton
                starts.pop_back();
            }
            std::vector<data::FusedSample> batch;
            std::vector<int> labels;
            batch.reserve(hi - lo);
            for (std::size_t i = lo; i < hi; ++i) {
                data::FusedSample s = loader.load(train_ids[i]);
                if (config.augment) s = data::augment(s, config.aug, aug_rng);
                labels.push_back(s.label);
                batch.push_back(std::move(s));
            }
            Tensor<T> x = data::stack_batch<T>(batch);
            Tensor<T> z = model.logits(x, true);
            auto res = weighted_cross_entropy(z, labels, w);
            if (!std::isfinite(res.value)) throw NonFiniteLoss(epoch, res.value);
            model.net.zero_grad();
            model.net.backward(res.grad);
            adam.step();
            epoch_loss += res.value * double(hi - lo);
        }

        EpochStats st;
        st.epoch = epoch;
        st.train_loss = train_ids.empty() ? 0.0 : epoch_loss / double(train_ids.size());
        eval_pass(val_ids, st.val_loss, st.val_acc);
        if (!std::isfinite(st.val_loss)) throw NonFiniteLoss(epoch, st.val_loss);
        run.history.push_back(st);

        if (st.val_loss < run.best_val_loss) {
            run.best_val_loss = st.val_loss;
            run.best_epoch = epoch;
            best = detail::take_snapshot(model.net);
            stale = 0;
        } else if (++stale >= config.early_stop_patience) {
            run.early_stopped = true;
            break;
        }
    }

    if (run.best_epoch > 0) detail::restore_snapshot(model.net, best);
    model.net.clear_state();
    loader.clear_forbidden();
    return run;
}

}  // namespace thermofuse::nn

#endif
