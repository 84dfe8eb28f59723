#include "prft/paradigms.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "prft/rng.hpp"

namespace prft {

const char* paradigm_name(ParadigmKind kind) {
    switch (kind) {
        case ParadigmKind::PreS: return "pre-s";
        case ParadigmKind::PreR: return "pre-r";
        case ParadigmKind::PreSR: return "pre-s-r";
    }
    throw std::invalid_argument("paradigm_name: bad kind");
}

ParadigmKind paradigm_from_name(const std::string& name) {
    if (name == "pre-s") return ParadigmKind::PreS;
    if (name == "pre-r") return ParadigmKind::PreR;
    if (name == "pre-s-r") return ParadigmKind::PreSR;
    throw std::invalid_argument("paradigm_from_name: unknown paradigm '" + name + "'");
}

int scaled_epochs(int full, double fraction) {
    if (full < 0) throw std::invalid_argument("scaled_epochs: negative epoch count");
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw std::invalid_argument("scaled_epochs: fraction " + std::to_string(fraction) +
                                    " outside (0,1]");
    }
    // the slack absorbs float noise like 0.1*30 = 3.0000000000000004
    return static_cast<int>(std::ceil(fraction * static_cast<double>(full) - 1e-9));
}

namespace {

void shuffled_batches(Rng& rng, std::vector<std::size_t>& order,
                      const std::vector<PointCloud>& clouds, std::size_t batch_size,
                      std::vector<Batch>& out) {
    rng.shuffle(order);
    out.clear();
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        Batch b;
        for (std::size_t i = start; i < std::min(order.size(), start + batch_size); ++i) {
            b.push_back(&clouds[order[i]]);
        }
        out.push_back(std::move(b));
    }
}

} // namespace

Checkpoint pretrain(const DatasetView& data, const PretrainConfig& cfg,
                    std::vector<EpochStats>* stats) {
    if (data.n_classes < 2) throw std::invalid_argument("pretrain: need >= 2 classes");
    if (data.clouds.empty()) throw std::invalid_argument("pretrain: empty dataset view");
    if (cfg.epochs < 0) throw std::invalid_argument("pretrain: negative epoch count");
    if (!(cfg.holdout_fraction >= 0.0 && cfg.holdout_fraction < 1.0)) {
        throw std::invalid_argument("pretrain: holdout_fraction outside [0,1)");
    }

    std::vector<PointCloud> clouds;
    clouds.reserve(data.clouds.size());
    std::vector<std::vector<std::size_t>> per_class(data.n_classes);
    for (const PointCloud* pc : data.clouds) {
        if (pc->label < 0 || static_cast<std::size_t>(pc->label) >= data.n_classes) {
            throw std::out_of_range("pretrain: label " + std::to_string(pc->label) +
                                    " outside [0," + std::to_string(data.n_classes) + ")");
        }
        per_class[static_cast<std::size_t>(pc->label)].push_back(clouds.size());
        PointCloud n = normalize_cloud(*pc);
        n.label = pc->label;
        clouds.push_back(std::move(n));
    }

    // per-class holdout split
    Rng split_rng(derive_seed(cfg.seed, "holdout"));
    std::vector<std::size_t> train_idx, holdout_idx;
    for (auto& idx : per_class) {
        split_rng.shuffle(idx);
        std::size_t n_hold = static_cast<std::size_t>(
            std::floor(cfg.holdout_fraction * static_cast<double>(idx.size())));
        if (n_hold >= idx.size() && !idx.empty()) n_hold = idx.size() - 1;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            (i < n_hold ? holdout_idx : train_idx).push_back(idx[i]);
        }
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(holdout_idx.begin(), holdout_idx.end());
    if (train_idx.empty()) throw std::invalid_argument("pretrain: holdout left no training data");

    EncoderParams params = init_params(derive_seed(cfg.seed, "init"), cfg.h1, cfg.h2,
                                       data.n_classes);
    TrainConfig tc;
    tc.lr = cfg.lr;
    tc.batch_size = cfg.batch_size;
    Adam opt(AdamConfig{.lr = cfg.lr});
    Rng order_rng(derive_seed(cfg.seed, "order"));
    std::vector<std::size_t> order = train_idx;
    std::vector<Batch> batches;
    nlohmann::json epoch_losses = nlohmann::json::array();
    double final_loss = 0.0;
    for (int e = 0; e < cfg.epochs; ++e) {
        shuffled_batches(order_rng, order, clouds, cfg.batch_size, batches);
        EpochStats s = sft_train_epoch(params, batches, tc, opt);
        s.epoch = e;
        final_loss = s.mean_loss;
        epoch_losses.push_back(s.mean_loss);
        if (stats) stats->push_back(s);
    }

    // holdout accuracy (training accuracy when there is no holdout)
    const auto& eval_idx = holdout_idx.empty() ? train_idx : holdout_idx;
    std::size_t correct = 0;
    for (std::size_t i : eval_idx) {
        if (predict(params, clouds[i]) == clouds[i].label) ++correct;
    }
    const double accuracy = static_cast<double>(correct) / static_cast<double>(eval_idx.size());

    Checkpoint ckpt;
    ckpt.body = clone_body(params.body);
    ckpt.manifest = {
        {"seed", cfg.seed},
        {"epochs", cfg.epochs},
        {"lr", cfg.lr},
        {"batch_size", cfg.batch_size},
        {"h1", cfg.h1},
        {"h2", cfg.h2},
        {"n_classes", data.n_classes},
        {"holdout_fraction", cfg.holdout_fraction},
        {"holdout_size", holdout_idx.size()},
        {"train_size", train_idx.size()},
        {"holdout_accuracy", accuracy},
        {"accuracy_on", holdout_idx.empty() ? "train" : "holdout"},
        {"final_mean_loss", final_loss},
        {"epoch_losses", epoch_losses},
    };
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    save_tensors(path, {
        {"body.w1", &ckpt.body.w1},
        {"body.b1", &ckpt.body.b1},
        {"body.w2", &ckpt.body.w2},
        {"body.b2", &ckpt.body.b2},
    });
    std::ofstream ms(path + ".json", std::ios::trunc);
    if (!ms) throw std::runtime_error("save_checkpoint: cannot open " + path + ".json");
    ms << ckpt.manifest.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
    auto tensors = load_tensors(path);
    Checkpoint ckpt;
    int found = 0;
    for (auto& [name, t] : tensors) {
        if (name == "body.w1") {
            ckpt.body.w1 = std::move(t);
            ++found;
        } else if (name == "body.b1") {
            ckpt.body.b1 = std::move(t);
            ++found;
        } else if (name == "body.w2") {
            ckpt.body.w2 = std::move(t);
            ++found;
        } else if (name == "body.b2") {
            ckpt.body.b2 = std::move(t);
            ++found;
        }
    }
    if (found != 4) {
        throw std::runtime_error("load_checkpoint: " + path + " is missing body tensors");
    }
    if (ckpt.body.w1.shape.size() != 2 || ckpt.body.w1.shape[0] != 3 ||
        ckpt.body.w2.shape.size() != 2 || ckpt.body.w1.shape[1] != ckpt.body.w2.shape[0] ||
        ckpt.body.b1.shape != std::vector<std::size_t>{ckpt.body.w1.shape[1]} ||
        ckpt.body.b2.shape != std::vector<std::size_t>{ckpt.body.w2.shape[1]}) {
        throw std::runtime_error("load_checkpoint: inconsistent body shapes in " + path);
    }
    std::ifstream ms(path + ".json");
    if (ms) {
        ckpt.manifest = nlohmann::json::parse(ms, nullptr, true);
    }
    return ckpt;
}

EncoderParams apply_paradigm(const Checkpoint& ckpt,
                             std::span<const PointCloud> support,
                             const ParadigmConfig& cfg,
                             std::vector<EpochStats>* stats) {
    if (support.empty()) throw std::invalid_argument("apply_paradigm: empty support set");
    int max_label = 0;
    for (const PointCloud& pc : support) {
        if (pc.label < 0) {
            throw std::out_of_range("apply_paradigm: unlabeled support cloud");
        }
        max_label = std::max(max_label, pc.label);
    }
    const std::size_t n_way = static_cast<std::size_t>(max_label) + 1;
    if (n_way < 2) throw std::invalid_argument("apply_paradigm: need >= 2 support classes");
    if (cfg.sft_epochs < 0 || cfg.rft_epochs < 0) {
        throw std::invalid_argument("apply_paradigm: negative epoch count");
    }

    EncoderParams params = with_head(ckpt.body, n_way, derive_seed(cfg.seed, "head"));
    TrainConfig tc;
    tc.lr = cfg.lr;
    tc.a = cfg.a;
    tc.b = cfg.b;
    tc.epsilon_clip = cfg.epsilon_clip;
    tc.batch_size = cfg.batch_size;
    tc.head_only = cfg.head_only;

    const int sft_epochs =
        cfg.kind == ParadigmKind::PreR ? 0 : scaled_epochs(cfg.sft_epochs, cfg.budget_fraction);
    const int rft_epochs =
        cfg.kind == ParadigmKind::PreS ? 0 : scaled_epochs(cfg.rft_epochs, cfg.budget_fraction);

    std::vector<std::size_t> order(support.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<PointCloud> clouds(support.begin(), support.end());
    std::vector<Batch> batches;
    int epoch_counter = 0;

    if (sft_epochs > 0) {
        Adam opt(AdamConfig{.lr = cfg.lr});
        Rng order_rng(derive_seed(cfg.seed, "sft"));
        for (int e = 0; e < sft_epochs; ++e) {
            shuffled_batches(order_rng, order, clouds, tc.batch_size, batches);
            EpochStats s = sft_train_epoch(params, batches, tc, opt);
            s.epoch = epoch_counter++;
            if (stats) stats->push_back(s);
        }
    }
    if (rft_epochs > 0) {
        Adam opt(AdamConfig{.lr = cfg.lr}); // the second stage starts fresh
        Rng order_rng(derive_seed(cfg.seed, "rft"));
        for (int e = 0; e < rft_epochs; ++e) {
            const EncoderParams old_policy = snapshot(params); // re-anchored every epoch
            shuffled_batches(order_rng, order, clouds, tc.batch_size, batches);
            EpochStats s = rft_train_epoch(params, old_policy, batches, tc, opt);
            s.epoch = epoch_counter++;
            if (stats) stats->push_back(s);
        }
    }
    return params;
}

} // namespace prft
