#include "prft/rft_loss.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace prft {

Var sft_loss(Tape& tape, Var logits, int label) {
    const std::size_t c = tape.value(logits).size();
    if (label < 0 || static_cast<std::size_t>(label) >= c) {
        throw std::out_of_range("sft_loss: label " + std::to_string(label) +
                                " outside [0," + std::to_string(c) + ")");
    }
    return neg(tape, pick(tape, log_softmax(tape, logits), static_cast<std::size_t>(label)));
}

namespace {

void validate_loss_inputs(Tape& tape, const LossInputs& in) {
    const auto& np = tape.value(in.new_probs);
    const std::size_t c = np.size();
    if (c < 2) throw std::invalid_argument("pointrft_loss: need at least 2 classes");
    if (in.old_probs.size() != c || in.advantages.values.size() != c) {
        throw std::invalid_argument("pointrft_loss: size mismatch (new " + std::to_string(c) +
                                    ", old " + std::to_string(in.old_probs.size()) +
                                    ", adv " + std::to_string(in.advantages.values.size()) + ")");
    }
    if (!(in.epsilon_clip > 0.0 && in.epsilon_clip < 1.0)) {
        throw std::invalid_argument("pointrft_loss: epsilon_clip " +
                                    std::to_string(in.epsilon_clip) + " outside (0,1)");
    }
    double old_sum = 0.0, new_sum = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
        if (in.old_probs[i] <= 1e-12) {
            throw std::runtime_error("pointrft_loss: old probability " +
                                     std::to_string(in.old_probs[i]) + " at class " +
                                     std::to_string(i) + " underflows the ratio");
        }
        old_sum += in.old_probs[i];
        new_sum += np[i];
    }
    if (std::abs(old_sum - 1.0) > 1e-9 || std::abs(new_sum - 1.0) > 1e-9) {
        throw std::invalid_argument("pointrft_loss: probabilities do not sum to 1 (old " +
                                    std::to_string(old_sum) + ", new " +
                                    std::to_string(new_sum) + ")");
    }
}

} // namespace

PointRftTerms pointrft_loss_terms(Tape& tape, const LossInputs& in) {
    validate_loss_inputs(tape, in);
    // copy: pushing constants below may reallocate the node storage
    const std::vector<std::size_t> shape = tape.shape(in.new_probs);
    Var old_c = tape.constant(std::span<const double>(in.old_probs), shape);
    Var adv = tape.constant(std::span<const double>(in.advantages.values), shape);
    Var ratio = div(tape, in.new_probs, old_c);
    Var clipped = clip(tape, ratio, 1.0 - in.epsilon_clip, 1.0 + in.epsilon_clip);
    // ties between the two branches keep the unclipped path, so the
    // at-snapshot gradient (ratio exactly 1) flows through `ratio`
    Var surrogate = minimum(tape, mul(tape, ratio, adv), mul(tape, clipped, adv));
    return PointRftTerms{neg(tape, mean(tape, surrogate)), ratio};
}

Var pointrft_loss(Tape& tape, const LossInputs& in) {
    return pointrft_loss_terms(tape, in).loss;
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size) {
    if (batch_size == 0) throw std::invalid_argument("make_batches: batch_size == 0");
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t start = 0; start < n; start += batch_size) {
        std::vector<std::size_t> b;
        for (std::size_t i = start; i < std::min(n, start + batch_size); ++i) b.push_back(i);
        out.push_back(std::move(b));
    }
    return out;
}

namespace {

std::vector<Tensor*> trainable(EncoderParams& p, bool head_only) {
    return head_only ? p.head() : p.all();
}

} // namespace

EpochStats sft_train_epoch(EncoderParams& params, std::span<const Batch> batches,
                           const TrainConfig& cfg, Adam& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    EpochStats stats;
    std::size_t count = 0;
    auto plist = trainable(params, cfg.head_only);
    for (const Batch& batch : batches) {
        if (batch.empty()) continue;
        params.zero_grad();
        Tape tape;
        ParamVars vars = record_params(tape, params, !cfg.head_only);
        std::vector<Var> losses;
        losses.reserve(batch.size());
        for (const PointCloud* pc : batch) {
            losses.push_back(sft_loss(tape, classify(tape, vars, *pc), pc->label));
        }
        Var avg = scale(tape, sum(tape, losses), 1.0 / static_cast<double>(batch.size()));
        tape.backward(avg);
        opt.step(plist);
        stats.mean_loss += tape.value(avg)[0] * static_cast<double>(batch.size());
        count += batch.size();
    }
    if (count > 0) stats.mean_loss /= static_cast<double>(count);
    stats.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0).count();
    return stats;
}

EpochStats rft_train_epoch(EncoderParams& params, const EncoderParams& old_policy,
                           std::span<const Batch> batches, const TrainConfig& cfg,
                           Adam& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    EpochStats stats;
    std::size_t count = 0, ratio_count = 0, clipped_count = 0;
    auto plist = trainable(params, cfg.head_only);
    for (const Batch& batch : batches) {
        if (batch.empty()) continue;
        params.zero_grad();
        Tape tape;
        ParamVars vars = record_params(tape, params, !cfg.head_only);
        std::vector<Var> losses;
        std::vector<Var> ratios;
        losses.reserve(batch.size());
        ratios.reserve(batch.size());
        for (const PointCloud* pc : batch) {
            LossInputs in;
            in.old_probs = classify_probs(old_policy, *pc);
            // a saturated snapshot can push a class below the ratio guard;
            // truncate and renormalize only then, so mild cases are untouched
            bool floored = false;
            for (double& p : in.old_probs) {
                if (p < 1e-10) {
                    p = 1e-10;
                    floored = true;
                }
            }
            if (floored) {
                double s = 0.0;
                for (double p : in.old_probs) s += p;
                for (double& p : in.old_probs) p /= s;
            }
            RewardVector rewards = combined_reward(pc->label, in.old_probs, cfg.a, cfg.b);
            in.advantages = standardize(rewards);
            in.new_probs = softmax(tape, classify(tape, vars, *pc));
            in.epsilon_clip = cfg.epsilon_clip;
            PointRftTerms terms = pointrft_loss_terms(tape, in);
            losses.push_back(terms.loss);
            ratios.push_back(terms.ratio);
            double rsum = 0;
            for (double r : rewards.values) rsum += r;
            stats.mean_reward += rsum / static_cast<double>(rewards.values.size());
        }
        Var avg = scale(tape, sum(tape, losses), 1.0 / static_cast<double>(batch.size()));
        tape.backward(avg);
        opt.step(plist);
        stats.mean_loss += tape.value(avg)[0] * static_cast<double>(batch.size());
        for (Var r : ratios) {
            for (double v : tape.value(r)) {
                ++ratio_count;
                if (v < 1.0 - cfg.epsilon_clip || v > 1.0 + cfg.epsilon_clip) ++clipped_count;
            }
        }
        count += batch.size();
    }
    if (count > 0) {
        stats.mean_loss /= static_cast<double>(count);
        stats.mean_reward /= static_cast<double>(count);
    }
    if (ratio_count > 0) {
        stats.clip_fraction = static_cast<double>(clipped_count) / static_cast<double>(ratio_count);
    }
    stats.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0).count();
    return stats;
}

} // namespace prft
