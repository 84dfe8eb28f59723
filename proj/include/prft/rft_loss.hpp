#pragma once

#include <span>
#include <vector>

#include "prft/encoder.hpp"
#include "prft/rewards.hpp"
#include "prft/tensor.hpp"

namespace prft {

// Cross-entropy on logits for one sample.
Var sft_loss(Tape& tape, Var logits, int label);

// Inputs for the clipped surrogate on one sample. The class distribution of
// the live policy plays the role of a group of c candidates; old_probs comes
// from the per-epoch snapshot and carries no gradient.
struct LossInputs {
    Var new_probs;                  // [1,c] or [c] on the tape
    std::vector<double> old_probs;  // detached, same length
    AdvantageVector advantages;     // standardized, same length
    double epsilon_clip = 0.2;
};

// loss = -mean_i min(ratio_i * A_i, clip(ratio_i, 1-eps, 1+eps) * A_i)
// with ratio = new_probs / old_probs. No KL term: there is no reference
// policy to regularize against, the per-epoch snapshot already anchors
// the ratio.
Var pointrft_loss(Tape& tape, const LossInputs& in);

// Same, but also exposes the ratio node so callers can read clip statistics.
struct PointRftTerms {
    Var loss;
    Var ratio;
};
PointRftTerms pointrft_loss_terms(Tape& tape, const LossInputs& in);

// --- epoch drivers ------------------------------------------------------------

struct TrainConfig {
    double lr = 1e-3;
    double a = 1.0;
    double b = 2.0;
    double epsilon_clip = 0.2;
    std::size_t batch_size = 16;
    bool head_only = false;
};

struct EpochStats {
    int epoch = 0;
    double mean_loss = 0.0;
    double mean_reward = 0.0;   // mean combined reward over samples and classes
    double clip_fraction = 0.0; // fraction of ratios outside [1-eps, 1+eps]
    double wall_ms = 0.0;
};

using Batch = std::vector<const PointCloud*>;

// Split indices [0,n) into batches of at most batch_size, preserving order.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size);

// One supervised pass over the batches. Clouds must be normalized and carry
// labels in [0, num_classes).
EpochStats sft_train_epoch(EncoderParams& params, std::span<const Batch> batches,
                           const TrainConfig& cfg, Adam& opt);

// One clipped-surrogate pass. `old_policy` is the epoch snapshot; rewards
// and advantages are computed from its detached probabilities.
EpochStats rft_train_epoch(EncoderParams& params, const EncoderParams& old_policy,
                           std::span<const Batch> batches, const TrainConfig& cfg,
                           Adam& opt);

} // namespace prft
