#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "prft/encoder.hpp"
#include "prft/rft_loss.hpp"

namespace prft {

// Fine-tuning paradigm applied on top of a pretrained body:
//   PreS   - supervised only
//   PreR   - clipped-surrogate only
//   PreSR  - supervised first, then clipped-surrogate, sequentially
enum class ParadigmKind { PreS, PreR, PreSR };

const char* paradigm_name(ParadigmKind kind);
ParadigmKind paradigm_from_name(const std::string& name);

struct ParadigmConfig {
    ParadigmKind kind = ParadigmKind::PreSR;
    int sft_epochs = 30;
    int rft_epochs = 30;
    double budget_fraction = 1.0; // scales both epoch counts, ceil(f * epochs)
    double lr = 1e-3;
    double a = 1.0;
    double b = 2.0;
    double epsilon_clip = 0.2;
    std::size_t batch_size = 16;
    bool head_only = false;
    std::uint64_t seed = 0;
};

// ceil(fraction * full); fraction must lie in (0, 1].
int scaled_epochs(int full, double fraction);

// Pretrained feature body plus a provenance manifest (seed, config echo,
// holdout accuracy, per-epoch losses).
struct Checkpoint {
    EncoderBody body;
    nlohmann::json manifest;
};

struct PretrainConfig {
    int epochs = 50;
    double lr = 1e-3;
    std::size_t batch_size = 32;
    std::size_t h1 = 64;
    std::size_t h2 = 128;
    double holdout_fraction = 0.2;
    std::uint64_t seed = 0;
};

struct DatasetView {
    // clouds to train on; labels must already be compact in [0, n_classes)
    std::vector<const PointCloud*> clouds;
    std::size_t n_classes = 0;
};

// Supervised pretraining of body+head on the view; the head is dropped and
// only the body ships in the checkpoint. Clouds are normalized internally.
Checkpoint pretrain(const DatasetView& data, const PretrainConfig& cfg,
                    std::vector<EpochStats>* stats = nullptr);

// Binary tensor container + readable JSON manifest at <path>.json.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Attach a fresh head for the support's class count and run the configured
// paradigm on the (already normalized, episode-labeled) support set.
// Epoch stats are appended to *stats when given: SFT epochs first, then RFT.
EncoderParams apply_paradigm(const Checkpoint& ckpt,
                             std::span<const PointCloud> support,
                             const ParadigmConfig& cfg,
                             std::vector<EpochStats>* stats = nullptr);

} // namespace prft
