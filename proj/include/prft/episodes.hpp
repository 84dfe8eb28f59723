#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "prft/paradigms.hpp"
#include "prft/shapes.hpp"

namespace prft {

// One N-way M-shot task. Clouds are raw (normalization happens at use) and
// carry episode labels 0..N-1; class_map translates those back to dataset
// class ids.
struct Episode {
    std::vector<PointCloud> support;
    std::vector<PointCloud> query;
    std::vector<int> class_map;
    std::uint64_t episode_seed = 0;
};

// Draw N classes, then M support + Q query clouds per class, all without
// replacement. Throws with the exact shortfall if a class is too small.
Episode sample_episode(const Dataset& ds, std::size_t n_way, std::size_t m_shot,
                       std::size_t q_size, Rng& rng);

struct FewShotResult {
    std::vector<double> accuracies; // one entry per episode, in episode order
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0; // population std over episodes
    std::size_t episodes = 0;
};

FewShotResult summarize(std::vector<double> accuracies);

// Fine-tune on the support with the configured paradigm (all per-episode
// randomness derives from episode_seed), then score query accuracy.
double run_episode(const Checkpoint& ckpt, const Episode& episode,
                   const ParadigmConfig& cfg);

struct EvalConfig {
    std::size_t n_way = 5;
    std::size_t m_shot = 1;
    std::size_t q_size = 20;
    std::size_t n_episodes = 700;
    std::uint64_t seed = 0;
    // index offset into the episode-seed sequence: evaluating [0,k) plus
    // [k,n) separately must equal evaluating [0,n) in one call
    std::size_t first_episode = 0;
    int parallel = 1;
};

// Episode i uses seed derive(cfg.seed, first_episode + i), so results are a
// pure function of (dataset, checkpoint, configs) independent of scheduling.
FewShotResult meta_evaluate(const Checkpoint& ckpt, const Dataset& ds,
                            const EvalConfig& eval_cfg, const ParadigmConfig& cfg);

// Disjoint class split: n_base classes for pretraining, the rest for
// episodic evaluation. Both halves come back sorted.
std::pair<std::vector<int>, std::vector<int>> base_new_split(const Dataset& ds,
                                                             std::size_t n_base,
                                                             std::uint64_t seed);

// Clouds of the listed classes only, relabeled compactly in list order.
Dataset subset_by_classes(const Dataset& ds, std::span<const int> class_ids);

DatasetView view_of(const Dataset& ds);

} // namespace prft
