#pragma once

#include <span>
#include <string>
#include <vector>

#include "prft/episodes.hpp"
#include "prft/paradigms.hpp"

namespace prft {

// One cell of the reward/clip ablation grid.
struct SweepCell {
    double a = 1.0;
    double b = 2.0;
    double epsilon = 0.2;
};

struct SweepRow {
    ParadigmKind kind = ParadigmKind::PreR;
    SweepCell cell;
    double budget = 1.0;
    std::size_t n_way = 0;
    std::size_t m_shot = 0;
    FewShotResult result;
    std::uint64_t seed = 0;
};

// Cross product of reward settings and clip widths, row-major: for each
// (a, b) pair, every epsilon in order.
std::vector<SweepCell> make_grid(std::span<const std::pair<double, double>> rewards,
                                 std::span<const double> epsilons);

// The standard grid: accuracy-only, equal-weight and dispersion-heavy reward
// mixes, each at the default clip width.
std::vector<SweepCell> default_ablation_grid();

// One meta-evaluation per cell. Every cell sees the identical episode
// sequence (same eval seed), so per-cell accuracies are paired samples.
// Cells run in grid order; results come back in grid order.
std::vector<SweepRow> ablation_sweep(const Checkpoint& ckpt, const Dataset& ds,
                                     const ParadigmConfig& base,
                                     const EvalConfig& eval_cfg,
                                     std::span<const SweepCell> cells);

// 11-column CSV, header included:
// paradigm,a,b,epsilon,budget,N,M,mean_acc,std_acc,episodes,seed
std::string sweep_csv(std::span<const SweepRow> rows);

} // namespace prft
