#include "prft/sweep.hpp"

#include <stdexcept>

#include "prft/report.hpp"

namespace prft {

std::vector<SweepCell> make_grid(std::span<const std::pair<double, double>> rewards,
                                 std::span<const double> epsilons) {
    if (rewards.empty() || epsilons.empty()) {
        throw std::invalid_argument("make_grid: empty axis");
    }
    std::vector<SweepCell> cells;
    cells.reserve(rewards.size() * epsilons.size());
    for (const auto& [a, b] : rewards) {
        for (double eps : epsilons) {
            cells.push_back({a, b, eps});
        }
    }
    return cells;
}

std::vector<SweepCell> default_ablation_grid() {
    const std::pair<double, double> rewards[] = {{1.0, 0.0}, {1.0, 1.0}, {1.0, 2.0}};
    const double epsilons[] = {0.2};
    return make_grid(rewards, epsilons);
}

std::vector<SweepRow> ablation_sweep(const Checkpoint& ckpt, const Dataset& ds,
                                     const ParadigmConfig& base,
                                     const EvalConfig& eval_cfg,
                                     std::span<const SweepCell> cells) {
    if (cells.empty()) throw std::invalid_argument("ablation_sweep: empty grid");
    std::vector<SweepRow> rows;
    rows.reserve(cells.size());
    for (const SweepCell& cell : cells) {
        ParadigmConfig cfg = base;
        cfg.a = cell.a;
        cfg.b = cell.b;
        cfg.epsilon_clip = cell.epsilon;
        SweepRow row;
        row.kind = cfg.kind;
        row.cell = cell;
        row.budget = cfg.budget_fraction;
        row.n_way = eval_cfg.n_way;
        row.m_shot = eval_cfg.m_shot;
        row.result = meta_evaluate(ckpt, ds, eval_cfg, cfg);
        row.seed = eval_cfg.seed;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
    std::string out = "paradigm,a,b,epsilon,budget,N,M,mean_acc,std_acc,episodes,seed\n";
    for (const SweepRow& r : rows) {
        out += paradigm_name(r.kind);
        out += ',';
        out += format_double(r.cell.a);
        out += ',';
        out += format_double(r.cell.b);
        out += ',';
        out += format_double(r.cell.epsilon);
        out += ',';
        out += format_double(r.budget);
        out += ',';
        out += std::to_string(r.n_way);
        out += ',';
        out += std::to_string(r.m_shot);
        out += ',';
        out += format_double(r.result.mean_accuracy);
        out += ',';
        out += format_double(r.result.std_accuracy);
        out += ',';
        out += std::to_string(r.result.episodes);
        out += ',';
        out += std::to_string(r.seed);
        out += '\n';
    }
    return out;
}

} // namespace prft
