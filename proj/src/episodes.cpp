#include "prft/episodes.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace prft {

Episode sample_episode(const Dataset& ds, std::size_t n_way, std::size_t m_shot,
                       std::size_t q_size, Rng& rng) {
    if (n_way < 2) throw std::invalid_argument("sample_episode: n_way must be >= 2");
    if (m_shot == 0 || q_size == 0) {
        throw std::invalid_argument("sample_episode: m_shot and q_size must be positive");
    }
    if (ds.num_classes() < n_way) {
        throw std::invalid_argument("sample_episode: dataset has " +
                                    std::to_string(ds.num_classes()) + " classes, need " +
                                    std::to_string(n_way));
    }
    const auto by_class = ds.by_class();
    const std::size_t need = m_shot + q_size;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        if (by_class[c].size() < need) {
            throw std::invalid_argument("sample_episode: class " + std::to_string(c) + " (" +
                                        ds.class_names[c] + ") has " +
                                        std::to_string(by_class[c].size()) + " clouds, need " +
                                        std::to_string(need));
        }
    }

    Episode ep;
    const auto chosen = rng.sample_without_replacement(ds.num_classes(), n_way);
    for (std::size_t e = 0; e < n_way; ++e) {
        const std::size_t cls = chosen[e];
        ep.class_map.push_back(static_cast<int>(cls));
        const auto picks = rng.sample_without_replacement(by_class[cls].size(), need);
        for (std::size_t i = 0; i < need; ++i) {
            PointCloud pc = ds.clouds[by_class[cls][picks[i]]];
            pc.label = static_cast<int>(e);
            (i < m_shot ? ep.support : ep.query).push_back(std::move(pc));
        }
    }
    return ep;
}

FewShotResult summarize(std::vector<double> accuracies) {
    if (accuracies.empty()) throw std::invalid_argument("summarize: no episodes");
    FewShotResult r;
    r.episodes = accuracies.size();
    const double n = static_cast<double>(accuracies.size());
    double mean = 0;
    for (double a : accuracies) mean += a;
    mean /= n;
    double var = 0;
    for (double a : accuracies) var += (a - mean) * (a - mean);
    var /= n;
    r.mean_accuracy = mean;
    r.std_accuracy = std::sqrt(var);
    r.accuracies = std::move(accuracies);
    return r;
}

double run_episode(const Checkpoint& ckpt, const Episode& episode,
                   const ParadigmConfig& cfg) {
    if (episode.support.empty() || episode.query.empty()) {
        throw std::invalid_argument("run_episode: episode has empty support or query");
    }
    std::vector<PointCloud> support;
    support.reserve(episode.support.size());
    for (const PointCloud& pc : episode.support) {
        PointCloud n = normalize_cloud(pc);
        n.label = pc.label;
        support.push_back(std::move(n));
    }
    ParadigmConfig ep_cfg = cfg;
    ep_cfg.seed = derive_seed(episode.episode_seed, "finetune");
    EncoderParams params = apply_paradigm(ckpt, support, ep_cfg);

    std::size_t correct = 0;
    for (const PointCloud& pc : episode.query) {
        PointCloud n = normalize_cloud(pc);
        if (predict(params, n) == pc.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(episode.query.size());
}

FewShotResult meta_evaluate(const Checkpoint& ckpt, const Dataset& ds,
                            const EvalConfig& eval_cfg, const ParadigmConfig& cfg) {
    if (eval_cfg.n_episodes == 0) throw std::invalid_argument("meta_evaluate: no episodes");
    const int workers = std::max(1, eval_cfg.parallel);
    std::vector<double> accuracies(eval_cfg.n_episodes, 0.0);

    auto run_one = [&](std::size_t i) {
        const std::uint64_t ep_seed = derive_seed(eval_cfg.seed, eval_cfg.first_episode + i);
        Rng rng(ep_seed);
        Episode ep = sample_episode(ds, eval_cfg.n_way, eval_cfg.m_shot, eval_cfg.q_size, rng);
        ep.episode_seed = ep_seed;
        accuracies[i] = run_episode(ckpt, ep, cfg);
    };

    if (workers == 1) {
        for (std::size_t i = 0; i < eval_cfg.n_episodes; ++i) run_one(i);
    } else {
        // episodes are independent given their derived seeds; results land in
        // index order, so any worker count yields identical output
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mu;
        auto worker = [&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= eval_cfg.n_episodes) return;
                try {
                    run_one(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> threads;
        for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
        if (error) std::rethrow_exception(error);
    }
    return summarize(std::move(accuracies));
}

std::pair<std::vector<int>, std::vector<int>> base_new_split(const Dataset& ds,
                                                             std::size_t n_base,
                                                             std::uint64_t seed) {
    const std::size_t c = ds.num_classes();
    if (n_base == 0 || n_base >= c) {
        throw std::invalid_argument("base_new_split: n_base " + std::to_string(n_base) +
                                    " outside [1," + std::to_string(c) + ")");
    }
    std::vector<int> ids(c);
    for (std::size_t i = 0; i < c; ++i) ids[i] = static_cast<int>(i);
    Rng rng(derive_seed(seed, "split"));
    rng.shuffle(ids);
    std::vector<int> base(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_base));
    std::vector<int> novel(ids.begin() + static_cast<std::ptrdiff_t>(n_base), ids.end());
    std::sort(base.begin(), base.end());
    std::sort(novel.begin(), novel.end());
    return {std::move(base), std::move(novel)};
}

Dataset subset_by_classes(const Dataset& ds, std::span<const int> class_ids) {
    if (class_ids.empty()) throw std::invalid_argument("subset_by_classes: empty class list");
    std::vector<int> remap(ds.num_classes(), -1);
    Dataset out;
    out.manifest = ds.manifest;
    out.manifest.specs.clear();
    for (std::size_t i = 0; i < class_ids.size(); ++i) {
        const int c = class_ids[i];
        if (c < 0 || static_cast<std::size_t>(c) >= ds.num_classes()) {
            throw std::out_of_range("subset_by_classes: class id " + std::to_string(c));
        }
        if (remap[static_cast<std::size_t>(c)] != -1) {
            throw std::invalid_argument("subset_by_classes: duplicate class id " +
                                        std::to_string(c));
        }
        remap[static_cast<std::size_t>(c)] = static_cast<int>(i);
        out.class_names.push_back(ds.class_names[static_cast<std::size_t>(c)]);
        if (static_cast<std::size_t>(c) < ds.manifest.specs.size()) {
            out.manifest.specs.push_back(ds.manifest.specs[static_cast<std::size_t>(c)]);
        }
    }
    for (const PointCloud& pc : ds.clouds) {
        if (pc.label >= 0 && remap[static_cast<std::size_t>(pc.label)] != -1) {
            PointCloud copy = pc;
            copy.label = remap[static_cast<std::size_t>(pc.label)];
            out.clouds.push_back(std::move(copy));
        }
    }
    return out;
}

DatasetView view_of(const Dataset& ds) {
    DatasetView v;
    v.n_classes = ds.num_classes();
    v.clouds.reserve(ds.clouds.size());
    for (const PointCloud& pc : ds.clouds) v.clouds.push_back(&pc);
    return v;
}

} // namespace prft
