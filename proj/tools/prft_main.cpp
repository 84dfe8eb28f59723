#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "prft/episodes.hpp"
#include "prft/paradigms.hpp"
#include "prft/report.hpp"
#include "prft/shapes.hpp"
#include "prft/sweep.hpp"

using namespace prft;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string join_argv(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json load_config_json(const std::string& path) {
    if (path.empty()) return nlohmann::json::object();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("config: " + std::string(e.what()));
    }
}

// flag beats config file beats built-in default (seeds additionally read
// PRFT_SEED, which CLI11 counts as if the flag were passed)
template <typename T>
void take(CLI::App* cmd, const char* flag, const nlohmann::json& cfg, const char* key,
          T& v) {
    if (!cfg.contains(key) || cmd->count(flag) > 0) return;
    try {
        v = cfg.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config: key '" + std::string(key) + "': " + e.what());
    }
}

std::vector<std::pair<double, double>> parse_reward_list(const std::string& s) {
    std::vector<std::pair<double, double>> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw std::invalid_argument("rewards: expected a:b pairs, got '" + item + "'");
        }
        out.emplace_back(parse_double(item.substr(0, colon)),
                         parse_double(item.substr(colon + 1)));
    }
    if (out.empty()) throw std::invalid_argument("rewards: empty list");
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(parse_double(item));
    if (out.empty()) throw std::invalid_argument("epsilons: empty list");
    return out;
}

// resolve --classes auto|new|base|all against the checkpoint manifest; the
// returned pointer is ds itself or subset storage
const Dataset* select_classes(const Dataset& ds, const Checkpoint& ckpt,
                              const std::string& mode, Dataset& subset_storage) {
    std::string m = mode;
    if (m == "auto") m = ckpt.manifest.contains("new_classes") ? "new" : "all";
    if (m == "all") return &ds;
    const char* key = m == "new" ? "new_classes" : "base_classes";
    if (!ckpt.manifest.contains(key)) {
        throw std::invalid_argument("checkpoint records no " + std::string(key) +
                                    "; pretrain with --base-classes or pass --classes all");
    }
    const auto ids = ckpt.manifest.at(key).get<std::vector<int>>();
    subset_storage = subset_by_classes(ds, ids);
    return &subset_storage;
}

struct GenDataOpts {
    int classes = 12;
    std::size_t per_class = 60;
    std::size_t points = 256;
    std::string regime = "clean";
    std::uint64_t seed = 0;
    std::string out = "dataset.prftpc";
    std::string config;
};

struct PretrainOpts {
    std::string data;
    std::string out = "model.prftckpt";
    int epochs = 50;
    double lr = 1e-3;
    std::size_t batch = 32;
    std::size_t h1 = 64;
    std::size_t h2 = 128;
    double holdout = 0.2;
    int base_classes = 0; // 0 trains on every class
    std::uint64_t seed = 0;
    std::string timing = "off";
    std::string record;
    std::string config;
};

struct FewshotOpts {
    std::string ckpt;
    std::string data;
    std::string paradigm = "pre-s-r";
    std::size_t n_way = 5;
    std::size_t m_shot = 1;
    std::size_t q_size = 20;
    std::size_t episodes = 700;
    std::size_t first_episode = 0;
    int sft_epochs = 30;
    int rft_epochs = 30;
    double budget = 1.0;
    double lr = 1e-3;
    double a = 1.0;
    double b = 2.0;
    double epsilon = 0.2;
    std::size_t batch = 16;
    bool head_only = false;
    std::string classes = "auto";
    std::uint64_t seed = 0;
    int parallel = 1;
    std::string timing = "off";
    std::string out_csv = "results.csv";
    std::string out_json = "run.json";
    std::string config;
};

struct AblateOpts {
    std::string ckpt;
    std::string data;
    std::string paradigm = "pre-r";
    std::string rewards = "1:0,1:1,1:2";
    std::string epsilons = "0.2";
    int sft_epochs = 30;
    int rft_epochs = 30;
    double budget = 1.0;
    double lr = 1e-3;
    std::size_t batch = 16;
    bool head_only = false;
    std::size_t n_way = 5;
    std::size_t m_shot = 1;
    std::size_t q_size = 20;
    std::size_t episodes = 700;
    std::string classes = "auto";
    std::uint64_t seed = 0;
    int parallel = 1;
    std::string timing = "off";
    std::string out_csv = "sweep.csv";
    std::string record;
    std::string config;
};

struct ReportOpts {
    std::string in;
    std::string out_csv; // empty: print to stdout
    std::string out_svg; // empty: skip the chart
};

void run_gen_data(const GenDataOpts& o) {
    Dataset ds = generate_dataset(default_specs(o.classes, o.regime), o.per_class,
                                  o.points, o.seed, o.regime);
    save_dataset(ds, o.out);
    std::cout << "wrote " << o.out << " (" << ds.clouds.size() << " clouds, "
              << ds.num_classes() << " classes, " << o.points << " points, regime "
              << o.regime << ")\n";
}

void run_pretrain(const PretrainOpts& o, const std::string& cmdline,
                  const nlohmann::json& resolved) {
    const std::string data_hash = hash_hex(hash_file(o.data));
    Dataset full = load_dataset(o.data);

    std::vector<int> base_ids, new_ids;
    Dataset base_subset;
    const Dataset* train_ds = &full;
    if (o.base_classes > 0) {
        auto [base, novel] = base_new_split(full, static_cast<std::size_t>(o.base_classes),
                                            o.seed);
        base_ids = std::move(base);
        new_ids = std::move(novel);
        base_subset = subset_by_classes(full, base_ids);
        train_ds = &base_subset;
    }

    PretrainConfig cfg;
    cfg.epochs = o.epochs;
    cfg.lr = o.lr;
    cfg.batch_size = o.batch;
    cfg.h1 = o.h1;
    cfg.h2 = o.h2;
    cfg.holdout_fraction = o.holdout;
    cfg.seed = o.seed;

    std::vector<EpochStats> stats;
    const auto t0 = std::chrono::steady_clock::now();
    Checkpoint ckpt = pretrain(view_of(*train_ds), cfg, &stats);
    const double wall = seconds_since(t0);

    if (!base_ids.empty()) {
        ckpt.manifest["base_classes"] = base_ids;
        ckpt.manifest["new_classes"] = new_ids;
    }
    ckpt.manifest["data_file"] = o.data;
    ckpt.manifest["data_fnv1a64"] = data_hash;
    ckpt.manifest["n_points"] = full.manifest.n_points;
    ckpt.manifest["regime"] = full.manifest.regime;
    save_checkpoint(ckpt, o.out);

    if (!o.record.empty()) {
        RunRecord rec;
        rec.command = cmdline;
        rec.config = resolved;
        rec.seed = o.seed;
        rec.input_hashes.emplace_back(o.data, data_hash);
        rec.epochs = stats;
        rec.wall_phases.emplace_back("pretrain", wall);
        rec.macs_per_epoch =
            flops_estimate(full.manifest.n_points, o.h1, o.h2, train_ds->num_classes(),
                           ckpt.manifest.at("train_size").get<std::size_t>(), true);
        if (o.timing == "off") scrub_wall_times(rec);
        write_file(o.record, run_record_json(rec).dump(2) + "\n");
    }

    std::cout << "wrote " << o.out << " (holdout accuracy "
              << format_double(ckpt.manifest.at("holdout_accuracy").get<double>())
              << " on " << ckpt.manifest.at("accuracy_on").get<std::string>() << ")\n";
}

void run_fewshot(const FewshotOpts& o, const std::string& cmdline,
                 const nlohmann::json& resolved) {
    const std::string data_hash = hash_hex(hash_file(o.data));
    const std::string ckpt_hash = hash_hex(hash_file(o.ckpt));
    Dataset full = load_dataset(o.data);
    Checkpoint ckpt = load_checkpoint(o.ckpt);

    Dataset subset;
    const Dataset* eval_ds = select_classes(full, ckpt, o.classes, subset);

    ParadigmConfig pc;
    pc.kind = paradigm_from_name(o.paradigm);
    pc.sft_epochs = o.sft_epochs;
    pc.rft_epochs = o.rft_epochs;
    pc.budget_fraction = o.budget;
    pc.lr = o.lr;
    pc.a = o.a;
    pc.b = o.b;
    pc.epsilon_clip = o.epsilon;
    pc.batch_size = o.batch;
    pc.head_only = o.head_only;
    pc.seed = o.seed;

    EvalConfig ev;
    ev.n_way = o.n_way;
    ev.m_shot = o.m_shot;
    ev.q_size = o.q_size;
    ev.n_episodes = o.episodes;
    ev.first_episode = o.first_episode;
    ev.seed = o.seed;
    ev.parallel = o.parallel;

    const auto t0 = std::chrono::steady_clock::now();
    FewShotResult res = meta_evaluate(ckpt, *eval_ds, ev, pc);
    const double wall = seconds_since(t0);

    ResultRow row;
    row.paradigm = o.paradigm;
    row.a = o.a;
    row.b = o.b;
    row.epsilon = o.epsilon;
    row.budget = o.budget;
    row.regime = full.manifest.regime;
    row.n_way = o.n_way;
    row.m_shot = o.m_shot;
    row.q_size = o.q_size;
    row.episodes = res.episodes;
    row.mean_acc = res.mean_accuracy;
    row.std_acc = res.std_accuracy;
    row.seed = o.seed;
    row.wall_s = wall;
    // fine-tuning cost of one epoch over the support set, forward+backward
    row.gmacs = static_cast<double>(flops_estimate(full.manifest.n_points,
                                                   ckpt.body.h1(), ckpt.body.h2(),
                                                   o.n_way, o.n_way * o.m_shot, true)) /
                1e9;

    RunRecord rec;
    rec.command = cmdline;
    rec.config = resolved;
    rec.seed = o.seed;
    rec.input_hashes.emplace_back(o.data, data_hash);
    rec.input_hashes.emplace_back(o.ckpt, ckpt_hash);
    rec.results.push_back(row);
    rec.fewshot_results.push_back(res);
    rec.wall_phases.emplace_back("fewshot", wall);
    rec.macs_per_epoch = flops_estimate(full.manifest.n_points, ckpt.body.h1(),
                                        ckpt.body.h2(), o.n_way, o.n_way * o.m_shot, true);
    if (o.timing == "off") scrub_wall_times(rec);

    write_file(o.out_csv, results_csv(rec.results));
    write_file(o.out_json, run_record_json(rec).dump(2) + "\n");
    std::cout << o.paradigm << " " << o.n_way << "-way " << o.m_shot << "-shot: "
              << format_double(res.mean_accuracy) << " +- "
              << format_double(res.std_accuracy) << " over " << res.episodes
              << " episodes\n";
}

void run_ablate(const AblateOpts& o, const std::string& cmdline,
                const nlohmann::json& resolved) {
    const std::string data_hash = hash_hex(hash_file(o.data));
    const std::string ckpt_hash = hash_hex(hash_file(o.ckpt));
    Dataset full = load_dataset(o.data);
    Checkpoint ckpt = load_checkpoint(o.ckpt);

    Dataset subset;
    const Dataset* eval_ds = select_classes(full, ckpt, o.classes, subset);

    ParadigmConfig base;
    base.kind = paradigm_from_name(o.paradigm);
    base.sft_epochs = o.sft_epochs;
    base.rft_epochs = o.rft_epochs;
    base.budget_fraction = o.budget;
    base.lr = o.lr;
    base.batch_size = o.batch;
    base.head_only = o.head_only;
    base.seed = o.seed;

    EvalConfig ev;
    ev.n_way = o.n_way;
    ev.m_shot = o.m_shot;
    ev.q_size = o.q_size;
    ev.n_episodes = o.episodes;
    ev.seed = o.seed;
    ev.parallel = o.parallel;

    const auto cells = make_grid(parse_reward_list(o.rewards), parse_double_list(o.epsilons));
    const auto t0 = std::chrono::steady_clock::now();
    const auto rows = ablation_sweep(ckpt, *eval_ds, base, ev, cells);
    const double wall = seconds_since(t0);

    write_file(o.out_csv, sweep_csv(rows));

    if (!o.record.empty()) {
        RunRecord rec;
        rec.command = cmdline;
        rec.config = resolved;
        rec.seed = o.seed;
        rec.input_hashes.emplace_back(o.data, data_hash);
        rec.input_hashes.emplace_back(o.ckpt, ckpt_hash);
        for (const SweepRow& r : rows) {
            ResultRow rr;
            rr.paradigm = paradigm_name(r.kind);
            rr.a = r.cell.a;
            rr.b = r.cell.b;
            rr.epsilon = r.cell.epsilon;
            rr.budget = r.budget;
            rr.regime = full.manifest.regime;
            rr.n_way = r.n_way;
            rr.m_shot = r.m_shot;
            rr.q_size = o.q_size;
            rr.episodes = r.result.episodes;
            rr.mean_acc = r.result.mean_accuracy;
            rr.std_acc = r.result.std_accuracy;
            rr.seed = r.seed;
            rec.results.push_back(std::move(rr));
            rec.fewshot_results.push_back(r.result);
        }
        rec.wall_phases.emplace_back("ablate", wall);
        rec.macs_per_epoch = flops_estimate(full.manifest.n_points, ckpt.body.h1(),
                                            ckpt.body.h2(), o.n_way, o.n_way * o.m_shot,
                                            true);
        if (o.timing == "off") scrub_wall_times(rec);
        write_file(o.record, run_record_json(rec).dump(2) + "\n");
    }

    std::cout << "wrote " << o.out_csv << " (" << rows.size() << " cells, "
              << o.episodes << " episodes each)\n";
}

void run_report(const ReportOpts& o) {
    const auto rows = parse_results_csv(read_file(o.in));
    const std::string csv = results_csv(rows);
    if (o.out_csv.empty() && o.out_svg.empty()) {
        std::cout << csv;
        return;
    }
    if (!o.out_csv.empty()) write_file(o.out_csv, csv);
    if (!o.out_svg.empty()) write_file(o.out_svg, bar_chart_svg(rows));
    std::cout << "report: " << rows.size() << " rows";
    if (!o.out_csv.empty()) std::cout << " -> " << o.out_csv;
    if (!o.out_svg.empty()) std::cout << " -> " << o.out_svg;
    std::cout << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthetic point cloud few-shot fine-tuning laboratory"};
    app.require_subcommand(1);
    const std::string cmdline = join_argv(argc, argv);

    GenDataOpts gd;
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic shape dataset");
    gen->add_option("--classes", gd.classes, "number of shape classes");
    gen->add_option("--per-class", gd.per_class, "clouds per class");
    gen->add_option("--points", gd.points, "points per cloud");
    gen->add_option("--regime", gd.regime, "clean or corrupted sampling");
    gen->add_option("--seed", gd.seed, "master seed")->envname("PRFT_SEED");
    gen->add_option("--out", gd.out, "output dataset path");
    gen->add_option("--config", gd.config, "JSON config file");

    PretrainOpts pt;
    auto* pre = app.add_subcommand("pretrain", "pretrain the encoder body");
    pre->add_option("--data", pt.data, "dataset path")->required();
    pre->add_option("--out", pt.out, "checkpoint path");
    pre->add_option("--epochs", pt.epochs, "training epochs");
    pre->add_option("--lr", pt.lr, "learning rate");
    pre->add_option("--batch", pt.batch, "batch size");
    pre->add_option("--h1", pt.h1, "first hidden width");
    pre->add_option("--h2", pt.h2, "second hidden width");
    pre->add_option("--holdout", pt.holdout, "holdout fraction");
    pre->add_option("--base-classes", pt.base_classes,
                    "train on a seeded base split of this many classes");
    pre->add_option("--seed", pt.seed, "master seed")->envname("PRFT_SEED");
    pre->add_option("--timing", pt.timing, "live or off wall-clock reporting")
        ->check(CLI::IsMember({"live", "off"}));
    pre->add_option("--record", pt.record, "write a run record JSON here");
    pre->add_option("--config", pt.config, "JSON config file");

    FewshotOpts fs;
    auto* few = app.add_subcommand("fewshot", "episodic few-shot evaluation");
    few->add_option("--ckpt", fs.ckpt, "checkpoint path")->required();
    few->add_option("--data", fs.data, "dataset path")->required();
    few->add_option("--paradigm", fs.paradigm, "pre-s, pre-r or pre-s-r");
    few->add_option("--n-way", fs.n_way, "classes per episode");
    few->add_option("--m-shot", fs.m_shot, "support clouds per class");
    few->add_option("--q-size", fs.q_size, "query clouds per class");
    few->add_option("--episodes", fs.episodes, "number of test episodes");
    few->add_option("--first-episode", fs.first_episode, "episode index offset");
    few->add_option("--sft-epochs", fs.sft_epochs, "supervised epochs per episode");
    few->add_option("--rft-epochs", fs.rft_epochs, "surrogate epochs per episode");
    few->add_option("--budget", fs.budget, "fraction of the epoch budget");
    few->add_option("--lr", fs.lr, "fine-tuning learning rate");
    few->add_option("--a", fs.a, "accuracy reward weight");
    few->add_option("--b", fs.b, "dispersion reward weight");
    few->add_option("--epsilon", fs.epsilon, "ratio clip width");
    few->add_option("--batch", fs.batch, "fine-tuning batch size");
    few->add_flag("--head-only", fs.head_only, "freeze the body, train the head");
    few->add_option("--classes", fs.classes, "evaluate on auto, new, base or all classes")
        ->check(CLI::IsMember({"auto", "new", "base", "all"}));
    few->add_option("--seed", fs.seed, "master seed")->envname("PRFT_SEED");
    few->add_option("--parallel", fs.parallel, "worker threads over episodes");
    few->add_option("--timing", fs.timing, "live or off wall-clock reporting")
        ->check(CLI::IsMember({"live", "off"}));
    few->add_option("--out-csv", fs.out_csv, "results CSV path");
    few->add_option("--out-json", fs.out_json, "run record JSON path");
    few->add_option("--config", fs.config, "JSON config file");

    AblateOpts ab;
    auto* abl = app.add_subcommand("ablate", "reward and clip-width sweep");
    abl->add_option("--ckpt", ab.ckpt, "checkpoint path")->required();
    abl->add_option("--data", ab.data, "dataset path")->required();
    abl->add_option("--paradigm", ab.paradigm, "paradigm applied in every cell");
    abl->add_option("--rewards", ab.rewards, "comma list of a:b weight pairs");
    abl->add_option("--epsilons", ab.epsilons, "comma list of clip widths");
    abl->add_option("--sft-epochs", ab.sft_epochs, "supervised epochs per episode");
    abl->add_option("--rft-epochs", ab.rft_epochs, "surrogate epochs per episode");
    abl->add_option("--budget", ab.budget, "fraction of the epoch budget");
    abl->add_option("--lr", ab.lr, "fine-tuning learning rate");
    abl->add_option("--batch", ab.batch, "fine-tuning batch size");
    abl->add_flag("--head-only", ab.head_only, "freeze the body, train the head");
    abl->add_option("--n-way", ab.n_way, "classes per episode");
    abl->add_option("--m-shot", ab.m_shot, "support clouds per class");
    abl->add_option("--q-size", ab.q_size, "query clouds per class");
    abl->add_option("--episodes", ab.episodes, "episodes per cell");
    abl->add_option("--classes", ab.classes, "evaluate on auto, new, base or all classes")
        ->check(CLI::IsMember({"auto", "new", "base", "all"}));
    abl->add_option("--seed", ab.seed, "master seed")->envname("PRFT_SEED");
    abl->add_option("--parallel", ab.parallel, "worker threads over episodes");
    abl->add_option("--timing", ab.timing, "live or off wall-clock reporting")
        ->check(CLI::IsMember({"live", "off"}));
    abl->add_option("--out-csv", ab.out_csv, "sweep CSV path");
    abl->add_option("--record", ab.record, "write a run record JSON here");
    abl->add_option("--config", ab.config, "JSON config file");

    ReportOpts rp;
    auto* rep = app.add_subcommand("report", "re-emit a results CSV and draw the chart");
    rep->add_option("--in", rp.in, "results CSV path")->required();
    rep->add_option("--out-csv", rp.out_csv, "round-tripped CSV path");
    rep->add_option("--out-svg", rp.out_svg, "bar chart path");

    gen->callback([&] {
        const nlohmann::json cfg = load_config_json(gd.config);
        take(gen, "--classes", cfg, "classes", gd.classes);
        take(gen, "--per-class", cfg, "per_class", gd.per_class);
        take(gen, "--points", cfg, "points", gd.points);
        take(gen, "--regime", cfg, "regime", gd.regime);
        take(gen, "--seed", cfg, "seed", gd.seed);
        take(gen, "--out", cfg, "out", gd.out);
        run_gen_data(gd);
    });

    pre->callback([&] {
        const nlohmann::json cfg = load_config_json(pt.config);
        take(pre, "--epochs", cfg, "epochs", pt.epochs);
        take(pre, "--lr", cfg, "lr", pt.lr);
        take(pre, "--batch", cfg, "batch", pt.batch);
        take(pre, "--h1", cfg, "h1", pt.h1);
        take(pre, "--h2", cfg, "h2", pt.h2);
        take(pre, "--holdout", cfg, "holdout", pt.holdout);
        take(pre, "--base-classes", cfg, "base_classes", pt.base_classes);
        take(pre, "--seed", cfg, "seed", pt.seed);
        take(pre, "--timing", cfg, "timing", pt.timing);
        const nlohmann::json resolved = {
            {"data", pt.data},         {"out", pt.out},
            {"epochs", pt.epochs},     {"lr", pt.lr},
            {"batch", pt.batch},       {"h1", pt.h1},
            {"h2", pt.h2},             {"holdout", pt.holdout},
            {"base_classes", pt.base_classes},
            {"seed", pt.seed},         {"timing", pt.timing},
        };
        run_pretrain(pt, cmdline, resolved);
    });

    few->callback([&] {
        const nlohmann::json cfg = load_config_json(fs.config);
        take(few, "--paradigm", cfg, "paradigm", fs.paradigm);
        take(few, "--n-way", cfg, "n_way", fs.n_way);
        take(few, "--m-shot", cfg, "m_shot", fs.m_shot);
        take(few, "--q-size", cfg, "q_size", fs.q_size);
        take(few, "--episodes", cfg, "episodes", fs.episodes);
        take(few, "--first-episode", cfg, "first_episode", fs.first_episode);
        take(few, "--sft-epochs", cfg, "sft_epochs", fs.sft_epochs);
        take(few, "--rft-epochs", cfg, "rft_epochs", fs.rft_epochs);
        take(few, "--budget", cfg, "budget", fs.budget);
        take(few, "--lr", cfg, "lr", fs.lr);
        take(few, "--a", cfg, "a", fs.a);
        take(few, "--b", cfg, "b", fs.b);
        take(few, "--epsilon", cfg, "epsilon", fs.epsilon);
        take(few, "--batch", cfg, "batch", fs.batch);
        take(few, "--head-only", cfg, "head_only", fs.head_only);
        take(few, "--classes", cfg, "classes", fs.classes);
        take(few, "--seed", cfg, "seed", fs.seed);
        take(few, "--parallel", cfg, "parallel", fs.parallel);
        take(few, "--timing", cfg, "timing", fs.timing);
        const nlohmann::json resolved = {
            {"ckpt", fs.ckpt},           {"data", fs.data},
            {"paradigm", fs.paradigm},   {"n_way", fs.n_way},
            {"m_shot", fs.m_shot},       {"q_size", fs.q_size},
            {"episodes", fs.episodes},   {"first_episode", fs.first_episode},
            {"sft_epochs", fs.sft_epochs}, {"rft_epochs", fs.rft_epochs},
            {"budget", fs.budget},       {"lr", fs.lr},
            {"a", fs.a},                 {"b", fs.b},
            {"epsilon", fs.epsilon},     {"batch", fs.batch},
            {"head_only", fs.head_only}, {"classes", fs.classes},
            {"seed", fs.seed},           {"parallel", fs.parallel},
            {"timing", fs.timing},       {"out_csv", fs.out_csv},
            {"out_json", fs.out_json},
        };
        run_fewshot(fs, cmdline, resolved);
    });

    abl->callback([&] {
        const nlohmann::json cfg = load_config_json(ab.config);
        take(abl, "--paradigm", cfg, "paradigm", ab.paradigm);
        take(abl, "--rewards", cfg, "rewards", ab.rewards);
        take(abl, "--epsilons", cfg, "epsilons", ab.epsilons);
        take(abl, "--sft-epochs", cfg, "sft_epochs", ab.sft_epochs);
        take(abl, "--rft-epochs", cfg, "rft_epochs", ab.rft_epochs);
        take(abl, "--budget", cfg, "budget", ab.budget);
        take(abl, "--lr", cfg, "lr", ab.lr);
        take(abl, "--batch", cfg, "batch", ab.batch);
        take(abl, "--head-only", cfg, "head_only", ab.head_only);
        take(abl, "--n-way", cfg, "n_way", ab.n_way);
        take(abl, "--m-shot", cfg, "m_shot", ab.m_shot);
        take(abl, "--q-size", cfg, "q_size", ab.q_size);
        take(abl, "--episodes", cfg, "episodes", ab.episodes);
        take(abl, "--classes", cfg, "classes", ab.classes);
        take(abl, "--seed", cfg, "seed", ab.seed);
        take(abl, "--parallel", cfg, "parallel", ab.parallel);
        take(abl, "--timing", cfg, "timing", ab.timing);
        const nlohmann::json resolved = {
            {"ckpt", ab.ckpt},         {"data", ab.data},
            {"paradigm", ab.paradigm}, {"rewards", ab.rewards},
            {"epsilons", ab.epsilons}, {"sft_epochs", ab.sft_epochs},
            {"rft_epochs", ab.rft_epochs}, {"budget", ab.budget},
            {"lr", ab.lr},             {"batch", ab.batch},
            {"head_only", ab.head_only}, {"n_way", ab.n_way},
            {"m_shot", ab.m_shot},     {"q_size", ab.q_size},
            {"episodes", ab.episodes}, {"classes", ab.classes},
            {"seed", ab.seed},         {"parallel", ab.parallel},
            {"timing", ab.timing},     {"out_csv", ab.out_csv},
        };
        run_ablate(ab, cmdline, resolved);
    });

    rep->callback([&] { run_report(rp); });

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e); // prints help or the parse error
        return code == 0 ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
