#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "prft/report.hpp"
#include "prft/rng.hpp"
#include "prft/shapes.hpp"
#include "prft/sweep.hpp"

using namespace prft;

TEST_CASE("format_double round-trips exactly") {
    Rng rng(12);
    for (int i = 0; i < 200; ++i) {
        double expo = static_cast<double>(rng.uniform_int(25)) - 12.0;
        double v = (rng.uniform01() - 0.5) * std::pow(10.0, expo);
        CHECK(parse_double(format_double(v)) == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(parse_double("1e-3") == 1e-3);
    CHECK_THROWS_AS(parse_double("1.5x"), std::invalid_argument);
    CHECK_THROWS_AS(parse_double(""), std::invalid_argument);
}

TEST_CASE("the analytic MAC count matches the layer-by-layer sum") {
    // 256 points through 3->64->128 with a 5-class head
    CHECK(flops_estimate(256, 64, 128, 5) == 2146944);
    // linear in batch and in the per-point stage
    CHECK(flops_estimate(256, 64, 128, 5, 2) == 2 * 2146944ULL);
    CHECK(flops_estimate(256, 64, 128, 5, 7) == 7 * 2146944ULL);
    const std::uint64_t head = 128 * 5;
    const std::uint64_t one = flops_estimate(1, 64, 128, 5);
    CHECK(flops_estimate(512, 64, 128, 5) - head == 512 * (one - head));
    // backward doubles the count
    CHECK(flops_estimate(256, 64, 128, 5, 1, true) == 2 * 2146944ULL);
    CHECK(flops_estimate(256, 64, 128, 5, 3, true) == 6 * 2146944ULL);
}

TEST_CASE("file hashing is content-determined") {
    const std::string p1 = "hash_a.tmp", p2 = "hash_b.tmp";
    std::ofstream(p1, std::ios::binary) << "hello";
    std::ofstream(p2, std::ios::binary) << "hello";
    CHECK(hash_file(p1) == hash_file(p2));
    CHECK(hash_file(p1) == fnv1a64("hello"));
    std::ofstream(p2, std::ios::binary) << "hellp";
    CHECK(hash_file(p1) != hash_file(p2));
    std::remove(p1.c_str());
    std::remove(p2.c_str());
    CHECK_THROWS_AS(hash_file(p1), std::runtime_error);
    CHECK(hash_hex(0) == "0000000000000000");
    CHECK(hash_hex(0xdeadbeefULL) == "00000000deadbeef");
}

namespace {

std::vector<ResultRow> sample_rows() {
    ResultRow r1;
    r1.paradigm = "pre-s";
    r1.n_way = 5;
    r1.m_shot = 1;
    r1.q_size = 20;
    r1.episodes = 700;
    r1.mean_acc = 0.6431428571428571;
    r1.std_acc = 0.1073;
    r1.seed = 7;
    r1.wall_s = 12.52;
    r1.gmacs = 2.146944;
    ResultRow r2 = r1;
    r2.paradigm = "pre-s-r";
    r2.mean_acc = 0.6792857142857143;
    r2.b = 2.0;
    ResultRow r3 = r1;
    r3.paradigm = "pre-r";
    r3.m_shot = 5;
    r3.mean_acc = 0.71;
    r3.std_acc = 0.0921;
    return {r1, r2, r3};
}

} // namespace

TEST_CASE("results CSV round-trips without loss") {
    auto rows = sample_rows();
    std::string csv = results_csv(rows);
    auto back = parse_results_csv(csv);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(back[i] == rows[i]);
    // and emit(parse(emit)) is a fixed point
    CHECK(results_csv(back) == csv);

    // header shape
    CHECK(csv.substr(0, csv.find('\n')) ==
          "paradigm,a,b,epsilon,budget,regime,n_way,m_shot,q_size,episodes,"
          "mean_acc,std_acc,seed,wall_s,gmacs");
}

TEST_CASE("results CSV parsing rejects malformed input") {
    CHECK_THROWS_AS(parse_results_csv("nope\n"), std::invalid_argument);
    std::string csv = results_csv(sample_rows());
    CHECK_THROWS_AS(parse_results_csv(csv + "pre-s,1,2\n"), std::invalid_argument);
    std::string bad = csv;
    bad.replace(bad.find("0.6431428571428571"), 18, "zero.six-ish______");
    CHECK_THROWS_AS(parse_results_csv(bad), std::invalid_argument);
    // a paradigm name with a comma cannot be emitted
    ResultRow r;
    r.paradigm = "pre,s";
    std::vector<ResultRow> rows{r};
    CHECK_THROWS_AS(results_csv(rows), std::invalid_argument);
}

TEST_CASE("the chart is deterministic and counts bars correctly") {
    auto rows = sample_rows();
    std::string svg1 = bar_chart_svg(rows);
    std::string svg2 = bar_chart_svg(rows);
    CHECK(svg1 == svg2);

    // 3 rows -> 3 bars, 2 distinct settings -> 2 group labels
    std::size_t bars = 0, pos = 0;
    while ((pos = svg1.find("<rect", pos)) != std::string::npos) {
        ++bars;
        pos += 5;
    }
    CHECK(bars == 3);
    CHECK(svg1.find("5-way 1-shot") != std::string::npos);
    CHECK(svg1.find("5-way 5-shot") != std::string::npos);
    CHECK(svg1.find("<svg xmlns") == 0);

    // single row draws a single bar
    std::vector<ResultRow> one{rows[0]};
    std::string svg3 = bar_chart_svg(one);
    CHECK(svg3.find("<rect") != std::string::npos);
    CHECK(svg3.find("<rect") == svg3.rfind("<rect"));

    std::vector<ResultRow> none;
    CHECK_THROWS_AS(bar_chart_svg(none), std::invalid_argument);
}

TEST_CASE("run records serialize with every reproduction ingredient") {
    RunRecord rec;
    rec.command = "prft fewshot --seed 7";
    rec.config = {{"n_way", 5}, {"m_shot", 1}};
    rec.seed = 7;
    rec.input_hashes.emplace_back("data.prftpc", hash_hex(0xabcd));
    EpochStats s;
    s.epoch = 0;
    s.mean_loss = 1.5;
    s.mean_reward = 0.25;
    rec.epochs.push_back(s);
    rec.results = sample_rows();
    rec.wall_phases.emplace_back("fewshot", 12.5);
    rec.macs_per_epoch = flops_estimate(256, 64, 128, 5, 32, true);

    nlohmann::json j = run_record_json(rec);
    CHECK(j.at("command") == "prft fewshot --seed 7");
    CHECK(j.at("seed") == 7);
    CHECK(j.at("config").at("n_way") == 5);
    CHECK(j.at("input_hashes")[0].at("path") == "data.prftpc");
    CHECK(j.at("epochs").size() == 1);
    CHECK(j.at("epochs")[0].at("mean_reward") == 0.25);
    CHECK(j.at("results").size() == 3);
    CHECK(j.at("results")[0].at("mean_acc") == 0.6431428571428571);
    CHECK(j.at("wall_phases")[0].at("wall_s") == 12.5);
    CHECK(j.at("macs_per_epoch") == 2 * 32 * 2146944ULL);

    // identical records dump to identical bytes
    CHECK(j.dump(2) == run_record_json(rec).dump(2));
}

TEST_CASE("grid construction crosses rewards with clip widths") {
    const std::pair<double, double> rewards[] = {{1.0, 0.0}, {1.0, 2.0}};
    const double eps[] = {0.2, 0.3, 0.5};
    auto cells = make_grid(rewards, eps);
    REQUIRE(cells.size() == 6);
    CHECK(cells[0].a == 1.0);
    CHECK(cells[0].b == 0.0);
    CHECK(cells[0].epsilon == 0.2);
    CHECK(cells[2].epsilon == 0.5);
    CHECK(cells[3].b == 2.0);
    CHECK(cells[3].epsilon == 0.2);

    auto def = default_ablation_grid();
    REQUIRE(def.size() == 3);
    CHECK(def[0].b == 0.0);
    CHECK(def[1].b == 1.0);
    CHECK(def[2].b == 2.0);
    for (const auto& c : def) {
        CHECK(c.a == 1.0);
        CHECK(c.epsilon == 0.2);
    }

    CHECK_THROWS_AS(make_grid({}, eps), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(rewards, {}), std::invalid_argument);
}

TEST_CASE("the ablation sweep pairs episodes across cells") {
    Dataset ds = generate_dataset(default_specs(5, "clean"), 8, 24, 99);
    PretrainConfig pc;
    pc.epochs = 6;
    pc.lr = 5e-3;
    pc.h1 = 8;
    pc.h2 = 12;
    pc.batch_size = 8;
    pc.seed = 2;
    Checkpoint ckpt = pretrain(view_of(ds), pc);

    ParadigmConfig base;
    base.kind = ParadigmKind::PreR;
    base.rft_epochs = 2;
    base.batch_size = 4;
    base.seed = 5;

    EvalConfig ev;
    ev.n_way = 3;
    ev.m_shot = 2;
    ev.q_size = 4;
    ev.n_episodes = 4;
    ev.seed = 31;

    auto rows = ablation_sweep(ckpt, ds, base, ev, default_ablation_grid());
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
        CHECK(r.kind == ParadigmKind::PreR);
        CHECK(r.result.episodes == 4);
        CHECK(r.seed == 31);
        CHECK(r.n_way == 3);
        CHECK(r.m_shot == 2);
    }
    // same grid twice gives identical numbers (paired seeds, no shared state)
    auto rows2 = ablation_sweep(ckpt, ds, base, ev, default_ablation_grid());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].result.accuracies == rows2[i].result.accuracies);
    }

    std::string csv = sweep_csv(rows);
    CHECK(csv.substr(0, csv.find('\n')) ==
          "paradigm,a,b,epsilon,budget,N,M,mean_acc,std_acc,episodes,seed");
    // header + 3 rows
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(csv.find("pre-r,1,0,0.2,1,3,2,") != std::string::npos);

    std::vector<SweepCell> empty;
    CHECK_THROWS_AS(ablation_sweep(ckpt, ds, base, ev, empty), std::invalid_argument);
}
