#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "prft/episodes.hpp"
#include "prft/rft_loss.hpp"

namespace prft {

// Shortest decimal that round-trips the exact double (to_chars); parse is the
// strict inverse and rejects trailing junk.
std::string format_double(double v);
double parse_double(std::string_view s);

// Analytic multiply-accumulate count for one cloud through the classifier:
// per-point layers n_points*(3*h1 + h1*h2) plus the pooled head h2*c.
// with_backward doubles it, batch scales it. Pure arithmetic, no validation:
// dimension checking belongs to the encoder itself.
std::uint64_t flops_estimate(std::size_t n_points, std::size_t h1, std::size_t h2,
                             std::size_t c, std::size_t batch = 1,
                             bool with_backward = false);

// fnv1a64 over the raw bytes of a file.
std::uint64_t hash_file(const std::string& path);
std::string hash_hex(std::uint64_t h);

// One line of the results table.
struct ResultRow {
    std::string paradigm;
    double a = 1.0;
    double b = 2.0;
    double epsilon = 0.2;
    double budget = 1.0;
    std::string regime = "clean";
    std::size_t n_way = 0;
    std::size_t m_shot = 0;
    std::size_t q_size = 0;
    std::size_t episodes = 0;
    double mean_acc = 0.0;
    double std_acc = 0.0;
    std::uint64_t seed = 0;
    double wall_s = 0.0;
    double gmacs = 0.0;

    bool operator==(const ResultRow&) const = default;
};

// 15-column CSV, header included: paradigm,a,b,epsilon,budget,regime,n_way,
// m_shot,q_size,episodes,mean_acc,std_acc,seed,wall_s,gmacs.
// parse(emit(rows)) == rows exactly, doubles included.
std::string results_csv(std::span<const ResultRow> rows);
std::vector<ResultRow> parse_results_csv(const std::string& text);

// Grouped bar chart of mean_acc with std_acc error bars: one group per
// (n_way, m_shot) setting in first-appearance order, one bar per row inside
// its group. Identical input gives identical bytes.
std::string bar_chart_svg(std::span<const ResultRow> rows);

// Everything needed to rerun and cross-check a CLI invocation.
struct RunRecord {
    std::string command;
    nlohmann::json config; // resolved values after flag/file/default merge
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> input_hashes; // path, hex
    std::vector<EpochStats> epochs;
    std::vector<ResultRow> results;
    std::vector<FewShotResult> fewshot_results; // parallel to results when episodic
    std::vector<std::pair<std::string, double>> wall_phases; // name, seconds
    std::uint64_t macs_per_epoch = 0; // forward+backward estimate
};

nlohmann::json run_record_json(const RunRecord& rec);

// Zero every wall-clock field so outputs are byte-stable across runs.
void scrub_wall_times(RunRecord& rec);

} // namespace prft
