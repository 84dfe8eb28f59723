#include "prft/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "prft/rng.hpp"

namespace prft {

std::string format_double(double v) {
    std::array<char, 32> buf;
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw std::runtime_error("format_double: buffer too small");
    return std::string(buf.data(), end);
}

double parse_double(std::string_view s) {
    double v = 0.0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) {
        throw std::invalid_argument("parse_double: bad number '" + std::string(s) + "'");
    }
    return v;
}

std::uint64_t flops_estimate(std::size_t n_points, std::size_t h1, std::size_t h2,
                             std::size_t c, std::size_t batch, bool with_backward) {
    const std::uint64_t per_point = 3ULL * h1 + static_cast<std::uint64_t>(h1) * h2;
    std::uint64_t macs = n_points * per_point + static_cast<std::uint64_t>(h2) * c;
    if (with_backward) macs *= 2;
    return macs * batch;
}

std::uint64_t hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("hash_file: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return fnv1a64(ss.str());
}

std::string hash_hex(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

namespace {

const char* kResultsHeader =
    "paradigm,a,b,epsilon,budget,regime,n_way,m_shot,q_size,episodes,"
    "mean_acc,std_acc,seed,wall_s,gmacs";

void check_csv_token(const std::string& s, const char* what) {
    if (s.find(',') != std::string::npos || s.find('\n') != std::string::npos) {
        throw std::invalid_argument(std::string("results_csv: ") + what +
                                    " contains a separator: '" + s + "'");
    }
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::size_t parse_size(const std::string& s, const char* what) {
    std::size_t v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) {
        throw std::invalid_argument(std::string("results_csv: bad ") + what + " '" + s + "'");
    }
    return v;
}

} // namespace

std::string results_csv(std::span<const ResultRow> rows) {
    std::string out = kResultsHeader;
    out += '\n';
    for (const ResultRow& r : rows) {
        check_csv_token(r.paradigm, "paradigm");
        check_csv_token(r.regime, "regime");
        out += r.paradigm;
        out += ',';
        out += format_double(r.a);
        out += ',';
        out += format_double(r.b);
        out += ',';
        out += format_double(r.epsilon);
        out += ',';
        out += format_double(r.budget);
        out += ',';
        out += r.regime;
        out += ',';
        out += std::to_string(r.n_way);
        out += ',';
        out += std::to_string(r.m_shot);
        out += ',';
        out += std::to_string(r.q_size);
        out += ',';
        out += std::to_string(r.episodes);
        out += ',';
        out += format_double(r.mean_acc);
        out += ',';
        out += format_double(r.std_acc);
        out += ',';
        out += std::to_string(r.seed);
        out += ',';
        out += format_double(r.wall_s);
        out += ',';
        out += format_double(r.gmacs);
        out += '\n';
    }
    return out;
}

std::vector<ResultRow> parse_results_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kResultsHeader) {
        throw std::invalid_argument("results_csv: missing or mismatched header");
    }
    std::vector<ResultRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_fields(line);
        if (f.size() != 15) {
            throw std::invalid_argument("results_csv: line " + std::to_string(lineno) +
                                        " has " + std::to_string(f.size()) +
                                        " fields, want 15");
        }
        ResultRow r;
        r.paradigm = f[0];
        r.a = parse_double(f[1]);
        r.b = parse_double(f[2]);
        r.epsilon = parse_double(f[3]);
        r.budget = parse_double(f[4]);
        r.regime = f[5];
        r.n_way = parse_size(f[6], "n_way");
        r.m_shot = parse_size(f[7], "m_shot");
        r.q_size = parse_size(f[8], "q_size");
        r.episodes = parse_size(f[9], "episodes");
        r.mean_acc = parse_double(f[10]);
        r.std_acc = parse_double(f[11]);
        r.seed = parse_size(f[12], "seed");
        r.wall_s = parse_double(f[13]);
        r.gmacs = parse_double(f[14]);
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

// fixed palette cycled by paradigm first-appearance order
const char* kBarColors[] = {"#4878a8", "#e49444", "#5ca05c", "#c05555", "#8268a8", "#937860"};

std::string px(double v) {
    // one decimal is plenty for layout and keeps the file readable
    double r = static_cast<double>(static_cast<long long>(v * 10.0 + (v >= 0 ? 0.5 : -0.5))) / 10.0;
    std::string s = format_double(r);
    return s;
}

} // namespace

std::string bar_chart_svg(std::span<const ResultRow> rows) {
    if (rows.empty()) throw std::invalid_argument("bar_chart_svg: no rows");

    // group rows by few-shot setting, first appearance wins the order
    struct Group {
        std::string label;
        std::vector<std::size_t> members;
    };
    std::vector<Group> groups;
    std::vector<std::string> paradigms; // distinct, first-appearance order
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::string key = std::to_string(rows[i].n_way) + "-way " +
                          std::to_string(rows[i].m_shot) + "-shot";
        auto git = std::find_if(groups.begin(), groups.end(),
                                [&](const Group& g) { return g.label == key; });
        if (git == groups.end()) {
            groups.push_back({key, {i}});
        } else {
            git->members.push_back(i);
        }
        if (std::find(paradigms.begin(), paradigms.end(), rows[i].paradigm) ==
            paradigms.end()) {
            paradigms.push_back(rows[i].paradigm);
        }
    }

    const double bar_w = 34.0, bar_gap = 6.0, group_gap = 28.0;
    const double left = 56.0, top = 24.0, plot_h = 220.0, bottom = 58.0;
    double x = left;
    std::vector<double> group_x0;
    std::vector<double> bar_x; // by row index order of traversal
    bar_x.resize(rows.size());
    for (const Group& g : groups) {
        group_x0.push_back(x);
        for (std::size_t m : g.members) {
            bar_x[m] = x;
            x += bar_w + bar_gap;
        }
        x += group_gap - bar_gap;
    }
    const double width = x - group_gap + group_gap / 2.0 + 16.0;
    const double height = top + plot_h + bottom;
    auto ybase = top + plot_h;
    auto yat = [&](double acc) { return ybase - acc * plot_h; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(width) +
           "\" height=\"" + px(height) + "\" viewBox=\"0 0 " + px(width) + " " +
           px(height) + "\">\n";
    svg += "<style>text{font-family:sans-serif;font-size:11px;fill:#333}"
           ".axis{stroke:#888;stroke-width:1}.grid{stroke:#ddd;stroke-width:1}"
           ".err{stroke:#222;stroke-width:1.5}</style>\n";

    // gridlines and y labels at 0, .25, .5, .75, 1
    for (int i = 0; i <= 4; ++i) {
        double acc = 0.25 * i;
        double y = yat(acc);
        svg += "<line class=\"grid\" x1=\"" + px(left) + "\" y1=\"" + px(y) +
               "\" x2=\"" + px(width - 8) + "\" y2=\"" + px(y) + "\"/>\n";
        svg += "<text x=\"" + px(left - 8) + "\" y=\"" + px(y + 4) +
               "\" text-anchor=\"end\">" + format_double(acc) + "</text>\n";
    }

    // bars with error whiskers
    for (const Group& g : groups) {
        for (std::size_t m : g.members) {
            const ResultRow& r = rows[m];
            std::size_t color_idx = 0;
            for (std::size_t p = 0; p < paradigms.size(); ++p) {
                if (paradigms[p] == r.paradigm) color_idx = p % 6;
            }
            double bx = bar_x[m];
            double ytop = yat(r.mean_acc);
            svg += "<rect x=\"" + px(bx) + "\" y=\"" + px(ytop) + "\" width=\"" +
                   px(bar_w) + "\" height=\"" + px(ybase - ytop) + "\" fill=\"" +
                   kBarColors[color_idx] + "\"/>\n";
            double lo = yat(std::max(0.0, r.mean_acc - r.std_acc));
            double hi = yat(std::min(1.0, r.mean_acc + r.std_acc));
            double cx = bx + bar_w / 2.0;
            svg += "<line class=\"err\" x1=\"" + px(cx) + "\" y1=\"" + px(lo) +
                   "\" x2=\"" + px(cx) + "\" y2=\"" + px(hi) + "\"/>\n";
            svg += "<line class=\"err\" x1=\"" + px(cx - 5) + "\" y1=\"" + px(lo) +
                   "\" x2=\"" + px(cx + 5) + "\" y2=\"" + px(lo) + "\"/>\n";
            svg += "<line class=\"err\" x1=\"" + px(cx - 5) + "\" y1=\"" + px(hi) +
                   "\" x2=\"" + px(cx + 5) + "\" y2=\"" + px(hi) + "\"/>\n";
            // paradigm label rotated under the bar
            svg += "<text x=\"" + px(cx) + "\" y=\"" + px(ybase + 12) +
                   "\" text-anchor=\"middle\">" + r.paradigm + "</text>\n";
        }
    }

    // group labels and baseline
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        double gx0 = group_x0[gi];
        double gw = static_cast<double>(groups[gi].members.size()) * (bar_w + bar_gap) -
                    bar_gap;
        svg += "<text x=\"" + px(gx0 + gw / 2.0) + "\" y=\"" + px(ybase + 30) +
               "\" text-anchor=\"middle\" font-weight=\"bold\">" + groups[gi].label +
               "</text>\n";
    }
    svg += "<line class=\"axis\" x1=\"" + px(left) + "\" y1=\"" + px(ybase) +
           "\" x2=\"" + px(width - 8) + "\" y2=\"" + px(ybase) + "\"/>\n";
    svg += "<line class=\"axis\" x1=\"" + px(left) + "\" y1=\"" + px(top - 8) +
           "\" x2=\"" + px(left) + "\" y2=\"" + px(ybase) + "\"/>\n";
    svg += "<text x=\"" + px(left) + "\" y=\"" + px(top - 12) + "\">accuracy</text>\n";
    svg += "</svg>\n";
    return svg;
}

nlohmann::json run_record_json(const RunRecord& rec) {
    nlohmann::json epochs = nlohmann::json::array();
    for (const EpochStats& s : rec.epochs) {
        epochs.push_back({
            {"epoch", s.epoch},
            {"mean_loss", s.mean_loss},
            {"mean_reward", s.mean_reward},
            {"clip_fraction", s.clip_fraction},
            {"wall_ms", s.wall_ms},
        });
    }
    nlohmann::json results = nlohmann::json::array();
    for (const ResultRow& r : rec.results) {
        results.push_back({
            {"paradigm", r.paradigm},
            {"a", r.a},
            {"b", r.b},
            {"epsilon", r.epsilon},
            {"budget", r.budget},
            {"regime", r.regime},
            {"n_way", r.n_way},
            {"m_shot", r.m_shot},
            {"q_size", r.q_size},
            {"episodes", r.episodes},
            {"mean_acc", r.mean_acc},
            {"std_acc", r.std_acc},
            {"seed", r.seed},
            {"wall_s", r.wall_s},
            {"gmacs", r.gmacs},
        });
    }
    nlohmann::json hashes = nlohmann::json::array();
    for (const auto& [path, hex] : rec.input_hashes) {
        hashes.push_back({{"path", path}, {"fnv1a64", hex}});
    }
    nlohmann::json phases = nlohmann::json::array();
    for (const auto& [name, seconds] : rec.wall_phases) {
        phases.push_back({{"phase", name}, {"wall_s", seconds}});
    }
    nlohmann::json fewshot = nlohmann::json::array();
    for (const FewShotResult& r : rec.fewshot_results) {
        fewshot.push_back({
            {"episodes", r.episodes},
            {"mean_accuracy", r.mean_accuracy},
            {"std_accuracy", r.std_accuracy},
            {"accuracies", r.accuracies},
        });
    }
    return {
        {"command", rec.command},
        {"config", rec.config},
        {"seed", rec.seed},
        {"input_hashes", hashes},
        {"epochs", epochs},
        {"results", results},
        {"fewshot_results", fewshot},
        {"wall_phases", phases},
        {"macs_per_epoch", rec.macs_per_epoch},
    };
}

void scrub_wall_times(RunRecord& rec) {
    for (EpochStats& s : rec.epochs) s.wall_ms = 0.0;
    for (ResultRow& r : rec.results) r.wall_s = 0.0;
    for (auto& [name, seconds] : rec.wall_phases) seconds = 0.0;
}

} // namespace prft
