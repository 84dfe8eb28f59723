#include "prft/encoder.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "prft/rng.hpp"

namespace prft {

PointCloud normalize_cloud(const PointCloud& pc, bool* degenerate) {
    const std::size_t n = pc.size();
    if (n == 0 || pc.xyz.size() != 3 * n) {
        throw std::invalid_argument("normalize_cloud: empty or malformed cloud");
    }
    PointCloud out = pc;
    double cx = 0, cy = 0, cz = 0;
    for (std::size_t i = 0; i < n; ++i) {
        cx += out.xyz[3 * i];
        cy += out.xyz[3 * i + 1];
        cz += out.xyz[3 * i + 2];
    }
    cx /= static_cast<double>(n);
    cy /= static_cast<double>(n);
    cz /= static_cast<double>(n);
    double rmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out.xyz[3 * i] -= cx;
        out.xyz[3 * i + 1] -= cy;
        out.xyz[3 * i + 2] -= cz;
        const double r = std::sqrt(out.xyz[3 * i] * out.xyz[3 * i] +
                                   out.xyz[3 * i + 1] * out.xyz[3 * i + 1] +
                                   out.xyz[3 * i + 2] * out.xyz[3 * i + 2]);
        rmax = std::max(rmax, r);
    }
    const bool degen = rmax < 1e-12;
    if (degenerate) *degenerate = degen;
    if (!degen) {
        for (auto& v : out.xyz) v /= rmax;
    }
    return out;
}

std::vector<Tensor*> EncoderParams::all() {
    return {&body.w1, &body.b1, &body.w2, &body.b2, &head_w, &head_b};
}

std::vector<Tensor*> EncoderParams::head() { return {&head_w, &head_b}; }

void EncoderParams::zero_grad() {
    for (Tensor* t : all()) t->zero_grad();
}

namespace {

Tensor gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols, double stddev) {
    Tensor t = Tensor::zeros({rows, cols});
    for (auto& v : t.data) v = rng.normal(0.0, stddev);
    return t;
}

} // namespace

EncoderBody init_body(std::uint64_t seed, std::size_t h1, std::size_t h2) {
    if (h1 == 0 || h2 == 0) throw std::invalid_argument("init_body: zero hidden width");
    Rng rng(seed);
    EncoderBody b;
    b.w1 = gaussian_matrix(rng, 3, h1, std::sqrt(2.0 / 3.0));
    b.b1 = Tensor::zeros({h1});
    b.w2 = gaussian_matrix(rng, h1, h2, std::sqrt(2.0 / static_cast<double>(h1)));
    b.b2 = Tensor::zeros({h2});
    return b;
}

EncoderParams with_head(const EncoderBody& body, std::size_t num_classes,
                        std::uint64_t seed) {
    if (num_classes < 2) {
        throw std::invalid_argument("with_head: need at least 2 classes, got " +
                                    std::to_string(num_classes));
    }
    Rng rng(seed);
    EncoderParams p;
    p.body = clone_body(body);
    p.head_w = gaussian_matrix(rng, body.h2(), num_classes,
                               1.0 / std::sqrt(static_cast<double>(body.h2())));
    p.head_b = Tensor::zeros({num_classes});
    return p;
}

EncoderParams init_params(std::uint64_t seed, std::size_t h1, std::size_t h2,
                          std::size_t num_classes) {
    EncoderBody body = init_body(derive_seed(seed, "body"), h1, h2);
    return with_head(body, num_classes, derive_seed(seed, "head"));
}

EncoderBody clone_body(const EncoderBody& b) {
    EncoderBody out;
    out.w1 = b.w1;
    out.b1 = b.b1;
    out.w2 = b.w2;
    out.b2 = b.b2;
    for (Tensor* t : {&out.w1, &out.b1, &out.w2, &out.b2}) t->grad.clear();
    return out;
}

EncoderParams snapshot(const EncoderParams& p) {
    EncoderParams out;
    out.body = clone_body(p.body);
    out.head_w = p.head_w;
    out.head_b = p.head_b;
    out.head_w.grad.clear();
    out.head_b.grad.clear();
    return out;
}

ParamVars record_params(Tape& tape, EncoderParams& p, bool train_body) {
    ParamVars v;
    if (train_body) {
        v.w1 = tape.leaf(p.body.w1);
        v.b1 = tape.leaf(p.body.b1);
        v.w2 = tape.leaf(p.body.w2);
        v.b2 = tape.leaf(p.body.b2);
    } else {
        v.w1 = tape.constant(p.body.w1);
        v.b1 = tape.constant(p.body.b1);
        v.w2 = tape.constant(p.body.w2);
        v.b2 = tape.constant(p.body.b2);
    }
    v.head_w = tape.leaf(p.head_w);
    v.head_b = tape.leaf(p.head_b);
    return v;
}

namespace {

ParamVars record_params_const(Tape& tape, const EncoderParams& p) {
    ParamVars v;
    v.w1 = tape.constant(p.body.w1);
    v.b1 = tape.constant(p.body.b1);
    v.w2 = tape.constant(p.body.w2);
    v.b2 = tape.constant(p.body.b2);
    v.head_w = tape.constant(p.head_w);
    v.head_b = tape.constant(p.head_b);
    return v;
}

} // namespace

Var classify(Tape& tape, const ParamVars& vars, const PointCloud& pc) {
    const std::size_t n = pc.size();
    if (n == 0 || pc.xyz.size() != 3 * n) {
        throw std::invalid_argument("classify: empty or malformed cloud");
    }
    Var pts = tape.constant(std::span<const double>(pc.xyz), {n, 3});
    Var a1 = relu(tape, add_rowvec(tape, matmul(tape, pts, vars.w1), vars.b1));
    Var a2 = relu(tape, add_rowvec(tape, matmul(tape, a1, vars.w2), vars.b2));
    Var pooled = max_over_points(tape, a2);
    return add_rowvec(tape, matmul(tape, pooled, vars.head_w), vars.head_b);
}

std::vector<double> classify_logits(const EncoderParams& p, const PointCloud& pc) {
    Tape tape;
    ParamVars vars = record_params_const(tape, p);
    return tape.value(classify(tape, vars, pc));
}

std::vector<double> classify_probs(const EncoderParams& p, const PointCloud& pc) {
    std::vector<double> logits = classify_logits(p, pc);
    std::vector<double> probs(logits.size());
    softmax_values(logits, probs);
    return probs;
}

int predict(const EncoderParams& p, const PointCloud& pc) {
    const auto logits = classify_logits(p, pc);
    std::size_t best = 0;
    for (std::size_t i = 1; i < logits.size(); ++i) {
        if (logits[i] > logits[best]) best = i;
    }
    return static_cast<int>(best);
}

// --- container I/O ------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'P', 'R', 'F', 'T', 'C', 'K', 'P', 'T'};
constexpr unsigned char kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double d) {
    put_u64(os, std::bit_cast<std::uint64_t>(d));
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw std::runtime_error("tensor container: truncated u32");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw std::runtime_error("tensor container: truncated u64");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

} // namespace

void save_tensors(const std::string& path,
                  const std::vector<std::pair<std::string, const Tensor*>>& tensors) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("save_tensors: cannot open " + path);
    os.write(kMagic, sizeof(kMagic));
    os.put(static_cast<char>(kVersion));
    for (const auto& [name, t] : tensors) {
        put_u32(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(os, static_cast<std::uint32_t>(t->shape.size()));
        for (std::size_t d : t->shape) put_u64(os, d);
        for (double v : t->data) put_f64(os, v);
    }
    if (!os) throw std::runtime_error("save_tensors: write failed for " + path);
}

std::vector<std::pair<std::string, Tensor>> load_tensors(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_tensors: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0) {
        throw std::runtime_error("load_tensors: " + path + " is not a tensor container");
    }
    const int version = is.get();
    if (version != kVersion) {
        throw std::runtime_error("load_tensors: unsupported container version " +
                                 std::to_string(version));
    }
    std::vector<std::pair<std::string, Tensor>> out;
    while (true) {
        is.peek();
        if (is.eof()) break;
        const std::uint32_t name_len = get_u32(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        if (!is) throw std::runtime_error("load_tensors: truncated name in " + path);
        const std::uint32_t rank = get_u32(is);
        if (rank == 0 || rank > 8) {
            throw std::runtime_error("load_tensors: implausible rank " + std::to_string(rank));
        }
        std::vector<std::size_t> shape(rank);
        std::size_t numel = 1;
        for (auto& d : shape) {
            d = static_cast<std::size_t>(get_u64(is));
            numel *= d;
        }
        Tensor t = Tensor::zeros(shape);
        for (std::size_t i = 0; i < numel; ++i) {
            t.data[i] = std::bit_cast<double>(get_u64(is));
        }
        out.emplace_back(std::move(name), std::move(t));
    }
    return out;
}

} // namespace prft
