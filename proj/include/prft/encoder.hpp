#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "prft/tensor.hpp"

namespace prft {

// One point cloud: n points, xyz interleaved row-major.
struct PointCloud {
    std::vector<double> xyz;
    int label = -1;

    std::size_t size() const { return xyz.size() / 3; }
    double x(std::size_t i) const { return xyz[3 * i]; }
    double y(std::size_t i) const { return xyz[3 * i + 1]; }
    double z(std::size_t i) const { return xyz[3 * i + 2]; }
};

// Center on the centroid and scale the furthest point onto the unit sphere.
// A cloud with zero extent (all points identical) is returned centered but
// unscaled, with *degenerate set when the caller asks.
PointCloud normalize_cloud(const PointCloud& pc, bool* degenerate = nullptr);

// Shared feature extractor: per-point MLP 3 -> h1 -> h2 with relu, then a
// max-pool over points. Weights live here so a classification head can be
// swapped per episode while the body is reused.
struct EncoderBody {
    Tensor w1, b1; // [3,h1], [h1]
    Tensor w2, b2; // [h1,h2], [h2]

    std::size_t h1() const { return w1.shape[1]; }
    std::size_t h2() const { return w2.shape[1]; }
};

struct EncoderParams {
    EncoderBody body;
    Tensor head_w, head_b; // [h2,c], [c]

    std::size_t num_classes() const { return head_w.shape[1]; }
    std::vector<Tensor*> all();
    std::vector<Tensor*> head();
    void zero_grad();
};

EncoderBody init_body(std::uint64_t seed, std::size_t h1, std::size_t h2);

// Fresh head on a copied body. The head is the only part that depends on the
// class count, so per-episode heads stay cheap.
EncoderParams with_head(const EncoderBody& body, std::size_t num_classes,
                        std::uint64_t seed);

EncoderParams init_params(std::uint64_t seed, std::size_t h1, std::size_t h2,
                          std::size_t num_classes);

// Value-only deep copies for old-policy snapshots.
EncoderBody clone_body(const EncoderBody& b);
EncoderParams snapshot(const EncoderParams& p);

// Leaf handles for one recorded minibatch. When train_body is false the body
// enters the tape as constants and only the head receives gradients.
struct ParamVars {
    Var w1, b1, w2, b2, head_w, head_b;
};

ParamVars record_params(Tape& tape, EncoderParams& p, bool train_body = true);

// Forward pass for one (already normalized) cloud, returning [1,c] logits on
// the tape. The cloud must be nonempty.
Var classify(Tape& tape, const ParamVars& vars, const PointCloud& pc);

// Plain inference on a throwaway tape; bitwise-identical to the tape path.
std::vector<double> classify_logits(const EncoderParams& p, const PointCloud& pc);
std::vector<double> classify_probs(const EncoderParams& p, const PointCloud& pc);
int predict(const EncoderParams& p, const PointCloud& pc); // argmax, ties -> lowest

// --- named-tensor container -------------------------------------------------
// Binary container: magic "PRFTCKPT", a version byte, then for each tensor a
// length-prefixed name, rank, dims and little-endian float64 payload.
// save/load round-trips are bitwise.

void save_tensors(const std::string& path,
                  const std::vector<std::pair<std::string, const Tensor*>>& tensors);
std::vector<std::pair<std::string, Tensor>> load_tensors(const std::string& path);

} // namespace prft
