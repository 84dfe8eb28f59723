#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "prft/encoder.hpp"
#include "prft/rng.hpp"

namespace prft {

// The twelve synthetic primitives. Order is the canonical class order.
enum class ShapeKind {
    Sphere,
    Cube,
    Cylinder,
    Cone,
    Torus,
    Pyramid,
    Ellipsoid,
    Capsule,
    Disk,
    Helix,
    Cross,
    LBracket,
};

inline constexpr int kNumShapeKinds = 12;

const char* shape_name(ShapeKind kind);
ShapeKind shape_kind_from_name(const std::string& name);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool operator==(const Interval&) const = default;
};

// Corruption applied after sampling: drop points behind a random half-space
// (refilled by duplicating survivors so the count is preserved), replace a
// fraction with uniform outliers, and scale anisotropically.
struct CorruptionProfile {
    double occlusion_fraction = 0.0; // in [0,1)
    double outlier_fraction = 0.0;   // in [0,1)
    Interval scale{1.0, 1.0};        // per-axis scale range

    bool is_identity() const;
    bool operator==(const CorruptionProfile&) const = default;
};

// Recipe for one class: which primitive, its shape-parameter ranges, the
// jitter level and the corruption profile stamped onto generated clouds.
struct ShapeSpec {
    ShapeKind kind = ShapeKind::Sphere;
    std::vector<Interval> param_ranges; // per-kind meaning, may be empty for defaults
    double jitter_sigma = 0.0;
    CorruptionProfile profile;
};

// One spec per class in canonical order, configured for the named regime
// ("clean" or "corrupted").
std::vector<ShapeSpec> default_specs(int n_classes, const std::string& regime);

// Uniform surface sampling of the primitive, then Gaussian jitter. All
// randomness comes from `rng`.
PointCloud generate_cloud(const ShapeSpec& spec, std::size_t n_points, Rng& rng);

// Corruption only; point count is preserved exactly, and the outlier count
// is round(fraction * n).
PointCloud corrupt_cloud(const PointCloud& pc, const CorruptionProfile& profile, Rng& rng);

struct DatasetManifest {
    std::uint64_t seed = 0;
    std::size_t per_class = 0;
    std::size_t n_points = 0;
    std::string regime = "clean";
    std::vector<ShapeSpec> specs;
};

struct Dataset {
    std::vector<PointCloud> clouds;
    std::vector<std::string> class_names;
    DatasetManifest manifest;

    std::size_t num_classes() const { return class_names.size(); }
    // indices of the clouds of each class
    std::vector<std::vector<std::size_t>> by_class() const;
};

// Deterministic in (specs, per_class, n_points, seed): each cloud draws from
// its own derived seed, so generation order cannot leak into the data.
Dataset generate_dataset(const std::vector<ShapeSpec>& specs, std::size_t per_class,
                         std::size_t n_points, std::uint64_t seed,
                         const std::string& regime = "clean");

// Text container, plus a JSON manifest sidecar at <path>.manifest.json.
// save/load round-trips coordinates and labels bitwise.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

nlohmann::json manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& j);

} // namespace prft
