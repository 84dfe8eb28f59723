#include "prft/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace prft {

namespace {

constexpr double kPi = 3.14159265358979323846;

const char* kShapeNames[kNumShapeKinds] = {
    "sphere", "cube", "cylinder", "cone", "torus", "pyramid",
    "ellipsoid", "capsule", "disk", "helix", "cross", "l_bracket",
};

// expected entry count of ShapeSpec::param_ranges per kind
constexpr std::size_t kParamCount[kNumShapeKinds] = {1, 1, 2, 2, 2, 2, 3, 2, 2, 4, 2, 3};

const std::vector<Interval>& default_ranges(ShapeKind kind) {
    static const std::vector<Interval> table[kNumShapeKinds] = {
        {{0.7, 1.0}},                                       // sphere: radius
        {{0.6, 0.9}},                                       // cube: half extent
        {{0.3, 0.5}, {1.0, 1.6}},                           // cylinder: radius, height
        {{0.4, 0.7}, {0.9, 1.4}},                           // cone: base radius, height
        {{0.6, 0.9}, {0.15, 0.3}},                          // torus: major, minor
        {{0.5, 0.8}, {0.8, 1.3}},                           // pyramid: base half side, height
        {{0.7, 1.0}, {0.4, 0.6}, {0.2, 0.35}},              // ellipsoid: semi-axes
        {{0.25, 0.4}, {0.8, 1.3}},                          // capsule: radius, cylinder height
        {{0.0, 0.2}, {0.7, 1.0}},                           // disk: inner, outer radius
        {{0.5, 0.7}, {2.0, 3.0}, {1.0, 1.5}, {0.08, 0.15}}, // helix: R, turns, height, tube r
        {{0.7, 1.0}, {0.15, 0.25}},                         // cross: arm half length, half width
        {{0.8, 1.2}, {0.3, 0.5}, {0.1, 0.2}},               // l_bracket: leg, width, thickness
    };
    return table[static_cast<int>(kind)];
}

struct Vec3 {
    double x = 0, y = 0, z = 0;
};

Vec3 sphere_dir(Rng& rng) {
    const double z = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {rho * std::cos(phi), rho * std::sin(phi), z};
}

// Uniform point on the surface of the box [lo, hi].
Vec3 box_surface(Rng& rng, const Vec3& lo, const Vec3& hi) {
    const double dx = hi.x - lo.x, dy = hi.y - lo.y, dz = hi.z - lo.z;
    const double axy = dx * dy, axz = dx * dz, ayz = dy * dz;
    const double total = 2.0 * (axy + axz + ayz);
    double u = rng.uniform(0.0, total);
    const double a = rng.uniform01();
    const double b = rng.uniform01();
    // z faces, then y faces, then x faces
    if (u < axy) return {lo.x + a * dx, lo.y + b * dy, lo.z};
    u -= axy;
    if (u < axy) return {lo.x + a * dx, lo.y + b * dy, hi.z};
    u -= axy;
    if (u < axz) return {lo.x + a * dx, lo.y, lo.z + b * dz};
    u -= axz;
    if (u < axz) return {lo.x + a * dx, hi.y, lo.z + b * dz};
    u -= axz;
    if (u < ayz) return {lo.x, lo.y + a * dy, lo.z + b * dz};
    return {hi.x, lo.y + a * dy, lo.z + b * dz};
}

bool strictly_inside(const Vec3& p, const Vec3& lo, const Vec3& hi) {
    return p.x > lo.x && p.x < hi.x && p.y > lo.y && p.y < hi.y && p.z > lo.z && p.z < hi.z;
}

double box_area(const Vec3& lo, const Vec3& hi) {
    const double dx = hi.x - lo.x, dy = hi.y - lo.y, dz = hi.z - lo.z;
    return 2.0 * (dx * dy + dx * dz + dy * dz);
}

// Surface of a union of boxes: pick one by area, reject interior points.
Vec3 box_union_surface(Rng& rng, const std::vector<std::pair<Vec3, Vec3>>& boxes) {
    double total = 0;
    for (const auto& [lo, hi] : boxes) total += box_area(lo, hi);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        double u = rng.uniform(0.0, total);
        std::size_t pick = boxes.size() - 1;
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            const double a = box_area(boxes[i].first, boxes[i].second);
            if (u < a) {
                pick = i;
                break;
            }
            u -= a;
        }
        Vec3 p = box_surface(rng, boxes[pick].first, boxes[pick].second);
        bool hidden = false;
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            if (i != pick && strictly_inside(p, boxes[i].first, boxes[i].second)) {
                hidden = true;
                break;
            }
        }
        if (!hidden) return p;
    }
    throw std::runtime_error("box_union_surface: rejection did not terminate");
}

Vec3 sample_sphere(Rng& rng, double r) {
    Vec3 d = sphere_dir(rng);
    return {r * d.x, r * d.y, r * d.z};
}

Vec3 sample_cylinder(Rng& rng, double r, double h) {
    const double side = 2.0 * kPi * r * h;
    const double caps = 2.0 * kPi * r * r;
    if (rng.uniform(0.0, side + caps) < side) {
        const double phi = rng.uniform(0.0, 2.0 * kPi);
        return {r * std::cos(phi), r * std::sin(phi), rng.uniform(-h / 2, h / 2)};
    }
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    const double rho = r * std::sqrt(rng.uniform01());
    const double zc = rng.uniform01() < 0.5 ? -h / 2 : h / 2;
    return {rho * std::cos(phi), rho * std::sin(phi), zc};
}

Vec3 sample_cone(Rng& rng, double r, double h) {
    const double base = kPi * r * r;
    const double lateral = kPi * r * std::sqrt(r * r + h * h);
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    if (rng.uniform(0.0, base + lateral) < base) {
        const double rho = r * std::sqrt(rng.uniform01());
        return {rho * std::cos(phi), rho * std::sin(phi), -h / 2};
    }
    // density along the slant grows linearly toward the base
    const double t = std::sqrt(rng.uniform01());
    return {r * t * std::cos(phi), r * t * std::sin(phi), h / 2 - t * h};
}

Vec3 sample_torus(Rng& rng, double R, double r) {
    const double theta = rng.uniform(0.0, 2.0 * kPi);
    // rejection on the tube angle: outer rim carries more area
    double phi;
    while (true) {
        phi = rng.uniform(0.0, 2.0 * kPi);
        if (rng.uniform01() < (R + r * std::cos(phi)) / (R + r)) break;
    }
    const double rad = R + r * std::cos(phi);
    return {rad * std::cos(theta), rad * std::sin(theta), r * std::sin(phi)};
}

Vec3 sample_triangle(Rng& rng, const Vec3& a, const Vec3& b, const Vec3& c) {
    double u = rng.uniform01(), v = rng.uniform01();
    if (u + v > 1.0) {
        u = 1.0 - u;
        v = 1.0 - v;
    }
    return {a.x + u * (b.x - a.x) + v * (c.x - a.x),
            a.y + u * (b.y - a.y) + v * (c.y - a.y),
            a.z + u * (b.z - a.z) + v * (c.z - a.z)};
}

Vec3 sample_pyramid(Rng& rng, double a, double h) {
    // square base at z=-h/2, apex on the axis
    const Vec3 apex{0, 0, h / 2};
    const Vec3 c0{-a, -a, -h / 2}, c1{a, -a, -h / 2}, c2{a, a, -h / 2}, c3{-a, a, -h / 2};
    const double base = 4.0 * a * a;
    const double slant = std::sqrt(h * h + a * a);
    const double face = a * slant; // each triangular face: 1/2 * 2a * slant
    double u = rng.uniform(0.0, base + 4.0 * face);
    if (u < base) {
        return {rng.uniform(-a, a), rng.uniform(-a, a), -h / 2};
    }
    u -= base;
    const int side = std::min(3, static_cast<int>(u / face));
    const Vec3* corners[4][2] = {{&c0, &c1}, {&c1, &c2}, {&c2, &c3}, {&c3, &c0}};
    return sample_triangle(rng, *corners[side][0], *corners[side][1], apex);
}

Vec3 sample_ellipsoid(Rng& rng, double a, double b, double c) {
    // rejection against the area distortion of the sphere-to-ellipsoid map
    const double gmax = std::max({b * c, a * c, a * b});
    while (true) {
        const Vec3 n = sphere_dir(rng);
        const double g = std::sqrt(b * c * n.x * (b * c * n.x) + a * c * n.y * (a * c * n.y) +
                                   a * b * n.z * (a * b * n.z));
        if (rng.uniform01() < g / gmax) return {a * n.x, b * n.y, c * n.z};
    }
}

Vec3 sample_capsule(Rng& rng, double r, double h) {
    const double side = 2.0 * kPi * r * h;
    const double caps = 4.0 * kPi * r * r;
    if (rng.uniform(0.0, side + caps) < side) {
        const double phi = rng.uniform(0.0, 2.0 * kPi);
        return {r * std::cos(phi), r * std::sin(phi), rng.uniform(-h / 2, h / 2)};
    }
    Vec3 d = sphere_dir(rng);
    const double zc = d.z >= 0 ? h / 2 : -h / 2;
    return {r * d.x, r * d.y, zc + r * d.z};
}

Vec3 sample_disk(Rng& rng, double r_in, double r_out) {
    // annulus in the plane; uniform in area
    const double u = rng.uniform01();
    const double rho = std::sqrt(r_in * r_in + u * (r_out * r_out - r_in * r_in));
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    return {rho * std::cos(phi), rho * std::sin(phi), 0.0};
}

Vec3 sample_helix(Rng& rng, double R, double turns, double h, double rt) {
    const double tmax = 2.0 * kPi * turns;
    const double t = rng.uniform(0.0, tmax);
    const double pitch = h / tmax;
    // curve point and its frame; the radial normal is already orthogonal
    // to the tangent for a circular helix
    const Vec3 c{R * std::cos(t), R * std::sin(t), pitch * t - h / 2};
    Vec3 tan{-R * std::sin(t), R * std::cos(t), pitch};
    const double tn = std::sqrt(tan.x * tan.x + tan.y * tan.y + tan.z * tan.z);
    tan = {tan.x / tn, tan.y / tn, tan.z / tn};
    const Vec3 nrm{-std::cos(t), -std::sin(t), 0.0};
    const Vec3 bin{tan.y * nrm.z - tan.z * nrm.y, tan.z * nrm.x - tan.x * nrm.z,
                   tan.x * nrm.y - tan.y * nrm.x};
    const double psi = rng.uniform(0.0, 2.0 * kPi);
    const double cn = rt * std::cos(psi), cb = rt * std::sin(psi);
    return {c.x + cn * nrm.x + cb * bin.x, c.y + cn * nrm.y + cb * bin.y,
            c.z + cn * nrm.z + cb * bin.z};
}

Vec3 sample_cross(Rng& rng, double L, double w) {
    const std::vector<std::pair<Vec3, Vec3>> boxes{
        {{-L, -w, -w}, {L, w, w}},
        {{-w, -L, -w}, {w, L, w}},
        {{-w, -w, -L}, {w, w, L}},
    };
    return box_union_surface(rng, boxes);
}

Vec3 sample_l_bracket(Rng& rng, double L, double w, double t) {
    // horizontal plate plus a vertical plate rising from one end
    const std::vector<std::pair<Vec3, Vec3>> boxes{
        {{0, 0, 0}, {L, w, t}},
        {{0, 0, 0}, {t, w, L}},
    };
    Vec3 p = box_union_surface(rng, boxes);
    // recenter roughly so downstream normalization is not lopsided
    return {p.x - L / 2, p.y - w / 2, p.z - L / 2};
}

} // namespace

const char* shape_name(ShapeKind kind) {
    const int i = static_cast<int>(kind);
    if (i < 0 || i >= kNumShapeKinds) throw std::invalid_argument("shape_name: bad kind");
    return kShapeNames[i];
}

ShapeKind shape_kind_from_name(const std::string& name) {
    for (int i = 0; i < kNumShapeKinds; ++i) {
        if (name == kShapeNames[i]) return static_cast<ShapeKind>(i);
    }
    throw std::invalid_argument("shape_kind_from_name: unknown shape '" + name + "'");
}

bool CorruptionProfile::is_identity() const {
    return occlusion_fraction == 0.0 && outlier_fraction == 0.0 && scale.lo == 1.0 &&
           scale.hi == 1.0;
}

std::vector<ShapeSpec> default_specs(int n_classes, const std::string& regime) {
    if (n_classes < 2 || n_classes > kNumShapeKinds) {
        throw std::invalid_argument("default_specs: class count " + std::to_string(n_classes) +
                                    " outside [2," + std::to_string(kNumShapeKinds) + "]");
    }
    if (regime != "clean" && regime != "corrupted") {
        throw std::invalid_argument("default_specs: unknown regime '" + regime + "'");
    }
    CorruptionProfile profile;
    double jitter = 0.01;
    if (regime == "corrupted") {
        jitter = 0.02;
        profile.occlusion_fraction = 0.25;
        profile.outlier_fraction = 0.08;
        profile.scale = {0.7, 1.3};
    }
    std::vector<ShapeSpec> specs;
    for (int i = 0; i < n_classes; ++i) {
        ShapeSpec s;
        s.kind = static_cast<ShapeKind>(i);
        s.param_ranges = default_ranges(s.kind);
        s.jitter_sigma = jitter;
        s.profile = profile;
        specs.push_back(std::move(s));
    }
    return specs;
}

PointCloud generate_cloud(const ShapeSpec& spec, std::size_t n_points, Rng& rng) {
    if (n_points == 0) throw std::invalid_argument("generate_cloud: n_points == 0");
    const int ki = static_cast<int>(spec.kind);
    if (ki < 0 || ki >= kNumShapeKinds) throw std::invalid_argument("generate_cloud: bad kind");
    const std::vector<Interval>& ranges =
        spec.param_ranges.empty() ? default_ranges(spec.kind) : spec.param_ranges;
    if (ranges.size() != kParamCount[ki]) {
        throw std::invalid_argument(std::string("generate_cloud: ") + kShapeNames[ki] +
                                    " takes " + std::to_string(kParamCount[ki]) +
                                    " parameter ranges, got " + std::to_string(ranges.size()));
    }
    if (spec.jitter_sigma < 0) throw std::invalid_argument("generate_cloud: negative jitter");
    std::vector<double> p(ranges.size());
    for (std::size_t i = 0; i < ranges.size(); ++i) {
        if (!(ranges[i].lo <= ranges[i].hi)) {
            throw std::invalid_argument("generate_cloud: inverted parameter range");
        }
        p[i] = rng.uniform(ranges[i].lo, ranges[i].hi);
    }

    PointCloud pc;
    pc.xyz.resize(3 * n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        Vec3 v;
        switch (spec.kind) {
            case ShapeKind::Sphere:    v = sample_sphere(rng, p[0]); break;
            case ShapeKind::Cube:      v = box_surface(rng, {-p[0], -p[0], -p[0]}, {p[0], p[0], p[0]}); break;
            case ShapeKind::Cylinder:  v = sample_cylinder(rng, p[0], p[1]); break;
            case ShapeKind::Cone:      v = sample_cone(rng, p[0], p[1]); break;
            case ShapeKind::Torus:     v = sample_torus(rng, p[0], p[1]); break;
            case ShapeKind::Pyramid:   v = sample_pyramid(rng, p[0], p[1]); break;
            case ShapeKind::Ellipsoid: v = sample_ellipsoid(rng, p[0], p[1], p[2]); break;
            case ShapeKind::Capsule:   v = sample_capsule(rng, p[0], p[1]); break;
            case ShapeKind::Disk:      v = sample_disk(rng, p[0], p[1]); break;
            case ShapeKind::Helix:     v = sample_helix(rng, p[0], p[1], p[2], p[3]); break;
            case ShapeKind::Cross:     v = sample_cross(rng, p[0], p[1]); break;
            case ShapeKind::LBracket:  v = sample_l_bracket(rng, p[0], p[1], p[2]); break;
        }
        pc.xyz[3 * i] = v.x;
        pc.xyz[3 * i + 1] = v.y;
        pc.xyz[3 * i + 2] = v.z;
    }
    if (spec.jitter_sigma > 0) {
        for (auto& v : pc.xyz) v += rng.normal(0.0, spec.jitter_sigma);
    }
    return pc;
}

PointCloud corrupt_cloud(const PointCloud& pc, const CorruptionProfile& profile, Rng& rng) {
    const std::size_t n = pc.size();
    if (n == 0) throw std::invalid_argument("corrupt_cloud: empty cloud");
    if (profile.occlusion_fraction < 0 || profile.occlusion_fraction >= 1 ||
        profile.outlier_fraction < 0 || profile.outlier_fraction >= 1) {
        throw std::invalid_argument("corrupt_cloud: fractions must lie in [0,1)");
    }
    if (!(profile.scale.lo > 0 && profile.scale.lo <= profile.scale.hi)) {
        throw std::invalid_argument("corrupt_cloud: bad scale range");
    }
    PointCloud out = pc;

    // occlusion: drop the points deepest along a random direction, refill by
    // duplicating survivors so the cloud keeps its size
    const std::size_t drop = static_cast<std::size_t>(
        std::llround(profile.occlusion_fraction * static_cast<double>(n)));
    if (drop > 0) {
        const Vec3 dir = sphere_dir(rng);
        std::vector<std::pair<double, std::size_t>> proj(n);
        for (std::size_t i = 0; i < n; ++i) {
            proj[i] = {out.x(i) * dir.x + out.y(i) * dir.y + out.z(i) * dir.z, i};
        }
        std::sort(proj.begin(), proj.end());
        // survivors: the n-drop smallest projections
        std::vector<double> kept;
        kept.reserve(3 * (n - drop));
        for (std::size_t i = 0; i < n - drop; ++i) {
            const std::size_t src = proj[i].second;
            kept.push_back(out.xyz[3 * src]);
            kept.push_back(out.xyz[3 * src + 1]);
            kept.push_back(out.xyz[3 * src + 2]);
        }
        std::vector<double> next;
        next.reserve(3 * n);
        next.insert(next.end(), kept.begin(), kept.end());
        const std::size_t n_kept = n - drop;
        for (std::size_t i = 0; i < drop; ++i) {
            const std::size_t picki = static_cast<std::size_t>(rng.uniform_int(n_kept));
            next.push_back(kept[3 * picki]);
            next.push_back(kept[3 * picki + 1]);
            next.push_back(kept[3 * picki + 2]);
        }
        out.xyz = std::move(next);
    }

    // outliers: replace round(f*n) distinct points with uniform noise drawn
    // from the inflated bounding box
    const std::size_t n_out = static_cast<std::size_t>(
        std::llround(profile.outlier_fraction * static_cast<double>(n)));
    if (n_out > 0) {
        Vec3 lo{out.x(0), out.y(0), out.z(0)}, hi = lo;
        for (std::size_t i = 1; i < n; ++i) {
            lo.x = std::min(lo.x, out.x(i));
            lo.y = std::min(lo.y, out.y(i));
            lo.z = std::min(lo.z, out.z(i));
            hi.x = std::max(hi.x, out.x(i));
            hi.y = std::max(hi.y, out.y(i));
            hi.z = std::max(hi.z, out.z(i));
        }
        const Vec3 mid{(lo.x + hi.x) / 2, (lo.y + hi.y) / 2, (lo.z + hi.z) / 2};
        const Vec3 half{(hi.x - lo.x) * 0.75 + 1e-3, (hi.y - lo.y) * 0.75 + 1e-3,
                        (hi.z - lo.z) * 0.75 + 1e-3};
        const auto idx = rng.sample_without_replacement(n, n_out);
        for (std::size_t i : idx) {
            out.xyz[3 * i] = mid.x + rng.uniform(-half.x, half.x);
            out.xyz[3 * i + 1] = mid.y + rng.uniform(-half.y, half.y);
            out.xyz[3 * i + 2] = mid.z + rng.uniform(-half.z, half.z);
        }
    }

    // anisotropic scaling
    if (!(profile.scale.lo == 1.0 && profile.scale.hi == 1.0)) {
        const double sx = rng.uniform(profile.scale.lo, profile.scale.hi);
        const double sy = rng.uniform(profile.scale.lo, profile.scale.hi);
        const double sz = rng.uniform(profile.scale.lo, profile.scale.hi);
        for (std::size_t i = 0; i < n; ++i) {
            out.xyz[3 * i] *= sx;
            out.xyz[3 * i + 1] *= sy;
            out.xyz[3 * i + 2] *= sz;
        }
    }
    return out;
}

std::vector<std::vector<std::size_t>> Dataset::by_class() const {
    std::vector<std::vector<std::size_t>> out(num_classes());
    for (std::size_t i = 0; i < clouds.size(); ++i) {
        const int label = clouds[i].label;
        if (label < 0 || static_cast<std::size_t>(label) >= out.size()) {
            throw std::out_of_range("Dataset::by_class: label " + std::to_string(label) +
                                    " outside [0," + std::to_string(out.size()) + ")");
        }
        out[static_cast<std::size_t>(label)].push_back(i);
    }
    return out;
}

Dataset generate_dataset(const std::vector<ShapeSpec>& specs, std::size_t per_class,
                         std::size_t n_points, std::uint64_t seed,
                         const std::string& regime) {
    if (specs.size() < 2) throw std::invalid_argument("generate_dataset: need >= 2 classes");
    if (per_class == 0) throw std::invalid_argument("generate_dataset: per_class == 0");
    Dataset ds;
    ds.manifest = {seed, per_class, n_points, regime, specs};

    std::map<std::string, int> seen;
    for (const ShapeSpec& s : specs) {
        std::string name = shape_name(s.kind);
        const int count = seen[name]++;
        if (count > 0) name += "_" + std::to_string(count + 1);
        ds.class_names.push_back(std::move(name));
    }

    ds.clouds.reserve(specs.size() * per_class);
    for (std::size_t ci = 0; ci < specs.size(); ++ci) {
        for (std::size_t j = 0; j < per_class; ++j) {
            // one derived seed per cloud: generation is order-independent
            Rng rng(derive_seed(seed, ci * per_class + j));
            PointCloud pc = generate_cloud(specs[ci], n_points, rng);
            if (!specs[ci].profile.is_identity()) {
                pc = corrupt_cloud(pc, specs[ci].profile, rng);
            }
            pc.label = static_cast<int>(ci);
            ds.clouds.push_back(std::move(pc));
        }
    }
    return ds;
}

// --- text container -----------------------------------------------------------

void save_dataset(const Dataset& ds, const std::string& path) {
    if (ds.clouds.empty()) throw std::invalid_argument("save_dataset: empty dataset");
    const std::size_t n_points = ds.clouds.front().size();
    for (const auto& pc : ds.clouds) {
        if (pc.size() != n_points) {
            throw std::invalid_argument("save_dataset: clouds disagree on point count");
        }
        if (pc.label < 0 || static_cast<std::size_t>(pc.label) >= ds.class_names.size()) {
            throw std::invalid_argument("save_dataset: cloud with label " +
                                        std::to_string(pc.label) + " but " +
                                        std::to_string(ds.class_names.size()) + " class names");
        }
    }
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("save_dataset: cannot open " + path);
    os << "PRFTPC v1 " << ds.clouds.size() << ' ' << n_points << ' ' << ds.num_classes() << '\n';
    char buf[96];
    for (const auto& pc : ds.clouds) {
        os << "label " << ds.class_names[static_cast<std::size_t>(pc.label)] << '\n';
        for (std::size_t i = 0; i < n_points; ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", pc.x(i), pc.y(i), pc.z(i));
            os << buf;
        }
    }
    if (!os) throw std::runtime_error("save_dataset: write failed for " + path);

    std::ofstream ms(path + ".manifest.json", std::ios::trunc);
    if (!ms) throw std::runtime_error("save_dataset: cannot open manifest for " + path);
    nlohmann::json j = manifest_to_json(ds.manifest);
    j["class_names"] = ds.class_names;
    ms << j.dump(2) << '\n';
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, std::size_t line, const std::string& msg) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
}

} // namespace

Dataset load_dataset(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_dataset: cannot open " + path);
    Dataset ds;
    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(is, line)) parse_fail(path, 1, "missing header");
    ++lineno;
    std::istringstream hs(line);
    std::string magic, version;
    std::size_t n_clouds = 0, n_points = 0, n_classes = 0;
    if (!(hs >> magic >> version >> n_clouds >> n_points >> n_classes) || magic != "PRFTPC") {
        parse_fail(path, lineno, "not a PRFTPC header: '" + line + "'");
    }
    if (version != "v1") parse_fail(path, lineno, "unsupported version " + version);
    if (n_clouds == 0 || n_points == 0 || n_classes < 2) {
        parse_fail(path, lineno, "implausible header counts");
    }

    // the manifest sidecar, when present, pins the class order
    std::map<std::string, int> name_to_id;
    {
        std::ifstream ms(path + ".manifest.json");
        if (ms) {
            nlohmann::json j = nlohmann::json::parse(ms, nullptr, true);
            ds.manifest = manifest_from_json(j);
            if (j.contains("class_names")) {
                for (const auto& n : j["class_names"]) {
                    name_to_id.emplace(n.get<std::string>(), static_cast<int>(ds.class_names.size()));
                    ds.class_names.push_back(n.get<std::string>());
                }
            }
        }
    }

    ds.clouds.reserve(n_clouds);
    for (std::size_t c = 0; c < n_clouds; ++c) {
        if (!std::getline(is, line)) parse_fail(path, lineno + 1, "expected label line");
        ++lineno;
        std::istringstream ls(line);
        std::string kw, name;
        if (!(ls >> kw >> name) || kw != "label") {
            parse_fail(path, lineno, "expected 'label <name>', got '" + line + "'");
        }
        auto it = name_to_id.find(name);
        if (it == name_to_id.end()) {
            if (ds.class_names.size() >= n_classes) {
                parse_fail(path, lineno, "class '" + name + "' exceeds declared class count");
            }
            it = name_to_id.emplace(name, static_cast<int>(ds.class_names.size())).first;
            ds.class_names.push_back(name);
        }
        PointCloud pc;
        pc.label = it->second;
        pc.xyz.resize(3 * n_points);
        for (std::size_t i = 0; i < n_points; ++i) {
            if (!std::getline(is, line)) parse_fail(path, lineno + 1, "truncated cloud");
            ++lineno;
            std::istringstream ps(line);
            if (!(ps >> pc.xyz[3 * i] >> pc.xyz[3 * i + 1] >> pc.xyz[3 * i + 2])) {
                parse_fail(path, lineno, "bad point line '" + line + "'");
            }
        }
        ds.clouds.push_back(std::move(pc));
    }
    while (ds.class_names.size() < n_classes) {
        // classes may legitimately be empty in a subset file
        ds.class_names.push_back("class_" + std::to_string(ds.class_names.size()));
    }
    return ds;
}

// --- manifest JSON --------------------------------------------------------------

nlohmann::json manifest_to_json(const DatasetManifest& m) {
    nlohmann::json specs = nlohmann::json::array();
    for (const ShapeSpec& s : m.specs) {
        nlohmann::json ranges = nlohmann::json::array();
        for (const Interval& r : s.param_ranges) ranges.push_back({r.lo, r.hi});
        specs.push_back({
            {"kind", shape_name(s.kind)},
            {"param_ranges", ranges},
            {"jitter_sigma", s.jitter_sigma},
            {"profile",
             {{"occlusion_fraction", s.profile.occlusion_fraction},
              {"outlier_fraction", s.profile.outlier_fraction},
              {"scale", {s.profile.scale.lo, s.profile.scale.hi}}}},
        });
    }
    return {
        {"seed", m.seed},       {"per_class", m.per_class}, {"n_points", m.n_points},
        {"regime", m.regime},   {"specs", specs},
    };
}

DatasetManifest manifest_from_json(const nlohmann::json& j) {
    DatasetManifest m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.per_class = j.at("per_class").get<std::size_t>();
    m.n_points = j.at("n_points").get<std::size_t>();
    m.regime = j.at("regime").get<std::string>();
    for (const auto& js : j.at("specs")) {
        ShapeSpec s;
        s.kind = shape_kind_from_name(js.at("kind").get<std::string>());
        for (const auto& r : js.at("param_ranges")) {
            s.param_ranges.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
        }
        s.jitter_sigma = js.at("jitter_sigma").get<double>();
        const auto& p = js.at("profile");
        s.profile.occlusion_fraction = p.at("occlusion_fraction").get<double>();
        s.profile.outlier_fraction = p.at("outlier_fraction").get<double>();
        s.profile.scale = {p.at("scale").at(0).get<double>(), p.at("scale").at(1).get<double>()};
        m.specs.push_back(std::move(s));
    }
    return m;
}

} // namespace prft
