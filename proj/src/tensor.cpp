#include "prft/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace prft {

std::size_t Tensor::numel() const {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return shape.empty() ? 0 : n;
}

void Tensor::zero_grad() {
    std::fill(grad.begin(), grad.end(), 0.0);
}

bool Tensor::same_shape(const Tensor& other) const {
    return shape == other.shape;
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
    Tensor t;
    t.shape = std::move(shape);
    t.data.assign(t.numel(), 0.0);
    return t;
}

Tensor Tensor::from(std::vector<std::size_t> shape, std::vector<double> values) {
    Tensor t;
    t.shape = std::move(shape);
    if (t.numel() != values.size()) {
        throw std::invalid_argument("Tensor::from: " + std::to_string(values.size()) +
                                    " values for shape " + shape_str(t.shape));
    }
    t.data = std::move(values);
    return t;
}

Tensor Tensor::scalar(double v) { return from({1}, {v}); }

Tensor Tensor::vec(std::vector<double> values) {
    std::size_t n = values.size();
    return from({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
    return from({rows, cols}, std::move(values));
}

std::string shape_str(std::span<const std::size_t> shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

// --- tape -----------------------------------------------------------------

int Tape::push_node(Node node) {
    node.adjoint.assign(node.value.size(), 0.0);
    nodes_.push_back(std::move(node));
    return static_cast<int>(nodes_.size()) - 1;
}

Tape::Node& Tape::node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
const Tape::Node& Tape::node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

void Tape::check(Var v) const {
    if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
        throw std::out_of_range("Tape: Var id " + std::to_string(v.id) +
                                " not on this tape (size " + std::to_string(nodes_.size()) + ")");
    }
}

Var Tape::leaf(Tensor& t) {
    Node n;
    n.shape = t.shape;
    n.value = t.data;
    n.needs_grad = true;
    n.origin = &t;
    return Var{push_node(std::move(n))};
}

Var Tape::constant(const Tensor& t) {
    Node n;
    n.shape = t.shape;
    n.value = t.data;
    return Var{push_node(std::move(n))};
}

Var Tape::constant(std::span<const double> values, std::vector<std::size_t> shape) {
    Node n;
    n.shape = std::move(shape);
    n.value.assign(values.begin(), values.end());
    std::size_t expect = 1;
    for (std::size_t d : n.shape) expect *= d;
    if (n.shape.empty() || expect != n.value.size()) {
        throw std::invalid_argument("Tape::constant: shape " + shape_str(n.shape) +
                                    " does not hold " + std::to_string(n.value.size()) + " values");
    }
    return Var{push_node(std::move(n))};
}

Var Tape::constant_scalar(double v) {
    return constant(std::span<const double>(&v, 1), {1});
}

const std::vector<double>& Tape::value(Var v) const {
    check(v);
    return node(v.id).value;
}

const std::vector<double>& Tape::adjoint(Var v) const {
    check(v);
    return node(v.id).adjoint;
}

const std::vector<std::size_t>& Tape::shape(Var v) const {
    check(v);
    return node(v.id).shape;
}

void Tape::clear() { nodes_.clear(); }

void Tape::backward(Var loss) {
    check(loss);
    Node& root = node(loss.id);
    if (root.value.size() != 1) {
        throw std::invalid_argument("Tape::backward: loss must be scalar, got " +
                                    shape_str(root.shape));
    }
    for (int i = 0; i <= loss.id; ++i) {
        Node& n = node(i);
        std::fill(n.adjoint.begin(), n.adjoint.end(), 0.0);
    }
    root.adjoint[0] = 1.0;
    for (int i = loss.id; i >= 0; --i) {
        Node& n = node(i);
        if (n.backward) n.backward(*this);
    }
    for (int i = 0; i <= loss.id; ++i) {
        Node& n = node(i);
        if (n.origin == nullptr) continue;
        Tensor& t = *n.origin;
        if (t.grad.size() != t.data.size()) t.grad.assign(t.data.size(), 0.0);
        for (std::size_t j = 0; j < t.grad.size(); ++j) t.grad[j] += n.adjoint[j];
    }
}

// --- op helpers -------------------------------------------------------------

namespace {

void require_same_shape(const Tape& t, Var a, Var b, const char* op) {
    if (t.shape(a) != t.shape(b)) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                    shape_str(t.shape(a)) + " vs " + shape_str(t.shape(b)));
    }
}

bool any_needs_grad(const Tape& t, std::initializer_list<Var> vs) {
    for (Var v : vs) {
        if (t.node(v.id).needs_grad) return true;
    }
    return false;
}

} // namespace

Var matmul(Tape& t, Var a, Var b) {
    t.check(a);
    t.check(b);
    const Tape::Node& an = t.node(a.id);
    const Tape::Node& bn = t.node(b.id);
    if (an.shape.size() != 2 || bn.shape.size() != 2 || an.shape[1] != bn.shape[0]) {
        throw std::invalid_argument("matmul: shape mismatch " + shape_str(an.shape) +
                                    " vs " + shape_str(bn.shape));
    }
    const std::size_t m = an.shape[0], k = an.shape[1], n = bn.shape[1];
    Tape::Node out;
    out.shape = {m, n};
    out.value.assign(m * n, 0.0);
    const double* A = an.value.data();
    const double* B = bn.value.data();
    double* C = out.value.data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t l = 0; l < k; ++l) {
            const double av = A[i * k + l];
            const double* brow = B + l * n;
            double* crow = C + i * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
    out.needs_grad = any_needs_grad(t, {a, b});
    int id = t.push_node(std::move(out));
    if (t.node(id).needs_grad) {
        int aid = a.id, bid = b.id;
        t.node(id).backward = [id, aid, bid, m, k, n](Tape& tp) {
            Tape::Node& self = tp.node(id);
            Tape::Node& na = tp.node(aid);
            Tape::Node& nb = tp.node(bid);
            const double* G = self.adjoint.data();
            if (na.needs_grad) {
                // dA = G * B^T
                double* dA = na.adjoint.data();
                const double* B2 = nb.value.data();
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        const double g = G[i * n + j];
                        const double* bcol = B2 + j;
                        double* darow = dA + i * k;
                        for (std::size_t l = 0; l < k; ++l) darow[l] += g * bcol[l * n];
                    }
                }
            }
            if (nb.needs_grad) {
                // dB = A^T * G
                double* dB = nb.adjoint.data();
                const double* A2 = na.value.data();
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t l = 0; l < k; ++l) {
                        const double av = A2[i * k + l];
                        const double* grow = G + i * n;
                        double* dbrow = dB + l * n;
                        for (std::size_t j = 0; j < n; ++j) dbrow[j] += av * grow[j];
                    }
                }
            }
        };
    }
    return Var{id};
}

namespace {

// Shared skeleton for same-shape binary elementwise ops.
template <typename Fwd, typename Bwd>
Var binary_elementwise(Tape& t, Var a, Var b, const char* opname, Fwd fwd, Bwd bwd) {
    t.check(a);
    t.check(b);
    require_same_shape(t, a, b, opname);
    const Tape::Node& an = t.node(a.id);
    const Tape::Node& bn = t.node(b.id);
    Tape::Node out;
    out.shape = an.shape;
    out.value.resize(an.value.size());
    for (std::size_t i = 0; i < out.value.size(); ++i) {
        out.value[i] = fwd(an.value[i], bn.value[i]);
    }
    out.needs_grad = any_needs_grad(t, {a, b});
    int id = t.push_node(std::move(out));
    if (t.node(id).needs_grad) {
        int aid = a.id, bid = b.id;
        t.node(id).backward = [id, aid, bid, bwd](Tape& tp) {
            Tape::Node& self = tp.node(id);
            Tape::Node& na = tp.node(aid);
            Tape::Node& nb = tp.node(bid);
            for (std::size_t i = 0; i < self.adjoint.size(); ++i) {
                bwd(self.adjoint[i], na.value[i], nb.value[i],
                    na.needs_grad ? &na.adjoint[i] : nullptr,
                    nb.needs_grad ? &nb.adjoint[i] : nullptr);
            }
        };
    }
    return Var{id};
}

template <typename Fwd, typename Bwd>
Var unary_elementwise(Tape& t, Var x, Fwd fwd, Bwd bwd) {
    t.check(x);
    const Tape::Node& xn = t.node(x.id);
    Tape::Node out;
    out.shape = xn.shape;
    out.value.resize(xn.value.size());
    for (std::size_t i = 0; i < out.value.size(); ++i) out.value[i] = fwd(xn.value[i]);
    out.needs_grad = xn.needs_grad;
    int id = t.push_node(std::move(out));
    if (t.node(id).needs_grad) {
        int xid = x.id;
        t.node(id).backward = [id, xid, bwd](Tape& tp) {
            Tape::Node& self = tp.node(id);
            Tape::Node& in = tp.node(xid);
            for (std::size_t i = 0; i < self.adjoint.size(); ++i) {
                in.adjoint[i] += self.adjoint[i] * bwd(in.value[i], self.value[i]);
            }
        };
    }
    return Var{id};
}

} // namespace

Var add(Tape& t, Var a, Var b) {
    return binary_elementwise(t, a, b, "add",
        [](double x, double y) { return x + y; },
        [](double g, double, double, double* da, double* db) {
            if (da) *da += g;
            if (db) *db += g;
        });
}

Var sub(Tape& t, Var a, Var b) {
    return binary_elementwise(t, a, b, "sub",
        [](double x, double y) { return x - y; },
        [](double g, double, double, double* da, double* db) {
            if (da) *da += g;
            if (db) *db -= g;
        });
}

Var mul(Tape& t, Var a, Var b) {
    return binary_elementwise(t, a, b, "mul",
        [](double x, double y) { return x * y; },
        [](double g, double x, double y, double* da, double* db) {
            if (da) *da += g * y;
            if (db) *db += g * x;
        });
}

Var div(Tape& t, Var a, Var b) {
    return binary_elementwise(t, a, b, "div",
        [](double x, double y) { return x / y; },
        [](double g, double x, double y, double* da, double* db) {
            if (da) *da += g / y;
            if (db) *db -= g * x / (y * y);
        });
}

Var minimum(Tape& t, Var a, Var b) {
    // min(a, b) elementwise; on a tie the gradient goes to the first input,
    // which keeps d(min)/da = 1 exactly when both branches are equal.
    return binary_elementwise(t, a, b, "minimum",
        [](double x, double y) { return x <= y ? x : y; },
        [](double g, double x, double y, double* da, double* db) {
            if (x <= y) {
                if (da) *da += g;
            } else {
                if (db) *db += g;
            }
        });
}

Var neg(Tape& t, Var x) {
    return unary_elementwise(t, x,
        [](double v) { return -v; },
        [](double, double) { return -1.0; });
}

Var log(Tape& t, Var x) {
    return unary_elementwise(t, x,
        [](double v) { return std::log(v); },
        [](double v, double) { return 1.0 / v; });
}

Var relu(Tape& t, Var x) {
    // Subgradient 0 at the kink.
    return unary_elementwise(t, x,
        [](double v) { return v > 0.0 ? v : 0.0; },
        [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var clip(Tape& t, Var x, double lo, double hi) {
    if (!(lo <= hi)) {
        throw std::invalid_argument("clip: lo > hi (" + std::to_string(lo) + " > " +
                                    std::to_string(hi) + ")");
    }
    // Gradient passes only strictly inside the interval; a value sitting
    // exactly on a bound is treated as clipped.
    return unary_elementwise(t, x,
        [lo, hi](double v) { return v < lo ? lo : (v > hi ? hi : v); },
        [lo, hi](double v, double) { return (v > lo && v < hi) ? 1.0 : 0.0; });
}

Var detach(Tape& t, Var x) {
    t.check(x);
    const Tape::Node& xn = t.node(x.id);
    Tape::Node out;
    out.shape = xn.shape;
    out.value = xn.value;
    out.needs_grad = false;
    return Var{t.push_node(std::move(out))};
}

void softmax_values(std::span<const double> in, std::span<double> out) {
    double m = in[0];
    for (double v : in) m = std::max(m, v);
    double z = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) {
        out[i] = std::exp(in[i] - m);
        z += out[i];
    }
    for (std::size_t i = 0; i < in.size(); ++i) out[i] /= z;
}

namespace {

void require_finite(const std::vector<double>& v, const char* op) {
    for (double x : v) {
        if (!std::isfinite(x)) throw std::invalid_argument(std::string(op) + ": non-finite input");
    }
}

} // namespace

Var softmax(Tape& t, Var x) {
    t.check(x);
    const Tape::Node& xn = t.node(x.id);
    if (xn.value.empty()) throw std::invalid_argument("softmax: empty input");
    require_finite(xn.value, "softmax");
    Tape::Node out;
    out.shape = xn.shape;
    out.value.resize(xn.value.size());
    softmax_values(xn.value, out.value);
    out.needs_grad = xn.needs_grad;
    int id = t.push_node(std::move(out));
    if (t.node(id).needs_grad) {
        int xid = x.id;
        t.node(id).backward = [id, xid](Tape& tp) {
            Tape::Node& self = tp.node(id);
            Tape::Node& in = tp.node(xid);
            double dot = 0.0;
            for (std::size_t i = 0; i < self.value.size(); ++i) {
                dot += self.adjoint[i] * self.value[i];
            }
            for (std::size_t i = 0; i < self.value.size(); ++i) {
                in.adjoint[i] += self.value[i] * (self.adjoint[i] - dot);
            }
        };
    }
    return Var{id};
}

Var log_softmax(Tape& t, Var x) {
    t.check(x);
    const Tape::Node& xn = t.node(x.id);
    if (xn.value.empty()) throw std::invalid_argument("log_softmax: empty input");
    require_finite(xn.value, "log_softmax");
    double m = xn.value[0];
    for (double v : xn.value) m = std::max(m, v);
    double z = 0.0;
    for (double v : xn.value) z += std::exp(v - m);
    const double lse = m + std::log(z);
    Tape::Node out;
    out.shape = xn.shape;
    out.value.resize(xn.value.size());
    for (std::size_t i = 0; i < out.value.size(); ++i) out.value[i] = xn.value[i] - lse;
    out.needs_grad = xn.needs_grad;
    int id = t.push_node(std::move(out));
    if (t.node(id).needs_grad) {
        int xid = x.id;
        t.node(id).backward = [id, xid](Tape& tp) {
            Tape::Node& self = tp.node(id);
            Tape::Node& in = tp.node(xid);
            double gsum = 0.0;
            for (double g : self.adjoint) gsum += g;
            for (std::size_t i = 0; i < self.value.size(); ++i) {
                in.adjoint[i] += self.adjoint[i] - std::exp(self.value[i]) * gsum;
            }
        };
    }
    return Var{id};
}

Var max_over_points(Tape& t, Var m) {
    t.check(m);
    const Tape::Node& mn = t.node(m.id);
    if (mn.shape.size() != 2 || mn.shape[0] == 0) {
        throw std::invalid_argument("max_over_points: need nonempty [n,h] input, got " +
                                    shape_str(mn.shape));
    }
    const std::size_t n = mn.shape[0], h = mn.shape[1];
    Tape::Node out;
    out.shape = {1, h};
    out.value.resize(h);
    std::vector<std::size_t> argmax(h, 0);
    for (std::size_t j = 0; j < h; ++j) {
        double best = mn.value[j];
        std::size_t bi = 0;
        for (std::size_t i = 1; i < n; ++i) {
            const double v = mn.value[i * h + j];
            if (v > best) { // strict: ties keep the lowest row index
                best = v;
                bi = i;
            }
        }
        out.value[j] = best;
        argmax[j] = bi;
    }
    out.needs_grad = mn.needs_grad;
    int id = t.push_node(std::move(out));
    if (t.node(id).needs_grad) {
        int mid = m.id;
        t.node(id).backward = [id, mid, h, argmax = std::move(argmax)](Tape& tp) {
            Tape::Node& self = tp.node(id);
            Tape::Node& in = tp.node(mid);
            for (std::size_t j = 0; j < h; ++j) {
                in.adjoint[argmax[j] * h + j] += self.adjoint[j];
            }
        };
    }
    return Var{id};
}

Var mean(Tape& t, Var x) {
    t.check(x);
    const Tape::Node& xn = t.node(x.id);
    if (xn.value.empty()) throw std::invalid_argument("mean: empty input");
    const std::size_t n = xn.value.size();
    double s = 0.0;
    for (double v : xn.value) s += v;
    Tape::Node out;
    out.shape = {1};
    out.value = {s / static_cast<double>(n)};
    out.needs_grad = xn.needs_grad;
    int id = t.push_node(std::move(out));
    if (t.node(id).needs_grad) {
        int xid = x.id;
        t.node(id).backward = [id, xid, n](Tape& tp) {
            const double g = tp.node(id).adjoint[0] / static_cast<double>(n);
            Tape::Node& in = tp.node(xid);
            for (std::size_t i = 0; i < n; ++i) in.adjoint[i] += g;
        };
    }
    return Var{id};
}

Var pick(Tape& t, Var x, std::size_t index) {
    t.check(x);
    const Tape::Node& xn = t.node(x.id);
    if (index >= xn.value.size()) {
        throw std::out_of_range("pick: index " + std::to_string(index) + " out of range for " +
                                shape_str(xn.shape));
    }
    Tape::Node out;
    out.shape = {1};
    out.value = {xn.value[index]};
    out.needs_grad = xn.needs_grad;
    int id = t.push_node(std::move(out));
    if (t.node(id).needs_grad) {
        int xid = x.id;
        t.node(id).backward = [id, xid, index](Tape& tp) {
            tp.node(xid).adjoint[index] += tp.node(id).adjoint[0];
        };
    }
    return Var{id};
}

Var add_rowvec(Tape& t, Var m, Var v) {
    t.check(m);
    t.check(v);
    const Tape::Node& mn = t.node(m.id);
    const Tape::Node& vn = t.node(v.id);
    if (mn.shape.size() != 2 || vn.value.size() != mn.shape[1]) {
        throw std::invalid_argument("add_rowvec: shape mismatch " + shape_str(mn.shape) +
                                    " vs " + shape_str(vn.shape));
    }
    const std::size_t n = mn.shape[0], h = mn.shape[1];
    Tape::Node out;
    out.shape = mn.shape;
    out.value.resize(mn.value.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < h; ++j) {
            out.value[i * h + j] = mn.value[i * h + j] + vn.value[j];
        }
    }
    out.needs_grad = any_needs_grad(t, {m, v});
    int id = t.push_node(std::move(out));
    if (t.node(id).needs_grad) {
        int mid = m.id, vid = v.id;
        t.node(id).backward = [id, mid, vid, n, h](Tape& tp) {
            Tape::Node& self = tp.node(id);
            Tape::Node& nm = tp.node(mid);
            Tape::Node& nv = tp.node(vid);
            if (nm.needs_grad) {
                for (std::size_t i = 0; i < self.adjoint.size(); ++i) {
                    nm.adjoint[i] += self.adjoint[i];
                }
            }
            if (nv.needs_grad) {
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < h; ++j) {
                        nv.adjoint[j] += self.adjoint[i * h + j];
                    }
                }
            }
        };
    }
    return Var{id};
}

Var scale(Tape& t, Var x, double s) {
    return unary_elementwise(t, x,
        [s](double v) { return s * v; },
        [s](double, double) { return s; });
}

Var sum(Tape& t, std::span<const Var> xs) {
    if (xs.empty()) throw std::invalid_argument("sum: no inputs");
    double total = 0.0;
    bool needs = false;
    for (Var v : xs) {
        t.check(v);
        const Tape::Node& n = t.node(v.id);
        if (n.value.size() != 1) {
            throw std::invalid_argument("sum: inputs must be scalars, got " + shape_str(n.shape));
        }
        total += n.value[0];
        needs = needs || n.needs_grad;
    }
    Tape::Node out;
    out.shape = {1};
    out.value = {total};
    out.needs_grad = needs;
    int id = t.push_node(std::move(out));
    if (needs) {
        std::vector<int> ids(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) ids[i] = xs[i].id;
        t.node(id).backward = [id, ids = std::move(ids)](Tape& tp) {
            const double g = tp.node(id).adjoint[0];
            for (int xid : ids) tp.node(xid).adjoint[0] += g;
        };
    }
    return Var{id};
}

// --- Adam -------------------------------------------------------------------

void Adam::step(std::span<Tensor* const> params) {
    if (m_.empty()) {
        m_.resize(params.size());
        v_.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i].assign(params[i]->data.size(), 0.0);
            v_[i].assign(params[i]->data.size(), 0.0);
        }
    }
    if (params.size() != m_.size()) {
        throw std::invalid_argument("Adam::step: parameter count changed from " +
                                    std::to_string(m_.size()) + " to " +
                                    std::to_string(params.size()));
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        if (m_[i].size() != p.data.size()) {
            throw std::invalid_argument("Adam::step: parameter " + std::to_string(i) +
                                        " changed size");
        }
        if (p.grad.size() != p.data.size()) continue; // no gradient yet
        for (std::size_t j = 0; j < p.data.size(); ++j) {
            const double g = p.grad[j];
            m_[i][j] = cfg_.beta1 * m_[i][j] + (1.0 - cfg_.beta1) * g;
            v_[i][j] = cfg_.beta2 * v_[i][j] + (1.0 - cfg_.beta2) * g * g;
            const double mhat = m_[i][j] / bc1;
            const double vhat = v_[i][j] / bc2;
            p.data[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

} // namespace prft
