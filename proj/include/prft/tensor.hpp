#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace prft {

// Dense row-major tensor of doubles. Gradients accumulate into `grad`
// across backward passes until zero_grad() is called, so one optimizer step
// can consume gradients summed over a minibatch of per-sample losses.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;
    std::vector<double> grad; // sized lazily on first write-back

    std::size_t numel() const;
    void zero_grad();
    bool same_shape(const Tensor& other) const;

    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor from(std::vector<std::size_t> shape, std::vector<double> values);
    static Tensor scalar(double v);
    static Tensor vec(std::vector<double> values);
    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
};

std::string shape_str(std::span<const std::size_t> shape);

// Handle to a node on a Tape. Only meaningful for the tape that minted it.
struct Var {
    int id = -1;
};

// Reverse-mode tape. Nodes are appended in recording order; backward()
// seeds the adjoint of a scalar node and replays the tape in exact reverse
// order, then adds leaf adjoints into the originating Tensor's grad.
class Tape {
public:
    struct Node {
        std::vector<std::size_t> shape;
        std::vector<double> value;
        std::vector<double> adjoint;
        bool needs_grad = false;
        Tensor* origin = nullptr; // leaf write-back target, null otherwise
        std::function<void(Tape&)> backward;
    };

    // Register a parameter tensor. Its gradient is written back on backward().
    // Record each tensor at most once per tape; re-recording makes a new node.
    Var leaf(Tensor& t);

    // Record a value that does not require gradients.
    Var constant(const Tensor& t);
    Var constant(std::span<const double> values, std::vector<std::size_t> shape);
    Var constant_scalar(double v);

    // Seed d(loss)/d(loss) = 1, replay the tape in reverse, and accumulate
    // leaf adjoints into their Tensors. `loss` must be a scalar node.
    // Each call re-runs the full pass; Tensor::grad accumulates across calls.
    void backward(Var loss);

    const std::vector<double>& value(Var v) const;
    const std::vector<double>& adjoint(Var v) const;
    const std::vector<std::size_t>& shape(Var v) const;
    std::size_t size() const { return nodes_.size(); }
    void clear();

    // Used by the free-function ops below.
    int push_node(Node node);
    Node& node(int id);
    const Node& node(int id) const;
    void check(Var v) const;

private:
    std::vector<Node> nodes_;
};

// --- differentiable ops -------------------------------------------------
// All ops validate shapes and throw std::invalid_argument on mismatch.

Var matmul(Tape& t, Var a, Var b);            // [m,k] x [k,n] -> [m,n]
Var add(Tape& t, Var a, Var b);               // same shape
Var sub(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);               // elementwise
Var div(Tape& t, Var a, Var b);               // elementwise
Var minimum(Tape& t, Var a, Var b);           // elementwise min; tie -> a
Var neg(Tape& t, Var x);
Var log(Tape& t, Var x);
Var relu(Tape& t, Var x);
Var clip(Tape& t, Var x, double lo, double hi); // grad 1 iff lo < x < hi
Var detach(Tape& t, Var x);                   // value copy, no gradient
Var softmax(Tape& t, Var x);                  // max-subtracted, any shape, over all elements
Var log_softmax(Tape& t, Var x);              // stabilized log of softmax
Var max_over_points(Tape& t, Var m);          // [n,h] -> [1,h], ties -> lowest row
Var mean(Tape& t, Var x);                     // -> scalar
Var pick(Tape& t, Var x, std::size_t index);  // -> scalar, bounds-checked
Var add_rowvec(Tape& t, Var m, Var v);        // [n,h] + [h] broadcast over rows
Var scale(Tape& t, Var x, double s);
Var sum(Tape& t, std::span<const Var> xs);    // sum of scalars -> scalar

// Softmax kernel shared by the tape op and plain inference so that both
// paths produce bitwise-identical probabilities.
void softmax_values(std::span<const double> in, std::span<double> out);

// --- optimizer ------------------------------------------------------------

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction. First and second moment buffers are allocated
// on the first step and must keep matching the parameter list after that.
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    void step(std::span<Tensor* const> params);
    long steps_taken() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    long t_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

} // namespace prft
