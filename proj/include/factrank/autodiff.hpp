#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "factrank/util.hpp"

namespace factrank::ad {

// A trainable parameter matrix (row-major) with its gradient accumulator and
// Adam moment buffers. 64-bit floats throughout; the finite-difference checks
// depend on it.
struct Tensor {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::vector<double> value;
  std::vector<double> grad;
  std::vector<double> adam_m;
  std::vector<double> adam_v;

  Tensor() = default;
  Tensor(std::string n, int r, int c)
      : name(std::move(n)),
        rows(r),
        cols(c),
        value(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0),
        grad(value.size(), 0.0),
        adam_m(value.size(), 0.0),
        adam_v(value.size(), 0.0) {}

  std::size_t size() const { return value.size(); }
  double* row(int r) { return value.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols); }
  const double* row(int r) const {
    return value.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols);
  }
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
  void init_uniform(std::mt19937_64& rng, double radius) {
    for (double& v : value) v = (uniform_unit(rng) * 2.0 - 1.0) * radius;
  }
};

// One forward value on the tape. Backward closures accumulate into parent
// node grads and Tensor grads.
class Tape;

struct Var {
  Tape* tape = nullptr;
  std::size_t idx = 0;

  const std::vector<double>& value() const;
  std::size_t dim() const { return value().size(); }
  double scalar() const {
    check(dim() == 1, "Var::scalar on non-scalar");
    return value()[0];
  }
};

class Tape {
 public:
  struct Node {
    std::vector<double> value;
    std::vector<double> grad;
    std::function<void(Tape&, const Node&)> backward;  // may be empty (leaf)
  };

  std::size_t size() const { return nodes_.size(); }
  Node& node(std::size_t i) { return nodes_[i]; }
  const Node& node(std::size_t i) const { return nodes_[i]; }

  Var make(std::vector<double> value, std::function<void(Tape&, const Node&)> backward = {}) {
    nodes_.push_back(Node{std::move(value), {}, std::move(backward)});
    nodes_.back().grad.assign(nodes_.back().value.size(), 0.0);
    return Var{this, nodes_.size() - 1};
  }

  // --- graph builders ---

  Var constant(std::vector<double> value) { return make(std::move(value)); }
  Var zeros(std::size_t n) { return make(std::vector<double>(n, 0.0)); }

  // Sum of tensor rows; the embedding lookup (one row) and the entity
  // type-set aggregation (several rows) share this node.
  Var embed_sum(Tensor& w, std::vector<int> rows);

  Var matvec(Tensor& w, Var x);               // w (r x c) * x (c)
  Var affine(Tensor& w, Var x, Tensor& bias); // w * x + b
  Var add(Var a, Var b);
  Var sum(const std::vector<Var>& vars);      // element-wise; empty -> caller uses zeros()
  Var concat(const std::vector<Var>& vars);
  Var tanh(Var x);
  Var relu(Var x);
  Var sigmoid(Var x);
  Var mul_mask(Var x, std::vector<double> mask);  // element-wise by a constant mask
  Var affine_scalar(double a, double k, Var x);   // a + k * x (scalar)
  Var sub(Var a, Var b);
  Var square(Var x);

  // Seeds d(loss)/d(loss) = 1 and walks the tape in reverse creation order.
  void backward(Var loss);

 private:
  std::vector<Node> nodes_;
};

inline const std::vector<double>& Var::value() const { return tape->node(idx).value; }

// ---------------------------------------------------------------------------
// Adam with optional L2 on selected tensors (classic L2: the penalty gradient
// is added to the accumulated gradient before the moment update).
// ---------------------------------------------------------------------------

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

  void step(const std::vector<Tensor*>& tensors,
            const std::vector<std::pair<Tensor*, double>>& l2_terms = {});

  std::int64_t updates() const { return t_; }
  void reset() { t_ = 0; }

 private:
  AdamConfig cfg_;
  std::int64_t t_ = 0;
};

}  // namespace factrank::ad
