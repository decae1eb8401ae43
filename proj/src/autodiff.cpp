#include "factrank/autodiff.hpp"

#include <algorithm>

namespace factrank::ad {

Var Tape::embed_sum(Tensor& w, std::vector<int> rows) {
  check(!rows.empty(), "embed_sum: empty row list");
  std::vector<double> v(static_cast<std::size_t>(w.cols), 0.0);
  for (int r : rows) {
    const double* src = w.row(r);
    for (int c = 0; c < w.cols; ++c) v[static_cast<std::size_t>(c)] += src[c];
  }
  Tensor* wp = &w;
  return make(std::move(v), [wp, rows = std::move(rows)](Tape&, const Node& n) {
    for (int r : rows) {
      double* dst = wp->grad.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(wp->cols);
      for (int c = 0; c < wp->cols; ++c) dst[c] += n.grad[static_cast<std::size_t>(c)];
    }
  });
}

Var Tape::matvec(Tensor& w, Var x) {
  check(static_cast<std::size_t>(w.cols) == x.dim(), "matvec: shape mismatch");
  const auto& xv = x.value();
  std::vector<double> y(static_cast<std::size_t>(w.rows), 0.0);
  for (int r = 0; r < w.rows; ++r) {
    const double* wr = w.row(r);
    double acc = 0.0;
    for (int c = 0; c < w.cols; ++c) acc += wr[c] * xv[static_cast<std::size_t>(c)];
    y[static_cast<std::size_t>(r)] = acc;
  }
  Tensor* wp = &w;
  std::size_t xi = x.idx;
  return make(std::move(y), [wp, xi](Tape& tape, const Node& n) {
    Node& xn = tape.node(xi);
    for (int r = 0; r < wp->rows; ++r) {
      double gr = n.grad[static_cast<std::size_t>(r)];
      if (gr == 0.0) continue;
      const double* wr = wp->row(r);
      double* wg = wp->grad.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(wp->cols);
      for (int c = 0; c < wp->cols; ++c) {
        wg[c] += gr * xn.value[static_cast<std::size_t>(c)];
        xn.grad[static_cast<std::size_t>(c)] += gr * wr[c];
      }
    }
  });
}

Var Tape::affine(Tensor& w, Var x, Tensor& bias) {
  check(bias.cols == 1 && bias.rows == w.rows, "affine: bias shape mismatch");
  check(static_cast<std::size_t>(w.cols) == x.dim(), "affine: shape mismatch");
  const auto& xv = x.value();
  std::vector<double> y(static_cast<std::size_t>(w.rows), 0.0);
  for (int r = 0; r < w.rows; ++r) {
    const double* wr = w.row(r);
    double acc = bias.value[static_cast<std::size_t>(r)];
    for (int c = 0; c < w.cols; ++c) acc += wr[c] * xv[static_cast<std::size_t>(c)];
    y[static_cast<std::size_t>(r)] = acc;
  }
  Tensor* wp = &w;
  Tensor* bp = &bias;
  std::size_t xi = x.idx;
  return make(std::move(y), [wp, bp, xi](Tape& tape, const Node& n) {
    Node& xn = tape.node(xi);
    for (int r = 0; r < wp->rows; ++r) {
      double gr = n.grad[static_cast<std::size_t>(r)];
      if (gr == 0.0) continue;
      bp->grad[static_cast<std::size_t>(r)] += gr;
      const double* wr = wp->row(r);
      double* wg = wp->grad.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(wp->cols);
      for (int c = 0; c < wp->cols; ++c) {
        wg[c] += gr * xn.value[static_cast<std::size_t>(c)];
        xn.grad[static_cast<std::size_t>(c)] += gr * wr[c];
      }
    }
  });
}

Var Tape::add(Var a, Var b) {
  check(a.dim() == b.dim(), "add: shape mismatch");
  std::vector<double> v = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += bv[i];
  std::size_t ai = a.idx, bi = b.idx;
  return make(std::move(v), [ai, bi](Tape& tape, const Node& n) {
    Node& an = tape.node(ai);
    Node& bn = tape.node(bi);
    for (std::size_t i = 0; i < n.grad.size(); ++i) {
      an.grad[i] += n.grad[i];
      bn.grad[i] += n.grad[i];
    }
  });
}

Var Tape::sum(const std::vector<Var>& vars) {
  check(!vars.empty(), "sum: empty list (use zeros())");
  std::vector<double> v = vars[0].value();
  for (std::size_t k = 1; k < vars.size(); ++k) {
    const auto& bv = vars[k].value();
    check(bv.size() == v.size(), "sum: shape mismatch");
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += bv[i];
  }
  std::vector<std::size_t> idx;
  idx.reserve(vars.size());
  for (const Var& var : vars) idx.push_back(var.idx);
  return make(std::move(v), [idx = std::move(idx)](Tape& tape, const Node& n) {
    for (std::size_t vi : idx) {
      Node& vn = tape.node(vi);
      for (std::size_t i = 0; i < n.grad.size(); ++i) vn.grad[i] += n.grad[i];
    }
  });
}

Var Tape::concat(const std::vector<Var>& vars) {
  std::vector<double> v;
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // (node, width)
  for (const Var& var : vars) {
    const auto& val = var.value();
    spans.emplace_back(var.idx, val.size());
    v.insert(v.end(), val.begin(), val.end());
  }
  return make(std::move(v), [spans = std::move(spans)](Tape& tape, const Node& n) {
    std::size_t at = 0;
    for (auto [vi, width] : spans) {
      Node& vn = tape.node(vi);
      for (std::size_t i = 0; i < width; ++i) vn.grad[i] += n.grad[at + i];
      at += width;
    }
  });
}

Var Tape::tanh(Var x) {
  std::vector<double> v = x.value();
  for (double& e : v) e = std::tanh(e);
  std::size_t xi = x.idx;
  return make(std::move(v), [xi](Tape& tape, const Node& n) {
    Node& xn = tape.node(xi);
    for (std::size_t i = 0; i < n.grad.size(); ++i)
      xn.grad[i] += n.grad[i] * (1.0 - n.value[i] * n.value[i]);
  });
}

Var Tape::relu(Var x) {
  std::vector<double> v = x.value();
  for (double& e : v) e = e > 0.0 ? e : 0.0;
  std::size_t xi = x.idx;
  return make(std::move(v), [xi](Tape& tape, const Node& n) {
    Node& xn = tape.node(xi);
    for (std::size_t i = 0; i < n.grad.size(); ++i)
      if (n.value[i] > 0.0) xn.grad[i] += n.grad[i];
  });
}

Var Tape::sigmoid(Var x) {
  std::vector<double> v = x.value();
  for (double& e : v) e = 1.0 / (1.0 + std::exp(-e));
  std::size_t xi = x.idx;
  return make(std::move(v), [xi](Tape& tape, const Node& n) {
    Node& xn = tape.node(xi);
    for (std::size_t i = 0; i < n.grad.size(); ++i)
      xn.grad[i] += n.grad[i] * n.value[i] * (1.0 - n.value[i]);
  });
}

Var Tape::mul_mask(Var x, std::vector<double> mask) {
  check(x.dim() == mask.size(), "mul_mask: shape mismatch");
  std::vector<double> v = x.value();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= mask[i];
  std::size_t xi = x.idx;
  return make(std::move(v), [xi, mask = std::move(mask)](Tape& tape, const Node& n) {
    Node& xn = tape.node(xi);
    for (std::size_t i = 0; i < n.grad.size(); ++i) xn.grad[i] += n.grad[i] * mask[i];
  });
}

Var Tape::affine_scalar(double a, double k, Var x) {
  check(x.dim() == 1, "affine_scalar: scalar expected");
  std::vector<double> v{a + k * x.value()[0]};
  std::size_t xi = x.idx;
  return make(std::move(v), [xi, k](Tape& tape, const Node& n) {
    tape.node(xi).grad[0] += k * n.grad[0];
  });
}

Var Tape::sub(Var a, Var b) {
  check(a.dim() == b.dim(), "sub: shape mismatch");
  std::vector<double> v = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= bv[i];
  std::size_t ai = a.idx, bi = b.idx;
  return make(std::move(v), [ai, bi](Tape& tape, const Node& n) {
    Node& an = tape.node(ai);
    Node& bn = tape.node(bi);
    for (std::size_t i = 0; i < n.grad.size(); ++i) {
      an.grad[i] += n.grad[i];
      bn.grad[i] -= n.grad[i];
    }
  });
}

Var Tape::square(Var x) {
  std::vector<double> v = x.value();
  for (double& e : v) e = e * e;
  std::size_t xi = x.idx;
  return make(std::move(v), [xi](Tape& tape, const Node& n) {
    Node& xn = tape.node(xi);
    for (std::size_t i = 0; i < n.grad.size(); ++i) xn.grad[i] += 2.0 * xn.value[i] * n.grad[i];
  });
}

void Tape::backward(Var loss) {
  check(loss.tape == this, "backward: foreign var");
  check(node(loss.idx).value.size() == 1, "backward: loss must be scalar");
  node(loss.idx).grad[0] = 1.0;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward) n.backward(*this, n);
  }
}

void Adam::step(const std::vector<Tensor*>& tensors,
                const std::vector<std::pair<Tensor*, double>>& l2_terms) {
  for (auto [tensor, factor] : l2_terms) {
    for (std::size_t i = 0; i < tensor->size(); ++i)
      tensor->grad[i] += factor * tensor->value[i];
  }
  t_ += 1;
  double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (Tensor* tensor : tensors) {
    for (std::size_t i = 0; i < tensor->size(); ++i) {
      double gradient = tensor->grad[i];
      tensor->adam_m[i] = cfg_.beta1 * tensor->adam_m[i] + (1.0 - cfg_.beta1) * gradient;
      tensor->adam_v[i] = cfg_.beta2 * tensor->adam_v[i] + (1.0 - cfg_.beta2) * gradient * gradient;
      double m_hat = tensor->adam_m[i] / bc1;
      double v_hat = tensor->adam_v[i] / bc2;
      tensor->value[i] -= cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
    }
  }
}

}  // namespace factrank::ad
