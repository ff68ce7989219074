#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace smrnn {

using Shape = std::vector<std::size_t>;

namespace detail {

inline std::size_t numel_of(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

inline void check_finite(const std::vector<double>& values, const char* op) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::runtime_error(std::string(op) + ": non-finite value");
    }
  }
}

}  // namespace detail

/// Shared storage behind a Tensor handle; copying a Tensor aliases it.
/// grad stays empty until a gradient is first accumulated.
struct TensorData {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;
  // Tape bookkeeping: node_id is only meaningful while tape_epoch matches
  // the active tape's epoch.
  std::uint64_t tape_epoch = 0;
  std::size_t node_id = 0;
};

class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape, double fill = 0.0, bool requires_grad = false)
      : d_(std::make_shared<TensorData>()) {
    d_->shape = std::move(shape);
    d_->data.assign(detail::numel_of(d_->shape), fill);
    d_->requires_grad = requires_grad;
    if (!std::isfinite(fill)) throw std::runtime_error("Tensor: non-finite fill");
  }

  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false)
      : d_(std::make_shared<TensorData>()) {
    d_->shape = std::move(shape);
    if (values.size() != detail::numel_of(d_->shape)) {
      throw std::invalid_argument("Tensor: value count does not match shape");
    }
    d_->data = std::move(values);
    d_->requires_grad = requires_grad;
    detail::check_finite(d_->data, "Tensor");
  }

  static Tensor scalar(double v, bool requires_grad = false) {
    return Tensor(Shape{1}, std::vector<double>{v}, requires_grad);
  }

  bool defined() const { return d_ != nullptr; }
  const Shape& shape() const { return d_->shape; }
  std::size_t rank() const { return d_->shape.size(); }
  std::size_t numel() const { return d_->data.size(); }

  std::vector<double>& data() { return d_->data; }
  const std::vector<double>& data() const { return d_->data; }

  double item() const {
    if (numel() != 1) throw std::invalid_argument("Tensor::item: not a scalar");
    return d_->data[0];
  }

  bool requires_grad() const { return d_->requires_grad; }
  void set_requires_grad(bool on) { d_->requires_grad = on; }

  bool has_grad() const { return !d_->grad.empty(); }

  /// Gradient buffer, allocated (zeroed) on first access.
  std::vector<double>& grad() {
    if (d_->grad.empty()) d_->grad.assign(d_->data.size(), 0.0);
    return d_->grad;
  }

  void zero_grad() {
    if (!d_->grad.empty()) std::fill(d_->grad.begin(), d_->grad.end(), 0.0);
  }

  const std::shared_ptr<TensorData>& ptr() const { return d_; }

 private:
  std::shared_ptr<TensorData> d_;
};

enum class OpKind : std::uint8_t {
  leaf,
  affine,
  concat,
  relu,
  prelu,
  clamp,
  softmax_nll,
  add,
  sub,
  mul,
  scale,
  sum,
  mean,
  sigmoid,
  tanh,
};

struct TapeNode {
  OpKind kind;
  std::vector<std::size_t> parents;  // node ids; always precede this node
  std::shared_ptr<TensorData> out;
  std::function<void()> backprop;  // null for leaves
};

/// Define-by-run tape, one per thread. Nodes are appended in evaluation
/// order, so reverse iteration is reverse topological order.
class Tape {
 public:
  static Tape& active() {
    thread_local Tape tape;
    return tape;
  }

  bool recording() const { return recording_; }
  void set_recording(bool on) { recording_ = on; }

  std::size_t size() const { return nodes_.size(); }
  const TapeNode& node(std::size_t i) const { return nodes_[i]; }

  void clear() {
    nodes_.clear();
    ++epoch_;
  }

  bool on_tape(const std::shared_ptr<TensorData>& td) const {
    return td->tape_epoch == epoch_;
  }

  /// Node id for an op input, registering a leaf node if it has none yet.
  std::size_t input_id(const std::shared_ptr<TensorData>& td) {
    if (td->tape_epoch == epoch_) return td->node_id;
    td->tape_epoch = epoch_;
    td->node_id = nodes_.size();
    nodes_.push_back(TapeNode{OpKind::leaf, {}, td, nullptr});
    return td->node_id;
  }

  void record(OpKind kind, std::vector<std::size_t> parents,
              const std::shared_ptr<TensorData>& out, std::function<void()> backprop) {
    out->tape_epoch = epoch_;
    out->node_id = nodes_.size();
    nodes_.push_back(TapeNode{kind, std::move(parents), out, std::move(backprop)});
  }

  /// Accumulates d(loss)/d(leaf) into every leaf's grad. Intermediate grads
  /// are reset first, so calling again adds the same contribution again;
  /// leaf grads accumulate until zeroed by the caller.
  void backward(const Tensor& loss) {
    if (!loss.defined() || loss.numel() != 1) {
      throw std::invalid_argument("backward: loss must be a scalar");
    }
    const auto& td = loss.ptr();
    if (td->tape_epoch != epoch_) {
      throw std::invalid_argument("backward: loss is not connected to the active tape");
    }
    for (TapeNode& n : nodes_) {
      if (n.kind != OpKind::leaf && !n.out->grad.empty()) {
        std::fill(n.out->grad.begin(), n.out->grad.end(), 0.0);
      }
    }
    if (td->grad.empty()) td->grad.assign(1, 0.0);
    td->grad[0] += 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
      if (it->backprop) it->backprop();
    }
  }

 private:
  std::vector<TapeNode> nodes_;
  std::uint64_t epoch_ = 1;
  bool recording_ = true;
};

inline void backward(const Tensor& loss) { Tape::active().backward(loss); }

/// Disables tape recording for the current thread while alive.
struct NoGradGuard {
  NoGradGuard() : prev_(Tape::active().recording()) { Tape::active().set_recording(false); }
  ~NoGradGuard() { Tape::active().set_recording(prev_); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

namespace detail {

inline bool should_record(std::initializer_list<const Tensor*> inputs) {
  if (!Tape::active().recording()) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

inline std::vector<std::size_t> parent_ids(std::initializer_list<const Tensor*> inputs) {
  std::vector<std::size_t> ids;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) ids.push_back(Tape::active().input_id(t->ptr()));
  }
  return ids;
}

inline std::vector<double>& ensure_grad(TensorData& td) {
  if (td.grad.empty()) td.grad.assign(td.data.size(), 0.0);
  return td.grad;
}

}  // namespace detail

/// W*x + b with W of shape [out, in].
inline Tensor affine(const Tensor& x, const Tensor& W, const Tensor& b) {
  if (x.rank() != 1 || W.rank() != 2 || b.rank() != 1) {
    throw std::invalid_argument("affine: expected rank-1 x, rank-2 W, rank-1 b");
  }
  const std::size_t out_dim = W.shape()[0];
  const std::size_t in_dim = W.shape()[1];
  if (x.numel() != in_dim || b.numel() != out_dim) {
    throw std::invalid_argument("affine: shape mismatch");
  }
  Tensor out(Shape{out_dim});
  {
    const double* wp = W.data().data();
    const double* xp = x.data().data();
    const double* bp = b.data().data();
    double* op = out.data().data();
    for (std::size_t i = 0; i < out_dim; ++i) {
      double acc = bp[i];
      const double* row = wp + i * in_dim;
      for (std::size_t j = 0; j < in_dim; ++j) acc += row[j] * xp[j];
      op[i] = acc;
    }
  }
  detail::check_finite(out.data(), "affine");
  if (detail::should_record({&x, &W, &b})) {
    auto parents = detail::parent_ids({&x, &W, &b});
    out.set_requires_grad(true);
    auto xd = x.ptr(), wd = W.ptr(), bd = b.ptr(), od = out.ptr();
    Tape::active().record(OpKind::affine, std::move(parents), od,
                          [xd, wd, bd, od, out_dim, in_dim]() {
      if (od->grad.empty()) return;
      const double* g = od->grad.data();
      if (wd->requires_grad) {
        double* wg = detail::ensure_grad(*wd).data();
        const double* xp = xd->data.data();
        for (std::size_t i = 0; i < out_dim; ++i) {
          const double gi = g[i];
          if (gi == 0.0) continue;
          double* row = wg + i * in_dim;
          for (std::size_t j = 0; j < in_dim; ++j) row[j] += gi * xp[j];
        }
      }
      if (xd->requires_grad) {
        double* xg = detail::ensure_grad(*xd).data();
        const double* wp = wd->data.data();
        for (std::size_t i = 0; i < out_dim; ++i) {
          const double gi = g[i];
          if (gi == 0.0) continue;
          const double* row = wp + i * in_dim;
          for (std::size_t j = 0; j < in_dim; ++j) xg[j] += gi * row[j];
        }
      }
      if (bd->requires_grad) {
        double* bg = detail::ensure_grad(*bd).data();
        for (std::size_t i = 0; i < out_dim; ++i) bg[i] += g[i];
      }
    });
  }
  return out;
}

inline Tensor concat(const Tensor& a, const Tensor& b) {
  if (a.rank() != 1 || b.rank() != 1) {
    throw std::invalid_argument("concat: expected rank-1 inputs");
  }
  const std::size_t p = a.numel(), q = b.numel();
  Tensor out(Shape{p + q});
  std::copy(a.data().begin(), a.data().end(), out.data().begin());
  std::copy(b.data().begin(), b.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(p));
  if (detail::should_record({&a, &b})) {
    auto parents = detail::parent_ids({&a, &b});
    out.set_requires_grad(true);
    auto ad = a.ptr(), bd = b.ptr(), od = out.ptr();
    Tape::active().record(OpKind::concat, std::move(parents), od, [ad, bd, od, p, q]() {
      if (od->grad.empty()) return;
      const double* g = od->grad.data();
      if (ad->requires_grad) {
        double* ag = detail::ensure_grad(*ad).data();
        for (std::size_t i = 0; i < p; ++i) ag[i] += g[i];
      }
      if (bd->requires_grad) {
        double* bg = detail::ensure_grad(*bd).data();
        for (std::size_t i = 0; i < q; ++i) bg[i] += g[p + i];
      }
    });
  }
  return out;
}

/// Elementwise max(0, x); subgradient 0 at x == 0.
inline Tensor relu(const Tensor& x) {
  Tensor out(x.shape());
  const std::size_t n = x.numel();
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x.data()[i];
    out.data()[i] = v > 0.0 ? v : 0.0;
  }
  if (detail::should_record({&x})) {
    auto parents = detail::parent_ids({&x});
    out.set_requires_grad(true);
    auto xd = x.ptr(), od = out.ptr();
    Tape::active().record(OpKind::relu, std::move(parents), od, [xd, od, n]() {
      if (od->grad.empty() || !xd->requires_grad) return;
      const double* g = od->grad.data();
      double* xg = detail::ensure_grad(*xd).data();
      for (std::size_t i = 0; i < n; ++i) {
        if (xd->data[i] > 0.0) xg[i] += g[i];
      }
    });
  }
  return out;
}

/// Per-channel leaky rectifier with learned negative-side slopes.
inline Tensor prelu(const Tensor& x, const Tensor& slopes) {
  if (x.rank() != 1 || slopes.rank() != 1 || x.numel() != slopes.numel()) {
    throw std::invalid_argument("prelu: slope count must match channel count");
  }
  const std::size_t n = x.numel();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x.data()[i];
    out.data()[i] = v > 0.0 ? v : slopes.data()[i] * v;
  }
  detail::check_finite(out.data(), "prelu");
  if (detail::should_record({&x, &slopes})) {
    auto parents = detail::parent_ids({&x, &slopes});
    out.set_requires_grad(true);
    auto xd = x.ptr(), sd = slopes.ptr(), od = out.ptr();
    Tape::active().record(OpKind::prelu, std::move(parents), od, [xd, sd, od, n]() {
      if (od->grad.empty()) return;
      const double* g = od->grad.data();
      if (xd->requires_grad) {
        double* xg = detail::ensure_grad(*xd).data();
        for (std::size_t i = 0; i < n; ++i) {
          xg[i] += xd->data[i] > 0.0 ? g[i] : sd->data[i] * g[i];
        }
      }
      if (sd->requires_grad) {
        double* sg = detail::ensure_grad(*sd).data();
        for (std::size_t i = 0; i < n; ++i) {
          if (xd->data[i] <= 0.0) sg[i] += xd->data[i] * g[i];
        }
      }
    });
  }
  return out;
}

/// Elementwise min(hi, max(lo, x)); gradient 0 at and beyond the bounds.
inline Tensor clamp(const Tensor& x, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("clamp: lo > hi");
  const std::size_t n = x.numel();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < n; ++i) {
    out.data()[i] = std::min(hi, std::max(lo, x.data()[i]));
  }
  if (detail::should_record({&x})) {
    auto parents = detail::parent_ids({&x});
    out.set_requires_grad(true);
    auto xd = x.ptr(), od = out.ptr();
    Tape::active().record(OpKind::clamp, std::move(parents), od, [xd, od, lo, hi, n]() {
      if (od->grad.empty() || !xd->requires_grad) return;
      const double* g = od->grad.data();
      double* xg = detail::ensure_grad(*xd).data();
      for (std::size_t i = 0; i < n; ++i) {
        const double v = xd->data[i];
        if (v > lo && v < hi) xg[i] += g[i];
      }
    });
  }
  return out;
}

/// -log(softmax(logits)[label]), stabilized by subtracting the max logit.
inline Tensor softmax_nll(const Tensor& logits, int label) {
  if (logits.rank() != 1 || logits.numel() == 0) {
    throw std::invalid_argument("softmax_nll: logits must be a nonempty vector");
  }
  const std::size_t n = logits.numel();
  if (label < 0 || static_cast<std::size_t>(label) >= n) {
    throw std::out_of_range("softmax_nll: label out of range");
  }
  const double* lp = logits.data().data();
  const double mx = *std::max_element(lp, lp + n);
  double denom = 0.0;
  for (std::size_t i = 0; i < n; ++i) denom += std::exp(lp[i] - mx);
  const double lse = std::log(denom);
  Tensor out = Tensor::scalar(lse - (lp[label] - mx));
  detail::check_finite(out.data(), "softmax_nll");
  if (detail::should_record({&logits})) {
    std::vector<double> probs(n);
    for (std::size_t i = 0; i < n; ++i) probs[i] = std::exp(lp[i] - mx) / denom;
    auto parents = detail::parent_ids({&logits});
    out.set_requires_grad(true);
    auto ld = logits.ptr(), od = out.ptr();
    Tape::active().record(OpKind::softmax_nll, std::move(parents), od,
                          [ld, od, probs = std::move(probs), label, n]() {
      if (od->grad.empty() || !ld->requires_grad) return;
      const double g = od->grad[0];
      if (g == 0.0) return;
      double* lg = detail::ensure_grad(*ld).data();
      for (std::size_t i = 0; i < n; ++i) {
        lg[i] += g * (probs[i] - (i == static_cast<std::size_t>(label) ? 1.0 : 0.0));
      }
    });
  }
  return out;
}

namespace detail {

template <typename Fwd, typename Bwd>
Tensor binary_elementwise(OpKind kind, const char* name, const Tensor& a, const Tensor& b,
                          Fwd fwd, Bwd bwd) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(std::string(name) + ": shape mismatch");
  }
  const std::size_t n = a.numel();
  Tensor out(a.shape());
  for (std::size_t i = 0; i < n; ++i) out.data()[i] = fwd(a.data()[i], b.data()[i]);
  check_finite(out.data(), name);
  if (should_record({&a, &b})) {
    auto parents = parent_ids({&a, &b});
    out.set_requires_grad(true);
    auto ad = a.ptr(), bd = b.ptr(), od = out.ptr();
    Tape::active().record(kind, std::move(parents), od, [ad, bd, od, n, bwd]() {
      if (od->grad.empty()) return;
      bwd(*ad, *bd, *od, n);
    });
  }
  return out;
}

}  // namespace detail

inline Tensor add(const Tensor& a, const Tensor& b) {
  return detail::binary_elementwise(
      OpKind::add, "add", a, b, [](double x, double y) { return x + y; },
      [](TensorData& ad, TensorData& bd, TensorData& od, std::size_t n) {
        const double* g = od.grad.data();
        if (ad.requires_grad) {
          double* ag = detail::ensure_grad(ad).data();
          for (std::size_t i = 0; i < n; ++i) ag[i] += g[i];
        }
        if (bd.requires_grad) {
          double* bg = detail::ensure_grad(bd).data();
          for (std::size_t i = 0; i < n; ++i) bg[i] += g[i];
        }
      });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  return detail::binary_elementwise(
      OpKind::sub, "sub", a, b, [](double x, double y) { return x - y; },
      [](TensorData& ad, TensorData& bd, TensorData& od, std::size_t n) {
        const double* g = od.grad.data();
        if (ad.requires_grad) {
          double* ag = detail::ensure_grad(ad).data();
          for (std::size_t i = 0; i < n; ++i) ag[i] += g[i];
        }
        if (bd.requires_grad) {
          double* bg = detail::ensure_grad(bd).data();
          for (std::size_t i = 0; i < n; ++i) bg[i] -= g[i];
        }
      });
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
  return detail::binary_elementwise(
      OpKind::mul, "mul", a, b, [](double x, double y) { return x * y; },
      [](TensorData& ad, TensorData& bd, TensorData& od, std::size_t n) {
        const double* g = od.grad.data();
        if (ad.requires_grad) {
          double* ag = detail::ensure_grad(ad).data();
          for (std::size_t i = 0; i < n; ++i) ag[i] += g[i] * bd.data[i];
        }
        if (bd.requires_grad) {
          double* bg = detail::ensure_grad(bd).data();
          for (std::size_t i = 0; i < n; ++i) bg[i] += g[i] * ad.data[i];
        }
      });
}

inline Tensor scale(const Tensor& x, double k) {
  const std::size_t n = x.numel();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < n; ++i) out.data()[i] = k * x.data()[i];
  detail::check_finite(out.data(), "scale");
  if (detail::should_record({&x})) {
    auto parents = detail::parent_ids({&x});
    out.set_requires_grad(true);
    auto xd = x.ptr(), od = out.ptr();
    Tape::active().record(OpKind::scale, std::move(parents), od, [xd, od, k, n]() {
      if (od->grad.empty() || !xd->requires_grad) return;
      const double* g = od->grad.data();
      double* xg = detail::ensure_grad(*xd).data();
      for (std::size_t i = 0; i < n; ++i) xg[i] += k * g[i];
    });
  }
  return out;
}

inline Tensor sum(const Tensor& x) {
  const std::size_t n = x.numel();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x.data()[i];
  Tensor out = Tensor::scalar(acc);
  detail::check_finite(out.data(), "sum");
  if (detail::should_record({&x})) {
    auto parents = detail::parent_ids({&x});
    out.set_requires_grad(true);
    auto xd = x.ptr(), od = out.ptr();
    Tape::active().record(OpKind::sum, std::move(parents), od, [xd, od, n]() {
      if (od->grad.empty() || !xd->requires_grad) return;
      const double g = od->grad[0];
      double* xg = detail::ensure_grad(*xd).data();
      for (std::size_t i = 0; i < n; ++i) xg[i] += g;
    });
  }
  return out;
}

/// Mean of scalar tensors; the batch-loss reduction.
inline Tensor mean_of(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean_of: empty input");
  double acc = 0.0;
  bool rec = Tape::active().recording();
  bool any_grad = false;
  for (const Tensor& t : xs) {
    if (t.numel() != 1) throw std::invalid_argument("mean_of: inputs must be scalars");
    acc += t.data()[0];
    any_grad = any_grad || t.requires_grad();
  }
  const double inv = 1.0 / static_cast<double>(xs.size());
  Tensor out = Tensor::scalar(acc * inv);
  detail::check_finite(out.data(), "mean_of");
  if (rec && any_grad) {
    std::vector<std::size_t> parents;
    std::vector<std::shared_ptr<TensorData>> parts;
    parts.reserve(xs.size());
    for (const Tensor& t : xs) {
      if (t.requires_grad()) parents.push_back(Tape::active().input_id(t.ptr()));
      parts.push_back(t.ptr());
    }
    out.set_requires_grad(true);
    auto od = out.ptr();
    Tape::active().record(OpKind::mean, std::move(parents), od,
                          [parts = std::move(parts), od, inv]() {
      if (od->grad.empty()) return;
      const double g = od->grad[0] * inv;
      if (g == 0.0) return;
      for (const auto& p : parts) {
        if (p->requires_grad) detail::ensure_grad(*p)[0] += g;
      }
    });
  }
  return out;
}

inline Tensor sigmoid(const Tensor& x) {
  const std::size_t n = x.numel();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x.data()[i];
    if (v >= 0.0) {
      out.data()[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      out.data()[i] = e / (1.0 + e);
    }
  }
  if (detail::should_record({&x})) {
    auto parents = detail::parent_ids({&x});
    out.set_requires_grad(true);
    auto xd = x.ptr(), od = out.ptr();
    Tape::active().record(OpKind::sigmoid, std::move(parents), od, [xd, od, n]() {
      if (od->grad.empty() || !xd->requires_grad) return;
      const double* g = od->grad.data();
      double* xg = detail::ensure_grad(*xd).data();
      for (std::size_t i = 0; i < n; ++i) {
        const double s = od->data[i];
        xg[i] += g[i] * s * (1.0 - s);
      }
    });
  }
  return out;
}

inline Tensor tanh(const Tensor& x) {
  const std::size_t n = x.numel();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < n; ++i) out.data()[i] = std::tanh(x.data()[i]);
  if (detail::should_record({&x})) {
    auto parents = detail::parent_ids({&x});
    out.set_requires_grad(true);
    auto xd = x.ptr(), od = out.ptr();
    Tape::active().record(OpKind::tanh, std::move(parents), od, [xd, od, n]() {
      if (od->grad.empty() || !xd->requires_grad) return;
      const double* g = od->grad.data();
      double* xg = detail::ensure_grad(*xd).data();
      for (std::size_t i = 0; i < n; ++i) {
        const double t = od->data[i];
        xg[i] += g[i] * (1.0 - t * t);
      }
    });
  }
  return out;
}

/// Max over parameters of |analytic - numeric| / max(1e-8, |analytic| + |numeric|),
/// with numeric from central differences of step h. f must be deterministic and
/// rebuild its forward pass on every call.
inline double grad_check(const std::function<Tensor()>& f, std::vector<Tensor> params,
                         double h = 1e-5) {
  Tape& tape = Tape::active();
  for (Tensor& p : params) p.zero_grad();
  tape.clear();
  Tensor loss = f();
  if (loss.requires_grad()) tape.backward(loss);
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (Tensor& p : params) {
    analytic.push_back(p.has_grad() ? p.grad() : std::vector<double>(p.numel(), 0.0));
  }
  tape.clear();

  double max_rel = 0.0;
  {
    NoGradGuard no_grad;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
      std::vector<double>& v = params[pi].data();
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double v0 = v[i];
        v[i] = v0 + h;
        const double fp = f().item();
        v[i] = v0 - h;
        const double fm = f().item();
        v[i] = v0;
        const double numeric = (fp - fm) / (2.0 * h);
        const double a = analytic[pi][i];
        const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
        max_rel = std::max(max_rel, rel);
      }
    }
  }
  return max_rel;
}

}  // namespace smrnn
