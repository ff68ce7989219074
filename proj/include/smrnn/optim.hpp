#pragma once

// Adam with bias correction, global-norm gradient clipping, and the
// mini-batch training loop over unrolled sequences.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "smrnn/data.hpp"
#include "smrnn/nn.hpp"
#include "smrnn/tensor.hpp"

namespace smrnn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  explicit Adam(std::vector<NamedParam> params, AdamConfig cfg = {})
      : params_(std::move(params)), cfg_(cfg) {
    for (const auto& p : params_) {
      m_.emplace_back(p.value.numel(), 0.0);
      v_.emplace_back(p.value.numel(), 0.0);
    }
  }

  std::vector<NamedParam>& params() { return params_; }
  const std::vector<NamedParam>& params() const { return params_; }
  std::size_t timestep() const { return t_; }

  void zero_grad() {
    for (auto& p : params_) p.value.zero_grad();
  }

  // One update from the gradients currently stored on the parameters; an
  // unallocated gradient counts as zero. A non-finite gradient anywhere
  // aborts before any parameter or moment is touched.
  void step() {
    for (auto& p : params_) {
      if (!p.value.has_grad()) continue;
      for (double g : p.value.grad()) {
        if (!std::isfinite(g)) {
          throw std::runtime_error("Adam::step: non-finite gradient in " + p.name);
        }
      }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
      Tensor& p = params_[k].value;
      const bool has = p.has_grad();
      auto& data = p.data();
      for (std::size_t i = 0; i < data.size(); ++i) {
        const double g = has ? p.grad()[i] : 0.0;
        m_[k][i] = cfg_.beta1 * m_[k][i] + (1.0 - cfg_.beta1) * g;
        v_[k][i] = cfg_.beta2 * v_[k][i] + (1.0 - cfg_.beta2) * g * g;
        const double mhat = m_[k][i] / bc1;
        const double vhat = v_[k][i] / bc2;
        data[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      }
    }
  }

 private:
  std::vector<NamedParam> params_;
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t t_ = 0;
};

// Scales all gradients by threshold/norm when the global L2 norm exceeds the
// threshold; returns the factor applied (1 when no clipping happened).
inline double clip_global_norm(std::vector<NamedParam>& params, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("clip_global_norm: threshold must be > 0");
  double sq = 0.0;
  for (auto& p : params) {
    if (!p.value.has_grad()) continue;
    for (double g : p.value.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm <= threshold) return 1.0;
  const double factor = threshold / norm;
  for (auto& p : params) {
    if (!p.value.has_grad()) continue;
    for (double& g : p.value.grad()) g *= factor;
  }
  return factor;
}

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 128;
  std::optional<double> clip_norm;  // off unless set
  std::uint64_t seed = 0;
  std::size_t eval_every = 50;  // iterations between curve snapshots
  bool full_batch = false;
};

struct CurvePoint {
  std::size_t iteration = 0;
  double loss = 0.0;
  double train_accuracy = 0.0;
};

inline bool operator==(const CurvePoint& a, const CurvePoint& b) {
  return a.iteration == b.iteration && a.loss == b.loss && a.train_accuracy == b.train_accuracy;
}

struct EpochMetrics {
  double mean_loss = 0.0;
  double classification_rate = 0.0;
};

// Mutable companion of a training run: the optimizer, the global iteration
// counter, the recorded curve, and the snapshot window it aggregates.
struct TrainState {
  Adam adam;
  std::size_t iteration = 0;
  std::vector<CurvePoint> curve;

  double window_loss = 0.0;
  std::size_t window_batches = 0;
  std::size_t window_correct = 0;
  std::size_t window_seen = 0;

  explicit TrainState(const SequenceClassifier& model, AdamConfig cfg = {})
      : adam(model.parameters(), cfg) {}
};

inline int argmax_class(const Tensor& logits) {
  const auto& v = logits.data();
  int best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;  // first maximum wins: ties break toward the lowest class
}

namespace detail {

inline void snapshot_curve(TrainState& state) {
  if (state.window_batches == 0) return;
  state.curve.push_back({state.iteration, state.window_loss / state.window_batches,
                         static_cast<double>(state.window_correct) / state.window_seen});
  state.window_loss = 0.0;
  state.window_batches = 0;
  state.window_correct = 0;
  state.window_seen = 0;
}

}  // namespace detail

// Records any remaining window as a final curve point. Call after the last
// epoch so the curve always ends with the freshest training metrics.
inline void flush_curve(TrainState& state) { detail::snapshot_curve(state); }

inline EpochMetrics train_epoch(const SequenceClassifier& model, const Corpus& train,
                                TrainState& state, const TrainConfig& cfg, std::size_t epoch) {
  if (train.empty()) throw std::invalid_argument("train_epoch: empty dataset");
  Rng rng(cfg.seed + epoch);
  const std::size_t batch_size = cfg.full_batch ? train.size() : cfg.batch_size;
  const auto batches = make_batches(train, batch_size, rng);

  double epoch_loss = 0.0;
  std::size_t epoch_correct = 0;
  for (const auto& batch : batches) {
    Tape::active().clear();
    state.adam.zero_grad();

    std::vector<Tensor> losses;
    losses.reserve(batch.size());
    std::size_t batch_correct = 0;
    for (std::size_t idx : batch) {
      const SequenceSample& sample = train[idx];
      Tensor logits = model.forward(as_stimuli(sample));
      if (argmax_class(logits) == sample.label) ++batch_correct;
      losses.push_back(softmax_nll(logits, sample.label));
    }
    Tensor loss = mean_of(losses);
    const double loss_value = loss.item();
    if (!std::isfinite(loss_value)) {
      throw std::runtime_error("train_epoch: non-finite loss at iteration " +
                               std::to_string(state.iteration + 1));
    }
    backward(loss);
    if (cfg.clip_norm) clip_global_norm(state.adam.params(), *cfg.clip_norm);
    state.adam.step();

    ++state.iteration;
    epoch_loss += loss_value * static_cast<double>(batch.size());
    epoch_correct += batch_correct;
    state.window_loss += loss_value;
    state.window_batches += 1;
    state.window_correct += batch_correct;
    state.window_seen += batch.size();
    if (state.iteration == 1 || state.iteration % cfg.eval_every == 0) {
      detail::snapshot_curve(state);
    }
  }
  Tape::active().clear();
  return {epoch_loss / static_cast<double>(train.size()),
          static_cast<double>(epoch_correct) / static_cast<double>(train.size())};
}

inline double evaluate(const SequenceClassifier& model, const Corpus& data) {
  if (data.empty()) throw std::invalid_argument("evaluate: empty dataset");
  NoGradGuard ng;
  std::size_t correct = 0;
  for (const auto& sample : data) {
    if (argmax_class(model.forward(as_stimuli(sample))) == sample.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace smrnn
