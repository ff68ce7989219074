#pragma once

// Comparator models: a feed-forward MLP over the full static bitmap, a
// vanilla recurrent network (MLP core fed with concat(stimulus, state)),
// and a stacked LSTM. All share the SequenceClassifier contract: one
// classification after the final step.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "smrnn/nn.hpp"
#include "smrnn/rng.hpp"
#include "smrnn/tensor.hpp"

namespace smrnn {

class FfnnModel final : public SequenceClassifier {
 public:
  MLPBlock stages;  // n_in -> hidden -> classes, PReLU final

  FfnnModel() = default;
  FfnnModel(std::size_t n_in, std::size_t hidden, std::size_t classes, Rng& rng)
      : stages(n_in, hidden, classes, FinalActivation::prelu, rng) {}

  // The feed-forward comparator sees the whole sample at once; a row
  // sequence is concatenated back into the flat bitmap it came from.
  Tensor forward(const std::vector<Tensor>& steps) const override {
    if (steps.empty()) throw std::invalid_argument("FfnnModel::forward: empty sequence");
    Tensor flat = steps.front();
    for (std::size_t i = 1; i < steps.size(); ++i) flat = concat(flat, steps[i]);
    if (flat.numel() != stages.input_linear.n_in()) {
      throw std::invalid_argument("FfnnModel::forward: input dimension mismatch");
    }
    return stages(flat);
  }

  std::vector<NamedParam> parameters() const override {
    std::vector<NamedParam> out;
    stages.collect_params("stages", out);
    return out;
  }
  std::size_t param_count() const override { return stages.param_count(); }
  std::size_t stimulus_dim() const override { return stages.input_linear.n_in(); }
};

class VanillaRnnModel final : public SequenceClassifier {
 public:
  MLPBlock core;  // (stimulus + state_dim) -> hidden -> state_dim, PReLU final
  MLPBlock head;  // state_dim -> head_hidden -> classes, PReLU final

  VanillaRnnModel() = default;
  VanillaRnnModel(std::size_t stimulus, std::size_t state_dim, std::size_t hidden,
                  std::size_t head_hidden, std::size_t classes, Rng& rng)
      : core(stimulus + state_dim, hidden, state_dim, FinalActivation::prelu, rng),
        head(state_dim, head_hidden, classes, FinalActivation::prelu, rng),
        stimulus_dim_(stimulus),
        state_dim_(state_dim) {}

  Tensor initial_state() const { return Tensor({state_dim_}, 0.0); }

  Tensor step(const Tensor& state, const Tensor& stimulus) const {
    if (stimulus.numel() != stimulus_dim_ || state.numel() != state_dim_) {
      throw std::invalid_argument("VanillaRnnModel::step: shape mismatch");
    }
    return core(concat(stimulus, state));
  }

  Tensor forward(const std::vector<Tensor>& steps) const override {
    if (steps.empty()) throw std::invalid_argument("VanillaRnnModel::forward: empty sequence");
    Tensor state = initial_state();
    for (const Tensor& x : steps) state = step(state, x);
    return head(state);
  }

  std::vector<NamedParam> parameters() const override {
    std::vector<NamedParam> out;
    core.collect_params("core", out);
    head.collect_params("head", out);
    return out;
  }
  std::size_t param_count() const override { return core.param_count() + head.param_count(); }
  std::size_t stimulus_dim() const override { return stimulus_dim_; }

 private:
  std::size_t stimulus_dim_ = 0;
  std::size_t state_dim_ = 0;
};

// Standard gated cell, no peepholes: parameter count is exactly
// 4*o*(i + o + 1).
struct LstmCell {
  LinearLayer gate_input;      // i-gate
  LinearLayer gate_forget;     // f-gate
  LinearLayer gate_output;     // o-gate
  LinearLayer gate_candidate;  // g (cell candidate)

  LstmCell() = default;
  LstmCell(std::size_t in_dim, std::size_t out_dim, Rng& rng)
      : gate_input(in_dim + out_dim, out_dim, rng),
        gate_forget(in_dim + out_dim, out_dim, rng),
        gate_output(in_dim + out_dim, out_dim, rng),
        gate_candidate(in_dim + out_dim, out_dim, rng) {}

  std::size_t in_dim() const { return gate_input.n_in() - out_dim(); }
  std::size_t out_dim() const { return gate_input.n_out(); }
  std::size_t param_count() const {
    return gate_input.param_count() + gate_forget.param_count() + gate_output.param_count() +
           gate_candidate.param_count();
  }

  struct State {
    Tensor h, c;
  };

  State initial_state() const {
    return {Tensor({out_dim()}, 0.0), Tensor({out_dim()}, 0.0)};
  }

  State step(const State& s, const Tensor& x) const {
    if (x.numel() != in_dim()) throw std::invalid_argument("LstmCell::step: input dim mismatch");
    Tensor xh = concat(x, s.h);
    Tensor gi = sigmoid(gate_input(xh));
    Tensor gf = sigmoid(gate_forget(xh));
    Tensor go = sigmoid(gate_output(xh));
    Tensor gg = tanh(gate_candidate(xh));
    Tensor c = add(mul(gf, s.c), mul(gi, gg));
    Tensor h = mul(go, tanh(c));
    return {h, c};
  }

  void collect_params(const std::string& prefix, std::vector<NamedParam>& out) const {
    gate_input.collect_params(prefix + ".gate_input", out);
    gate_forget.collect_params(prefix + ".gate_forget", out);
    gate_output.collect_params(prefix + ".gate_output", out);
    gate_candidate.collect_params(prefix + ".gate_candidate", out);
  }
};

class LstmModel final : public SequenceClassifier {
 public:
  std::vector<LstmCell> cells;
  LinearLayer head;  // o_last -> classes

  LstmModel() = default;
  LstmModel(std::size_t stimulus, const std::vector<std::size_t>& widths, std::size_t classes,
            Rng& rng)
      : stimulus_dim_(stimulus) {
    if (widths.empty()) throw std::invalid_argument("LstmModel: need at least one cell");
    std::size_t in = stimulus;
    for (std::size_t w : widths) {
      cells.emplace_back(in, w, rng);
      in = w;
    }
    head = LinearLayer(in, classes, rng);
  }

  Tensor forward(const std::vector<Tensor>& steps) const override {
    if (steps.empty()) throw std::invalid_argument("LstmModel::forward: empty sequence");
    std::vector<LstmCell::State> states;
    states.reserve(cells.size());
    for (const auto& cell : cells) states.push_back(cell.initial_state());
    for (const Tensor& x : steps) {
      Tensor layer_in = x;
      for (std::size_t l = 0; l < cells.size(); ++l) {
        states[l] = cells[l].step(states[l], layer_in);
        layer_in = states[l].h;
      }
    }
    return head(states.back().h);
  }

  std::vector<NamedParam> parameters() const override {
    std::vector<NamedParam> out;
    for (std::size_t l = 0; l < cells.size(); ++l) {
      cells[l].collect_params("cell" + std::to_string(l), out);
    }
    head.collect_params("head", out);
    return out;
  }

  std::size_t param_count() const override {
    std::size_t n = head.param_count();
    for (const auto& cell : cells) n += cell.param_count();
    return n;
  }
  std::size_t stimulus_dim() const override { return stimulus_dim_; }

 private:
  std::size_t stimulus_dim_ = 0;
};

}  // namespace smrnn
