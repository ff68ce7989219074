#pragma once

// Layer and block primitives: linear layers, per-channel PReLU, and the
// three-stage MLP block (input linear -> PReLU -> output linear -> optional
// final activation) that every model in this library is assembled from.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "smrnn/rng.hpp"
#include "smrnn/tensor.hpp"

namespace smrnn {

struct NamedParam {
  std::string name;
  Tensor value;
};

inline std::size_t param_count(const std::vector<NamedParam>& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.value.numel();
  return n;
}

inline nlohmann::json params_to_json(const std::vector<NamedParam>& params) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : params) {
    j.push_back({{"name", p.name}, {"shape", p.value.shape()}, {"values", p.value.data()}});
  }
  return j;
}

// Fills an already-constructed parameter list (names and shapes fixed by the
// model's architecture) with the values stored in `j`.
inline void params_from_json(const nlohmann::json& j, std::vector<NamedParam>& params) {
  if (!j.is_array() || j.size() != params.size()) {
    throw std::invalid_argument("parameter list size mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& entry = j.at(i);
    if (entry.at("name").get<std::string>() != params[i].name) {
      throw std::invalid_argument("parameter name mismatch at index " + std::to_string(i));
    }
    if (entry.at("shape").get<Shape>() != params[i].value.shape()) {
      throw std::invalid_argument("parameter shape mismatch: " + params[i].name);
    }
    auto values = entry.at("values").get<std::vector<double>>();
    if (values.size() != params[i].value.numel()) {
      throw std::invalid_argument("parameter value count mismatch: " + params[i].name);
    }
    params[i].value.data() = std::move(values);
  }
}

struct LinearLayer {
  Tensor weights;  // [n_out, n_in]
  Tensor bias;     // [n_out]

  LinearLayer() = default;
  LinearLayer(std::size_t n_in, std::size_t n_out, Rng& rng)
      : weights({n_out, n_in}, 0.0, true), bias({n_out}, 0.0, true) {
    const double bound = std::sqrt(1.0 / static_cast<double>(n_in));
    for (double& w : weights.data()) w = rng.uniform(-bound, bound);
  }

  Tensor operator()(const Tensor& x) const { return affine(x, weights, bias); }

  std::size_t n_in() const { return weights.shape()[1]; }
  std::size_t n_out() const { return weights.shape()[0]; }
  std::size_t param_count() const { return weights.numel() + bias.numel(); }

  void collect_params(const std::string& prefix, std::vector<NamedParam>& out) const {
    out.push_back({prefix + ".weights", weights});
    out.push_back({prefix + ".bias", bias});
  }
};

struct PReLULayer {
  Tensor slopes;  // [n], one learned negative-side slope per channel

  PReLULayer() = default;
  explicit PReLULayer(std::size_t n, double init_slope = 0.25)
      : slopes({n}, init_slope, true) {}

  Tensor operator()(const Tensor& x) const { return prelu(x, slopes); }

  std::size_t param_count() const { return slopes.numel(); }

  void collect_params(const std::string& prefix, std::vector<NamedParam>& out) const {
    out.push_back({prefix + ".slopes", slopes});
  }
};

enum class FinalActivation { none, relu, prelu };

struct MLPBlock {
  LinearLayer input_linear;
  PReLULayer mid_activation;
  LinearLayer output_linear;
  FinalActivation final_kind = FinalActivation::prelu;
  PReLULayer final_activation;  // present only when final_kind == prelu

  MLPBlock() = default;
  MLPBlock(std::size_t n_in, std::size_t n_hidden, std::size_t n_out, FinalActivation fin,
           Rng& rng)
      : input_linear(n_in, n_hidden, rng),
        mid_activation(n_hidden),
        output_linear(n_hidden, n_out, rng),
        final_kind(fin) {
    if (fin == FinalActivation::prelu) final_activation = PReLULayer(n_out);
  }

  Tensor operator()(const Tensor& x) const {
    Tensor h = output_linear(mid_activation(input_linear(x)));
    switch (final_kind) {
      case FinalActivation::relu:
        return relu(h);
      case FinalActivation::prelu:
        return final_activation(h);
      case FinalActivation::none:
        return h;
    }
    throw std::logic_error("unreachable final activation kind");
  }

  std::size_t param_count() const {
    std::size_t n =
        input_linear.param_count() + mid_activation.param_count() + output_linear.param_count();
    if (final_kind == FinalActivation::prelu) n += final_activation.param_count();
    return n;
  }

  void collect_params(const std::string& prefix, std::vector<NamedParam>& out) const {
    input_linear.collect_params(prefix + ".input_linear", out);
    mid_activation.collect_params(prefix + ".mid_activation", out);
    output_linear.collect_params(prefix + ".output_linear", out);
    if (final_kind == FinalActivation::prelu) {
      final_activation.collect_params(prefix + ".final_activation", out);
    }
  }
};

// Common contract of every model in this library: consume a whole stimulus
// sequence, emit class logits once after the final step.
class SequenceClassifier {
 public:
  virtual ~SequenceClassifier() = default;
  virtual Tensor forward(const std::vector<Tensor>& steps) const = 0;
  virtual std::vector<NamedParam> parameters() const = 0;
  virtual std::size_t param_count() const = 0;
  virtual std::size_t stimulus_dim() const = 0;
};

}  // namespace smrnn
