#pragma once

// The stigmergic-memory recurrent classifier. State is a vector of M mark
// variables; each step a Deposit MLP and a Removal MLP (both ReLU-final, so
// their outputs are nonnegative) read the stimulus together with their own
// linear projection of the marks, and the marks move by
//   m' = clamp(m + deposit - removal, mark_floor, mark_ceiling).
// Classification reads the final marks through a PReLU-final MLP.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "smrnn/nn.hpp"
#include "smrnn/rng.hpp"
#include "smrnn/tensor.hpp"

namespace smrnn {

struct SMConfig {
  std::size_t mark_count = 15;       // M
  std::size_t stimulus_dim = 28;     // S
  std::size_t hidden = 20;           // deposit/removal hidden width
  std::size_t classify_hidden = 10;  // classification hidden width
  std::size_t classes = 10;
  double mark_floor = 0.0;    // finishing level
  double mark_ceiling = 1.0;  // saturation level
  double mark_init = 0.0;

  void validate() const {
    if (mark_count < 1 || stimulus_dim < 1 || hidden < 1 || classify_hidden < 1 || classes < 1) {
      throw std::invalid_argument("SMConfig: all dimensions must be >= 1");
    }
    if (!(mark_floor <= mark_init && mark_init <= mark_ceiling)) {
      throw std::invalid_argument("SMConfig: need mark_floor <= mark_init <= mark_ceiling");
    }
  }
};

inline void to_json(nlohmann::json& j, const SMConfig& c) {
  j = {{"mark_count", c.mark_count},
       {"stimulus_dim", c.stimulus_dim},
       {"hidden", c.hidden},
       {"classify_hidden", c.classify_hidden},
       {"classes", c.classes},
       {"mark_floor", c.mark_floor},
       {"mark_ceiling", c.mark_ceiling},
       {"mark_init", c.mark_init}};
}

inline void from_json(const nlohmann::json& j, SMConfig& c) {
  j.at("mark_count").get_to(c.mark_count);
  j.at("stimulus_dim").get_to(c.stimulus_dim);
  j.at("hidden").get_to(c.hidden);
  j.at("classify_hidden").get_to(c.classify_hidden);
  j.at("classes").get_to(c.classes);
  j.at("mark_floor").get_to(c.mark_floor);
  j.at("mark_ceiling").get_to(c.mark_ceiling);
  j.at("mark_init").get_to(c.mark_init);
}

struct MarkState {
  Tensor marks;  // [M]; every component stays in [mark_floor, mark_ceiling]
};

class SmRnnModel final : public SequenceClassifier {
 public:
  SMConfig config;
  LinearLayer proj_deposit;   // M -> M, feeds only the deposit path
  LinearLayer proj_removal;   // M -> M, feeds only the removal path
  MLPBlock deposit_mlp;       // S+M -> hidden -> M, ReLU final
  MLPBlock removal_mlp;       // same shape, independent parameters
  MLPBlock classify_mlp;      // M -> classify_hidden -> classes, PReLU final

  SmRnnModel() = default;
  SmRnnModel(const SMConfig& cfg, Rng& rng)
      : config(validated(cfg)),
        proj_deposit(cfg.mark_count, cfg.mark_count, rng),
        proj_removal(cfg.mark_count, cfg.mark_count, rng),
        deposit_mlp(cfg.stimulus_dim + cfg.mark_count, cfg.hidden, cfg.mark_count,
                    FinalActivation::relu, rng),
        removal_mlp(cfg.stimulus_dim + cfg.mark_count, cfg.hidden, cfg.mark_count,
                    FinalActivation::relu, rng),
        classify_mlp(cfg.mark_count, cfg.classify_hidden, cfg.classes, FinalActivation::prelu,
                     rng) {}

  MarkState initial_state() const {
    return {Tensor({config.mark_count}, config.mark_init)};
  }

  MarkState step(const MarkState& state, const Tensor& stimulus) const {
    if (stimulus.numel() != config.stimulus_dim) {
      throw std::invalid_argument("SmRnnModel::step: stimulus dimension mismatch");
    }
    Tensor d = deposit_mlp(concat(stimulus, proj_deposit(state.marks)));
    Tensor r = removal_mlp(concat(stimulus, proj_removal(state.marks)));
    Tensor moved = sub(add(state.marks, d), r);
    return {clamp(moved, config.mark_floor, config.mark_ceiling)};
  }

  Tensor classify(const MarkState& state) const { return classify_mlp(state.marks); }

  Tensor forward(const std::vector<Tensor>& steps) const override {
    if (steps.empty()) throw std::invalid_argument("SmRnnModel::forward: empty sequence");
    MarkState s = initial_state();
    for (const Tensor& x : steps) s = step(s, x);
    return classify(s);
  }

  std::vector<NamedParam> parameters() const override {
    std::vector<NamedParam> out;
    proj_deposit.collect_params("proj_deposit", out);
    proj_removal.collect_params("proj_removal", out);
    deposit_mlp.collect_params("deposit_mlp", out);
    removal_mlp.collect_params("removal_mlp", out);
    classify_mlp.collect_params("classify_mlp", out);
    return out;
  }

  std::size_t param_count() const override {
    return proj_deposit.param_count() + proj_removal.param_count() + deposit_mlp.param_count() +
           removal_mlp.param_count() + classify_mlp.param_count();
  }

  std::size_t stimulus_dim() const override { return config.stimulus_dim; }

  nlohmann::json to_json() const {
    return {{"config", config}, {"params", params_to_json(parameters())}};
  }

  static SmRnnModel from_json(const nlohmann::json& j) {
    SMConfig cfg = j.at("config").get<SMConfig>();
    Rng scratch(0);
    SmRnnModel model(cfg, scratch);
    std::vector<NamedParam> ps = model.parameters();
    params_from_json(j.at("params"), ps);
    return model;
  }

 private:
  static SMConfig validated(SMConfig c) {
    c.validate();
    return c;
  }
};

}  // namespace smrnn
