#pragma once

#include <span>
#include <string>
#include <vector>

#include "autodiff/tape.hpp"
#include "autodiff/tensor.hpp"
#include "common/rng.hpp"

namespace racelab {

// A named trainable parameter. use() registers the value as a tape leaf once
// per tape, so a parameter referenced twice in one forward pass accumulates
// both gradient contributions on a single node.
class Variable {
 public:
  Variable(std::string name, Tensor init);

  const std::string& name() const { return name_; }
  const Tensor& value() const { return value_; }
  Tensor use(Tape& tape);
  void assign(Tensor v);

  // The leaf this variable holds on the given tape, or null if it was not
  // used there. Lets optimizers look up gradients after backward.
  const Tensor* attachment_on(uint64_t tape_id) const;

 private:
  std::string name_;
  Tensor value_;
  uint64_t cached_tape_ = 0;
  Tensor cached_;
};

// One Adam update with bias correction; t is the 1-based step index.
void adam_step(std::span<double> param, std::span<const double> grad,
               std::span<double> m, std::span<double> v, long t, double lr,
               double beta1, double beta2, double eps);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-7;
  double clip_norm = 0.0;  // 0 disables global-norm clipping
};

class Adam {
 public:
  Adam(std::vector<Variable*> params, AdamConfig cfg);

  // Applies one update from the gradients of a backward pass. Parameters
  // without a recorded gradient are treated as having zero gradient.
  void step(const Gradients& grads);

  long steps() const { return t_; }
  const std::vector<Variable*>& params() const { return params_; }

 private:
  std::vector<Variable*> params_;
  std::vector<std::vector<double>> m_, v_;
  long t_ = 0;
  AdamConfig cfg_;
};

// Weight initializers (Glorot uniform scaling).
Tensor init_dense(Rng& rng, int fan_in, int fan_out);          // [in, out]
Tensor init_conv(Rng& rng, int out_ch, int in_ch, int kh, int kw);
Tensor init_zeros(std::vector<int> shape);

}  // namespace racelab
