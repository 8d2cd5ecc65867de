#include "autodiff/optim.hpp"

#include <cmath>

#include "common/errors.hpp"

namespace racelab {

Variable::Variable(std::string name, Tensor init)
    : name_(std::move(name)), value_(init.detached()) {}

Tensor Variable::use(Tape& tape) {
  if (cached_tape_ == tape.id() && cached_.attached()) return cached_;
  cached_ = tape.leaf(value_);
  cached_tape_ = tape.id();
  return cached_;
}

const Tensor* Variable::attachment_on(uint64_t tape_id) const {
  if (cached_tape_ == tape_id && cached_.attached()) return &cached_;
  return nullptr;
}

void Variable::assign(Tensor v) {
  if (v.shape() != value_.shape())
    throw DimensionError("assign to '" + name_ + "': shape " + shape_str(v.shape()) +
                         " vs " + shape_str(value_.shape()));
  value_ = v.detached();
  cached_tape_ = 0;
  cached_ = Tensor();
}

void adam_step(std::span<double> param, std::span<const double> grad,
               std::span<double> m, std::span<double> v, long t, double lr,
               double beta1, double beta2, double eps) {
  if (param.size() != grad.size() || param.size() != m.size() ||
      param.size() != v.size())
    throw DimensionError("adam_step: buffer sizes disagree");
  if (t < 1) throw ParameterError("adam_step: step index must be >= 1");
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (size_t i = 0; i < param.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    double mhat = m[i] / bc1;
    double vhat = v[i] / bc2;
    param[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

Adam::Adam(std::vector<Variable*> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  for (Variable* p : params_) {
    m_.emplace_back(static_cast<size_t>(p->value().size()), 0.0);
    v_.emplace_back(static_cast<size_t>(p->value().size()), 0.0);
  }
}

void Adam::step(const Gradients& grads) {
  ++t_;
  // Gather gradients for this optimizer's parameters; a parameter that did
  // not participate in the pass gets a zero gradient.
  std::vector<std::vector<double>> gs(params_.size());
  double ss = 0.0;
  for (size_t i = 0; i < params_.size(); ++i) {
    Variable* p = params_[i];
    size_t n = static_cast<size_t>(p->value().size());
    gs[i].assign(n, 0.0);
    const Tensor* att = p->attachment_on(grads.tape_id());
    if (att && grads.has(*att)) {
      auto g = grads.at(*att);
      std::copy(g.begin(), g.end(), gs[i].begin());
      for (double gv : g) ss += gv * gv;
    }
  }
  double norm = std::sqrt(ss);
  double scale = 1.0;
  if (cfg_.clip_norm > 0.0 && norm > cfg_.clip_norm) scale = cfg_.clip_norm / norm;
  for (size_t i = 0; i < params_.size(); ++i) {
    Variable* p = params_[i];
    if (scale != 1.0)
      for (double& gv : gs[i]) gv *= scale;
    Tensor v = p->value().clone();
    size_t n = static_cast<size_t>(v.size());
    adam_step({v.mutable_data(), n}, gs[i], m_[i], v_[i], t_, cfg_.lr, cfg_.beta1,
              cfg_.beta2, cfg_.eps);
    p->assign(std::move(v));
  }
}

Tensor init_dense(Rng& rng, int fan_in, int fan_out) {
  double a = std::sqrt(6.0 / (fan_in + fan_out));
  Tensor t({fan_in, fan_out});
  double* d = t.mutable_data();
  for (int i = 0; i < t.size(); ++i) d[i] = rng.uniform(-a, a);
  return t;
}

Tensor init_conv(Rng& rng, int out_ch, int in_ch, int kh, int kw) {
  double fan_in = in_ch * kh * kw;
  double fan_out = out_ch * kh * kw;
  double a = std::sqrt(6.0 / (fan_in + fan_out));
  Tensor t({out_ch, in_ch, kh, kw});
  double* d = t.mutable_data();
  for (int i = 0; i < t.size(); ++i) d[i] = rng.uniform(-a, a);
  return t;
}

Tensor init_zeros(std::vector<int> shape) { return Tensor::zeros(std::move(shape)); }

}  // namespace racelab
