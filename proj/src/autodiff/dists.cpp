#include "autodiff/dists.hpp"

#include <cmath>

#include "common/errors.hpp"

namespace racelab {

namespace {
constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * ln(2*pi)
}

void validate_gaussian(const DiagGaussian& d, const char* who) {
  if (d.mean.shape() != d.stddev.shape())
    throw DimensionError(std::string(who) + ": mean " + shape_str(d.mean.shape()) +
                         " vs stddev " + shape_str(d.stddev.shape()));
  for (int i = 0; i < d.stddev.size(); ++i)
    if (d.stddev[i] <= 0.0)
      throw DomainError(std::string(who) + ": non-positive stddev entry");
}

Tensor reparameterize(const DiagGaussian& dist, const Tensor& noise) {
  validate_gaussian(dist, "reparameterize");
  if (noise.shape() != dist.mean.shape())
    throw DimensionError("reparameterize: noise " + shape_str(noise.shape()) +
                         " vs distribution " + shape_str(dist.mean.shape()));
  return add(dist.mean, mul(dist.stddev, noise.detached()));
}

Tensor gaussian_kl(const DiagGaussian& posterior, const DiagGaussian& prior) {
  validate_gaussian(posterior, "gaussian_kl posterior");
  validate_gaussian(prior, "gaussian_kl prior");
  if (posterior.mean.shape() != prior.mean.shape())
    throw DimensionError("gaussian_kl: posterior " + shape_str(posterior.mean.shape()) +
                         " vs prior " + shape_str(prior.mean.shape()));
  int n = posterior.size();
  // KL = sum[ ln(sq/sp) + (sp^2 + (mp-mq)^2) / (2 sq^2) ] - n/2
  Tensor log_ratio = sub(log(prior.stddev), log(posterior.stddev));
  Tensor num = add(square(posterior.stddev), square(sub(posterior.mean, prior.mean)));
  Tensor den = affine(square(prior.stddev), 2.0, 0.0);
  Tensor total = sum(add(log_ratio, div(num, den)));
  return affine(total, 1.0, -0.5 * n);
}

Tensor gaussian_nll(const Tensor& target, const Tensor& mean, double stddev) {
  if (target.shape() != mean.shape())
    throw DimensionError("gaussian_nll: target " + shape_str(target.shape()) +
                         " vs mean " + shape_str(mean.shape()));
  if (stddev <= 0.0) throw DomainError("gaussian_nll: stddev must be positive");
  int n = target.size();
  Tensor sq = sum(square(sub(target.detached(), mean)));
  double constant = n * (kHalfLog2Pi + std::log(stddev));
  return affine(sq, 0.5 / (stddev * stddev), constant);
}

Tensor bernoulli_nll(const Tensor& target, const Tensor& logits) {
  if (target.shape() != logits.shape())
    throw DimensionError("bernoulli_nll: target " + shape_str(target.shape()) +
                         " vs logits " + shape_str(logits.shape()));
  for (int i = 0; i < target.size(); ++i)
    if (target[i] != 0.0 && target[i] != 1.0)
      throw DomainError("bernoulli_nll: non-binary target entry");
  Tensor t = target.detached();
  Tensor one_minus_t = affine(t, -1.0, 1.0);
  // BCE(t, l) = t*softplus(-l) + (1-t)*softplus(l), stable for large |l|.
  Tensor loss = add(mul(t, softplus(neg(logits))), mul(one_minus_t, softplus(logits)));
  return sum(loss);
}

}  // namespace racelab
