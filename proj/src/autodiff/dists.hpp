#pragma once

#include "autodiff/ops.hpp"
#include "autodiff/tensor.hpp"

namespace racelab {

// Diagonal Gaussian. mean and stddev share a shape; stddev entries must stay
// strictly positive (heads enforce this with softplus + floor).
struct DiagGaussian {
  Tensor mean;
  Tensor stddev;

  int size() const { return mean.size(); }
};

void validate_gaussian(const DiagGaussian& d, const char* who);

// mean + stddev (.) noise. The noise is treated as a constant: gradients flow
// to mean and stddev only. DomainError if any stddev entry <= 0.
Tensor reparameterize(const DiagGaussian& dist, const Tensor& noise);

// Closed-form KL(posterior || prior) for diagonal Gaussians, summed over all
// dimensions; differentiable with respect to both parameter sets.
Tensor gaussian_kl(const DiagGaussian& posterior, const DiagGaussian& prior);

// Negative log-likelihood of target under N(mean, stddev^2 I) with a fixed
// scalar stddev. Includes the 0.5*ln(2*pi*sigma^2) constant per dimension, so
// a perfect 1-D unit-variance fit scores 0.5*ln(2*pi) != 0.
Tensor gaussian_nll(const Tensor& target, const Tensor& mean, double stddev);

// Sum of per-element binary cross-entropy from logits, computed via the
// stable softplus form; targets must be exactly 0 or 1.
Tensor bernoulli_nll(const Tensor& target, const Tensor& logits);

}  // namespace racelab
