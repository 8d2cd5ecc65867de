#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "autodiff/tensor.hpp"

namespace racelab {

// Gradient buffers indexed by tape node, allocated lazily while walking the
// tape backwards. Backward rules accumulate into buf(node).
class GradAccum {
 public:
  explicit GradAccum(const std::vector<int>& sizes) : grads_(sizes.size()), sizes_(sizes) {}

  // Zero-initialized buffer for a node's gradient; node must be valid.
  double* buf(int node);
  bool has(int node) const { return grads_[static_cast<size_t>(node)].has_value(); }
  const std::vector<double>& get(int node) const { return *grads_[static_cast<size_t>(node)]; }

 private:
  friend class Gradients;
  friend class Tape;
  std::vector<std::optional<std::vector<double>>> grads_;
  const std::vector<int>& sizes_;
};

using BackwardFn = std::function<void(const double* grad_out, GradAccum& acc)>;

// Result of Tape::backward. Gradients are looked up by the tensor that was
// produced on (or registered with) the tape.
class Gradients {
 public:
  bool has(const Tensor& t) const;
  std::span<const double> at(const Tensor& t) const;
  Tensor tensor_for(const Tensor& t) const;  // gradient with t's shape
  double l2_norm() const;                    // over all stored leaf gradients
  uint64_t tape_id() const { return tape_id_; }

 private:
  friend class Tape;
  Gradients(uint64_t tape_id, std::vector<std::optional<std::vector<double>>> grads,
            std::vector<bool> is_leaf)
      : tape_id_(tape_id), grads_(std::move(grads)), is_leaf_(std::move(is_leaf)) {}

  void check(const Tensor& t) const;

  uint64_t tape_id_;
  std::vector<std::optional<std::vector<double>>> grads_;
  std::vector<bool> is_leaf_;
};

// Append-only record of differentiable operations. Single-threaded; one
// backward pass consumes the tape.
class Tape {
 public:
  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Register a value whose gradient should be collected (parameters, or any
  // tensor backward() must report on). Constants simply stay detached.
  Tensor leaf(const Tensor& value);

  // Record an operation node; returns the produced tensor. Used by ops.
  Tensor emit(Tensor value, BackwardFn backward);

  // Reverse sweep from a scalar loss recorded on this tape. Gradients flow to
  // every node; lookups are meaningful for leaves and intermediate outputs.
  Gradients backward(const Tensor& loss);

  uint64_t id() const { return id_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  bool consumed() const { return consumed_; }

 private:
  struct Node {
    BackwardFn backward;  // null for leaves
  };

  std::vector<Node> nodes_;
  std::vector<int> sizes_;
  std::vector<bool> is_leaf_;
  bool consumed_ = false;
  uint64_t id_;
};

}  // namespace racelab
