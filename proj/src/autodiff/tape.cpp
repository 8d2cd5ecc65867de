#include "autodiff/tape.hpp"

#include <atomic>
#include <cmath>

#include "common/errors.hpp"

namespace racelab {

namespace {
std::atomic<uint64_t> g_next_tape_id{1};
}

double* GradAccum::buf(int node) {
  auto& slot = grads_[static_cast<size_t>(node)];
  if (!slot) slot.emplace(static_cast<size_t>(sizes_[static_cast<size_t>(node)]), 0.0);
  return slot->data();
}

void Gradients::check(const Tensor& t) const {
  if (!t.attached()) throw ContractError("gradient lookup for a detached tensor");
  if (t.tape() == nullptr || t.tape()->id() != tape_id_)
    throw ContractError("gradient lookup for a tensor from a different tape");
}

bool Gradients::has(const Tensor& t) const {
  check(t);
  return grads_[static_cast<size_t>(t.node())].has_value();
}

std::span<const double> Gradients::at(const Tensor& t) const {
  check(t);
  const auto& slot = grads_[static_cast<size_t>(t.node())];
  if (!slot) throw ContractError("no gradient recorded for this tensor");
  return {slot->data(), slot->size()};
}

Tensor Gradients::tensor_for(const Tensor& t) const {
  check(t);
  const auto& slot = grads_[static_cast<size_t>(t.node())];
  if (!slot) return Tensor::zeros(t.shape());
  return Tensor(t.shape(), *slot);
}

double Gradients::l2_norm() const {
  double ss = 0.0;
  for (size_t i = 0; i < grads_.size(); ++i) {
    if (!is_leaf_[i] || !grads_[i]) continue;
    for (double g : *grads_[i]) ss += g * g;
  }
  return std::sqrt(ss);
}

Tape::Tape() : id_(g_next_tape_id.fetch_add(1)) {}

Tensor Tape::leaf(const Tensor& value) {
  if (consumed_) throw StateError("tape already consumed by backward");
  if (value.empty()) throw ContractError("cannot register an empty tensor");
  nodes_.push_back({nullptr});
  sizes_.push_back(value.size());
  is_leaf_.push_back(true);
  return Tensor::attach(value.detached(), this, static_cast<int>(nodes_.size()) - 1);
}

Tensor Tape::emit(Tensor value, BackwardFn backward) {
  if (consumed_) throw StateError("tape already consumed by backward");
  nodes_.push_back({std::move(backward)});
  sizes_.push_back(value.size());
  is_leaf_.push_back(false);
  return Tensor::attach(value, this, static_cast<int>(nodes_.size()) - 1);
}

Gradients Tape::backward(const Tensor& loss) {
  if (consumed_) throw StateError("tape already consumed by backward");
  if (!loss.attached() || loss.tape() != this)
    throw ContractError("loss is not recorded on this tape");
  if (loss.size() != 1)
    throw ContractError("backward requires a scalar loss, got shape " +
                        shape_str(loss.shape()));
  consumed_ = true;

  GradAccum acc(sizes_);
  acc.buf(loss.node())[0] = 1.0;
  // Nodes are recorded in topological order, so one reverse sweep visits every
  // node after all of its consumers.
  for (int i = loss.node(); i >= 0; --i) {
    const auto& node = nodes_[static_cast<size_t>(i)];
    if (!node.backward || !acc.has(i)) continue;
    node.backward(acc.get(i).data(), acc);
  }
  return Gradients(id_, std::move(acc.grads_), is_leaf_);
}

}  // namespace racelab
