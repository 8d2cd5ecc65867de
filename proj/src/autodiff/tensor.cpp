#include "autodiff/tensor.hpp"

#include "common/errors.hpp"

namespace racelab {

std::string shape_str(const std::vector<int>& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

namespace {
int shape_product(const std::vector<int>& shape) {
  int n = 1;
  for (int d : shape) {
    if (d <= 0) throw DimensionError("non-positive dimension in " + shape_str(shape));
    n *= d;
  }
  return n;
}
}  // namespace

Tensor::Tensor(std::vector<int> shape)
    : shape_(std::move(shape)),
      data_(std::make_shared<std::vector<double>>(
          static_cast<size_t>(shape_product(shape_)), 0.0)) {}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)),
      data_(std::make_shared<std::vector<double>>(std::move(data))) {
  if (static_cast<size_t>(shape_product(shape_)) != data_->size())
    throw DimensionError("shape " + shape_str(shape_) + " does not match data length " +
                         std::to_string(data_->size()));
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

Tensor Tensor::full(std::vector<int> shape, double v) {
  Tensor t(std::move(shape));
  auto& d = *t.data_;
  std::fill(d.begin(), d.end(), v);
  return t;
}

Tensor Tensor::from(std::vector<double> data) {
  int n = static_cast<int>(data.size());
  return Tensor({n}, std::move(data));
}

int Tensor::size() const {
  return data_ ? static_cast<int>(data_->size()) : 0;
}

std::span<const double> Tensor::data() const {
  if (!data_) return {};
  return {data_->data(), data_->size()};
}

double* Tensor::mutable_data() {
  if (attached())
    throw ContractError("refusing to mutate a tape-attached tensor");
  if (!data_) throw ContractError("mutable_data on empty tensor");
  if (data_.use_count() > 1)
    data_ = std::make_shared<std::vector<double>>(*data_);  // unshare
  return data_->data();
}

double Tensor::at(std::initializer_list<int> idx) const {
  if (static_cast<int>(idx.size()) != rank())
    throw DimensionError("index rank mismatch for " + shape_str(shape_));
  int flat = 0;
  int i = 0;
  for (int v : idx) {
    flat = flat * shape_[static_cast<size_t>(i)] + v;
    ++i;
  }
  return (*data_)[static_cast<size_t>(flat)];
}

double Tensor::item() const {
  if (size() != 1)
    throw ContractError("item() on tensor of shape " + shape_str(shape_));
  return (*data_)[0];
}

Tensor Tensor::detached() const {
  Tensor t = *this;
  t.tape_ = nullptr;
  t.node_ = -1;
  return t;
}

Tensor Tensor::clone() const {
  Tensor t;
  t.shape_ = shape_;
  t.data_ = data_ ? std::make_shared<std::vector<double>>(*data_) : nullptr;
  return t;
}

Tensor Tensor::attach(const Tensor& value, Tape* tape, int node) {
  Tensor t = value;
  t.tape_ = tape;
  t.node_ = node;
  return t;
}

}  // namespace racelab
