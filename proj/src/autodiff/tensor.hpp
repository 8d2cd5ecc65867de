#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace racelab {

class Tape;

std::string shape_str(const std::vector<int>& shape);

// Dense row-major float64 array, optionally attached to a differentiation
// tape. Data is shared between copies and treated as immutable once attached;
// mutate only through mutable_data() on detached tensors you own.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);  // zeros
  Tensor(std::vector<int> shape, std::vector<double> data);

  static Tensor scalar(double v);
  static Tensor zeros(std::vector<int> shape);
  static Tensor full(std::vector<int> shape, double v);
  static Tensor from(std::vector<double> data);  // 1-D

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int size() const;
  int dim(int i) const { return shape_[static_cast<size_t>(i)]; }

  bool empty() const { return data_ == nullptr; }

  std::span<const double> data() const;
  double* mutable_data();

  double operator[](int flat) const { return (*data_)[static_cast<size_t>(flat)]; }
  double at(std::initializer_list<int> idx) const;
  double item() const;  // value of a single-element tensor

  bool attached() const { return node_ >= 0; }
  int node() const { return node_; }
  Tape* tape() const { return tape_; }

  // Same data buffer, no tape attachment.
  Tensor detached() const;

  // Deep copy of the data (detached).
  Tensor clone() const;

 private:
  friend class Tape;
  static Tensor attach(const Tensor& value, Tape* tape, int node);

  std::vector<int> shape_;
  std::shared_ptr<std::vector<double>> data_;
  Tape* tape_ = nullptr;
  int node_ = -1;
};

}  // namespace racelab
