#include "mcdrop/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "mcdrop/error.hpp"

namespace mcdrop {

namespace {

std::size_t element_count(const std::vector<std::size_t>& shape)
{
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_str(shape));
    n *= d;
  }
  return n;
}

}  // namespace

std::string shape_str(const std::vector<std::size_t>& shape)
{
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill)
{
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data))
{
  if (element_count(shape_) != data_.size())
    throw DimensionError("shape " + mcdrop::shape_str(shape_) + " does not match " +
                         std::to_string(data_.size()) + " values");
}

Tensor Tensor::row(std::vector<double> values)
{
  std::size_t n = values.size();
  return Tensor({1, n}, std::move(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows)
{
  std::size_t r = rows.size();
  std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

std::size_t Tensor::rows() const
{
  if (shape_.size() == 1) return 1;
  if (shape_.size() != 2) throw DimensionError("expected rank-2 tensor, got " + mcdrop::shape_str(shape_));
  return shape_[0];
}

std::size_t Tensor::cols() const
{
  if (shape_.size() == 1) return shape_[0];
  if (shape_.size() != 2) throw DimensionError("expected rank-2 tensor, got " + mcdrop::shape_str(shape_));
  return shape_[1];
}

bool Tensor::all_finite() const
{
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string Tensor::shape_str() const { return mcdrop::shape_str(shape_); }

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::add_scaled(const Tensor& other, double alpha)
{
  if (!same_shape(other))
    throw DimensionError("add_scaled: " + shape_str() + " vs " + other.shape_str());
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += alpha * other.data_[i];
}

double Tensor::squared_norm() const
{
  return std::inner_product(data_.begin(), data_.end(), data_.begin(), 0.0);
}

}  // namespace mcdrop
