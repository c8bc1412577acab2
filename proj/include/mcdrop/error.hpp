#pragma once

#include <stdexcept>
#include <string>

namespace mcdrop {

// Malformed or missing user input: files, configs, CSV rows. Maps to exit code 2.
class InputError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes that do not fit the requested operation.
class DimensionError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

// NaN/Inf produced during computation, divergent training. Maps to exit code 3.
class NumericError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

}  // namespace mcdrop
