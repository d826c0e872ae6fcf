#pragma once

#include <stdexcept>
#include <string>

namespace berrywave {

// Grid too coarse for nodal extraction.
class resolution_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Node or panel budget exceeded.
class budget_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Zero-variance or singular input.
class degenerate_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class sample_size_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace berrywave
