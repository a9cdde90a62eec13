#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace mlmc::detail {

// Scratch array kept on the stack when it fits, on the heap otherwise.
template <std::size_t Inline>
class SmallBuffer {
 public:
  explicit SmallBuffer(std::size_t n) : size_(n) {
    if (n > Inline) heap_.resize(n);
  }

  double* data() { return size_ > Inline ? heap_.data() : stack_.data(); }
  const double* data() const { return size_ > Inline ? heap_.data() : stack_.data(); }
  std::size_t size() const { return size_; }

  double& operator[](std::size_t i) { return data()[i]; }
  double operator[](std::size_t i) const { return data()[i]; }

  double* begin() { return data(); }
  double* end() { return data() + size_; }

  std::span<double> span() { return {data(), size_}; }
  std::span<const double> span() const { return {data(), size_}; }

 private:
  std::size_t size_;
  std::array<double, Inline> stack_;
  std::vector<double> heap_;
};

}  // namespace mlmc::detail
