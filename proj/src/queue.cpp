#include "jcl/queue.hpp"

#include <algorithm>
#include <stdexcept>

namespace jcl {

NegativeQueue::NegativeQueue(std::size_t capacity, std::size_t dim) : storage_(capacity, dim) {
  if (capacity == 0) throw std::invalid_argument("NegativeQueue: capacity must be positive");
}

std::size_t NegativeQueue::push(std::span<const Vector> keys) {
  std::size_t evicted = 0;
  for (const Vector& k : keys) {
    if (k.size() != dim()) throw std::invalid_argument("NegativeQueue::push: dimension mismatch");
    const std::size_t slot = write_index();
    std::copy(k.begin(), k.end(), storage_.row(slot).begin());
    if (full()) {
      head_ = (head_ + 1) % capacity();
      ++evicted;
    } else {
      ++size_;
    }
  }
  return evicted;
}

std::vector<Vector> NegativeQueue::entries() const {
  std::vector<Vector> out;
  out.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) {
    const auto row = storage_.row((head_ + i) % capacity());
    out.emplace_back(row.begin(), row.end());
  }
  return out;
}

Matrix NegativeQueue::snapshot() const {
  Matrix m(size_, dim());
  for (std::size_t i = 0; i < size_; ++i) {
    const auto row = storage_.row((head_ + i) % capacity());
    std::copy(row.begin(), row.end(), m.row(i).begin());
  }
  return m;
}

}  // namespace jcl
