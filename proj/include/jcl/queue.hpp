#ifndef JCL_QUEUE_HPP
#define JCL_QUEUE_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "jcl/numerics.hpp"

namespace jcl {

/// Fixed-capacity FIFO ring buffer of negative keys.
class NegativeQueue {
 public:
  NegativeQueue(std::size_t capacity, std::size_t dim);

  std::size_t capacity() const { return storage_.rows(); }
  std::size_t dim() const { return storage_.cols(); }
  std::size_t size() const { return size_; }
  bool full() const { return size_ == capacity(); }
  /// Slot the next push writes to.
  std::size_t write_index() const { return (head_ + size_) % capacity(); }

  /// Appends `keys` in order, evicting the oldest entries as needed.
  /// Returns the number of entries evicted.
  std::size_t push(std::span<const Vector> keys);

  /// Entries oldest first.
  std::vector<Vector> entries() const;
  /// Entries oldest first as rows of a size() x dim() matrix.
  Matrix snapshot() const;

 private:
  Matrix storage_;
  std::size_t head_ = 0;  // oldest entry
  std::size_t size_ = 0;
};

}  // namespace jcl

#endif  // JCL_QUEUE_HPP
