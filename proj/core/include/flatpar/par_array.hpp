#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace flatpar {

// Immutable flat value vector. Element types are restricted to fixed-size
// plain values (numbers, small tuples/structs); no jagged nesting.
template <typename E>
class ParArray {
 public:
  using value_type = E;

  ParArray() = default;
  explicit ParArray(std::vector<E> v) : values_(std::move(v)) {}
  ParArray(std::initializer_list<E> init) : values_(init) {}

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  const E& operator[](std::size_t i) const { return values_[i]; }
  const std::vector<E>& values() const { return values_; }

  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  bool operator==(const ParArray&) const = default;

 private:
  std::vector<E> values_;
};

// Binary operator with neutral element. Associativity is a caller
// obligation (asserted by property tests, not verified per call).
template <typename E, typename Op>
struct Monoid {
  Op op;
  E neutral;
  bool commutative = false;
};

template <typename E, typename Op>
Monoid<E, Op> make_monoid(Op op, E neutral, bool commutative = false) {
  return Monoid<E, Op>{std::move(op), std::move(neutral), commutative};
}

template <typename E>
auto sum_monoid() {
  return make_monoid([](E a, E b) { return a + b; }, E{}, true);
}

template <typename E>
auto max_monoid(E lowest) {
  return make_monoid([](E a, E b) { return a < b ? b : a; }, lowest, true);
}

// Flat data vector partitioned into contiguous segments by a start-flag
// array: flags[i] == 1 marks the first element of a segment.
template <typename E>
class SegmentedVector {
 public:
  SegmentedVector(ParArray<E> data, ParArray<std::uint8_t> flags)
      : data_(std::move(data)), flags_(std::move(flags)) {
    if (data_.size() != flags_.size())
      throw std::invalid_argument("SegmentedVector: flag/data length mismatch");
    if (!data_.empty() && flags_[0] != 1)
      throw std::invalid_argument("SegmentedVector: first flag must be set");
    for (std::size_t i = 0; i < flags_.size(); ++i)
      if (flags_[i]) ++segment_count_;
  }

  const ParArray<E>& data() const { return data_; }
  const ParArray<std::uint8_t>& flags() const { return flags_; }
  std::size_t segment_count() const { return segment_count_; }

 private:
  ParArray<E> data_;
  ParArray<std::uint8_t> flags_;
  std::size_t segment_count_ = 0;
};

}  // namespace flatpar
