#pragma once

#include <cstddef>
#include <vector>

namespace stit {

/// Fenwick tree over nonnegative weights with append, point update and
/// inverse-prefix search. All operations are O(log n).
class WeightTree {
 public:
  std::size_t size() const { return weights_.size(); }
  double weight(std::size_t i) const { return weights_[i]; }

  void push_back(double w) {
    weights_.push_back(w);
    const std::size_t i = weights_.size();  // 1-based slot
    // Slot i covers (i - lowbit(i), i].
    const std::size_t lo = i - (i & (~i + 1));
    tree_.push_back(w + prefix(i - 1) - prefix(lo));
  }

  void set(std::size_t i, double w) {
    const double delta = w - weights_[i];
    weights_[i] = w;
    for (std::size_t k = i + 1; k <= tree_.size(); k += k & (~k + 1)) tree_[k - 1] += delta;
  }

  // Sum of weights[0, n).
  double prefix(std::size_t n) const {
    double s = 0.0;
    for (std::size_t k = n; k > 0; k -= k & (~k + 1)) s += tree_[k - 1];
    return s;
  }

  double total() const { return prefix(tree_.size()); }

  // Smallest index i with prefix(i + 1) > target. Callers should draw target
  // in [0, total()). Returns size() - 1 if rounding pushes target past the end.
  std::size_t find(double target) const {
    std::size_t pos = 0;
    std::size_t step = 1;
    while (step * 2 <= tree_.size()) step *= 2;
    for (; step > 0; step /= 2) {
      const std::size_t next = pos + step;
      if (next <= tree_.size() && tree_[next - 1] <= target) {
        pos = next;
        target -= tree_[next - 1];
      }
    }
    return pos < weights_.size() ? pos : weights_.size() - 1;
  }

 private:
  std::vector<double> weights_;
  std::vector<double> tree_;
};

}  // namespace stit
