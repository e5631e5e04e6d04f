#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

namespace fdsched::detail {

/// Edmonds-Karp on a dense capacity matrix. The graphs here have at most a
/// few dozen nodes, so O(V^2) adjacency scans are fine.
template <typename T>
class DenseMaxFlow {
 public:
  explicit DenseMaxFlow(std::size_t nodes, T eps = T{})
      : n_(nodes), eps_(eps), cap_(nodes * nodes, T{}), flow_(nodes * nodes, T{}) {}

  void add_capacity(std::size_t from, std::size_t to, T c) { cap_[from * n_ + to] += c; }

  T flow(std::size_t from, std::size_t to) const { return flow_[from * n_ + to]; }

  T run(std::size_t source, std::size_t sink) {
    T total{};
    std::vector<std::size_t> parent(n_);
    for (;;) {
      std::fill(parent.begin(), parent.end(), kNone);
      parent[source] = source;
      std::queue<std::size_t> q;
      q.push(source);
      while (!q.empty() && parent[sink] == kNone) {
        const std::size_t u = q.front();
        q.pop();
        for (std::size_t v = 0; v < n_; ++v) {
          if (parent[v] == kNone && residual(u, v) > eps_) {
            parent[v] = u;
            q.push(v);
          }
        }
      }
      if (parent[sink] == kNone) return total;

      T push = std::numeric_limits<T>::max();
      for (std::size_t v = sink; v != source; v = parent[v]) push = std::min(push, residual(parent[v], v));
      for (std::size_t v = sink; v != source; v = parent[v]) {
        const std::size_t u = parent[v];
        // Cancel reverse flow first.
        const T back = std::min(push, flow_[v * n_ + u]);
        flow_[v * n_ + u] -= back;
        flow_[u * n_ + v] += push - back;
      }
      total += push;
    }
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  T residual(std::size_t u, std::size_t v) const {
    return cap_[u * n_ + v] - flow_[u * n_ + v] + flow_[v * n_ + u];
  }

  std::size_t n_;
  T eps_;
  std::vector<T> cap_;
  std::vector<T> flow_;
};

}  // namespace fdsched::detail
