#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fdsched/ratemodel.hpp"

namespace fdsched {

/// Lower/upper temporal-share demands per user and direction (0-based user id).
struct TemporalDemands {
  std::vector<double> lower_ul;
  std::vector<double> upper_ul;
  std::vector<double> lower_dl;
  std::vector<double> upper_dl;

  int n_users() const { return static_cast<int>(lower_ul.size()); }

  /// Lower bounds as given, uppers all 1.
  static TemporalDemands lower_only(std::vector<double> lower_ul, std::vector<double> lower_dl);
  /// Same lower value for every user and direction, uppers all 1.
  static TemporalDemands uniform(int n_users, double lower_ul, double lower_dl);
  /// Equality demands: lower == upper.
  static TemporalDemands equality(std::vector<double> w_ul, std::vector<double> w_dl);

  /// Throws std::invalid_argument on size mismatch, entries outside [0,1] or
  /// lower > upper.
  void validate() const;
};

/// Long-term equality-demand test: the four-inequality region. Comparisons
/// carry an absolute slack of 1e-9.
bool feasible_longterm(std::span<const double> w_ul, std::span<const double> w_dl);

/// True iff some equality demand vector inside the boxes is long-term feasible.
bool feasible_longterm_box(const TemporalDemands& d);

/// Integer slot counts a[i][j] over virtual users v_{i,j}, i,j in {0..n}, for
/// a window of s slots.
class SlotAllocation {
 public:
  SlotAllocation() = default;
  SlotAllocation(int n_users, int window);

  int n_users() const { return n_; }
  int window() const { return s_; }
  int at(int ul, int dl) const { return a_[index(ul, dl)]; }
  int& at(int ul, int dl) { return a_[index(ul, dl)]; }

  int total() const;
  int ul_count(int user) const;  // 1-based user number
  int dl_count(int user) const;

 private:
  std::size_t index(int ul, int dl) const {
    return static_cast<std::size_t>(ul) * (static_cast<std::size_t>(n_) + 1) + static_cast<std::size_t>(dl);
  }

  int n_ = 0;
  int s_ = 0;
  std::vector<int> a_;
};

/// Fractional shares a[i][j] of virtual users under long-term fairness.
struct FractionalAllocation {
  int n_users = 0;
  std::vector<double> a;  // (n+1) x (n+1), row-major

  double at(int ul, int dl) const {
    return a[static_cast<std::size_t>(ul) * (static_cast<std::size_t>(n_users) + 1) + static_cast<std::size_t>(dl)];
  }
  double& at(int ul, int dl) {
    return a[static_cast<std::size_t>(ul) * (static_cast<std::size_t>(n_users) + 1) + static_cast<std::size_t>(dl)];
  }
  double total() const;
};

enum class ShortTermStatus { Feasible, NonIntegral, Infeasible };

struct ShortTermResult {
  ShortTermStatus status = ShortTermStatus::Infeasible;
  std::optional<SlotAllocation> allocation;
  std::string diagnosis;

  explicit operator bool() const { return status == ShortTermStatus::Feasible; }
};

/// Short-term equality-demand test for window s on integer slot counts
/// k = s * w. Solved as an integer transportation problem.
ShortTermResult feasible_shortterm_counts(int s, std::span<const int> k_ul, std::span<const int> k_dl);

/// As above for fractional demands; s * w must be integral within 1e-9.
ShortTermResult feasible_shortterm(int s, std::span<const double> w_ul, std::span<const double> w_dl);

/// Checks the five slot-count conditions directly: row sums, column sums,
/// total, zero diagonal, non-negativity.
bool satisfies_slot_conditions(const SlotAllocation& a, std::span<const int> k_ul, std::span<const int> k_dl);

/// Round-robin schedule realising `alloc`: virtual users in lexicographic
/// (ul, dl) order, each repeated a[ul][dl] times contiguously.
std::vector<VirtualUser> witness_schedule(const SlotAllocation& alloc);

/// Fractional round-robin shares meeting long-term equality demands: FD
/// fraction first by greedy pairing, HD fractions for the residuals.
/// Throws std::invalid_argument if the demands are infeasible.
FractionalAllocation longterm_witness(std::span<const double> w_ul, std::span<const double> w_dl);

}  // namespace fdsched
