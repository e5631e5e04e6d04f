#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fdsched/feasibility.hpp"
#include "fdsched/ratemodel.hpp"

namespace fdsched {

/// Per-user Lagrangian thresholds (0-based user id). The idle index of a
/// virtual user contributes 0 to the scheduling measure.
struct ThresholdVector {
  std::vector<double> lambda_ul;
  std::vector<double> lambda_dl;

  static ThresholdVector zeros(int n_users);

  int n_users() const { return static_cast<int>(lambda_ul.size()); }
  double ul(int user) const { return user == 0 ? 0.0 : lambda_ul[static_cast<std::size_t>(user - 1)]; }
  double dl(int user) const { return user == 0 ? 0.0 : lambda_dl[static_cast<std::size_t>(user - 1)]; }

  /// R_{i,j} + lambda_ul(i) + lambda_dl(j).
  double measure(const PerformanceMatrix& pm, VirtualUser v) const {
    return pm.utility(v) + ul(v.ul) + dl(v.dl);
  }
};

/// Membership flags over the virtual users of an n-user cell.
class VirtualUserSet {
 public:
  VirtualUserSet() = default;
  explicit VirtualUserSet(int n_users);

  /// Every v_{i,j} with i != j.
  static VirtualUserSet all(int n_users);
  /// Only v_{i,0} and v_{0,j}.
  static VirtualUserSet hd_only(int n_users);

  int n_users() const { return n_; }
  bool contains(VirtualUser v) const { return flags_[index(v)] != 0; }
  void insert(VirtualUser v);
  void erase(VirtualUser v) { flags_[index(v)] = 0; }
  bool empty() const;
  std::size_t size() const;
  std::vector<VirtualUser> members() const;

 private:
  std::size_t index(VirtualUser v) const {
    return static_cast<std::size_t>(v.ul) * (static_cast<std::size_t>(n_) + 1) + static_cast<std::size_t>(v.dl);
  }

  int n_ = 0;
  std::vector<std::uint8_t> flags_;
};

/// Activation counts and utility of one scheduler run.
struct ScheduleState {
  std::int64_t t = 0;
  std::vector<std::int64_t> count_ul;
  std::vector<std::int64_t> count_dl;
  double utility_sum = 0.0;
  VirtualUser last_choice{};

  static ScheduleState fresh(int n_users);

  int n_users() const { return static_cast<int>(count_ul.size()); }
  double share_ul(int user) const;
  double share_dl(int user) const;
  double mean_utility() const { return t > 0 ? utility_sum / static_cast<double>(t) : 0.0; }

  /// In-place form of state_update.
  void record(VirtualUser choice, double utility);

  /// Temporal-share accounting invariants for half-duplex users.
  bool invariants_hold() const;
};

class EmptyCandidateSet : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Argmax of the scheduling measure over `candidates`; ties go to the lowest
/// (ul, dl) pair. Throws EmptyCandidateSet if there is nothing to pick.
VirtualUser tbs_select(const PerformanceMatrix& pm, const ThresholdVector& th, const VirtualUserSet& candidates);

ScheduleState state_update(ScheduleState st, VirtualUser choice, const PerformanceMatrix& pm);

/// Integer per-window targets: ceil(s * lower) and floor(s * upper), with
/// 1e-9 snapping so that exact fractions like 1/8 * 8 land on integers.
struct WindowTargets {
  int window = 0;
  std::vector<std::int64_t> need_ul;
  std::vector<std::int64_t> need_dl;
  std::vector<std::int64_t> cap_ul;
  std::vector<std::int64_t> cap_dl;

  static WindowTargets from(const TemporalDemands& d, int window);
};

/// Virtual users that keep the window's demands satisfiable if activated in
/// the current slot (slot st.t + 1 of the window).
VirtualUserSet atbs_feasible_set(const ScheduleState& st, const WindowTargets& targets);
VirtualUserSet atbs_feasible_set(const ScheduleState& st, const TemporalDemands& d, int window);

/// TBS restricted to the ATBS feasible set. Throws EmptyCandidateSet if the
/// set is empty, which only happens for infeasible demands or a corrupted state.
VirtualUser atbs_select(const PerformanceMatrix& pm, const ThresholdVector& th, const ScheduleState& st,
                        const WindowTargets& targets);
VirtualUser atbs_select(const PerformanceMatrix& pm, const ThresholdVector& th, const ScheduleState& st,
                        const TemporalDemands& d, int window);

/// TBS over HD virtual users only.
VirtualUser hd_baseline_select(const PerformanceMatrix& pm, const ThresholdVector& th);

}  // namespace fdsched
