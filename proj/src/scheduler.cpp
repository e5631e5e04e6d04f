#include "fdsched/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fdsched {

ThresholdVector ThresholdVector::zeros(int n_users) {
  const auto n = static_cast<std::size_t>(n_users);
  return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
}

// VirtualUserSet -----------------------------------------------------------------

VirtualUserSet::VirtualUserSet(int n_users)
    : n_(n_users), flags_((static_cast<std::size_t>(n_users) + 1) * (static_cast<std::size_t>(n_users) + 1), 0) {}

VirtualUserSet VirtualUserSet::all(int n_users) {
  VirtualUserSet s(n_users);
  for (int i = 0; i <= n_users; ++i)
    for (int j = 0; j <= n_users; ++j)
      if (VirtualUser{i, j}.valid(n_users)) s.insert({i, j});
  return s;
}

VirtualUserSet VirtualUserSet::hd_only(int n_users) {
  VirtualUserSet s(n_users);
  for (int u = 1; u <= n_users; ++u) {
    s.insert({u, 0});
    s.insert({0, u});
  }
  return s;
}

void VirtualUserSet::insert(VirtualUser v) {
  if (!v.valid(n_)) throw std::invalid_argument("not a virtual user of this cell");
  flags_[index(v)] = 1;
}

bool VirtualUserSet::empty() const {
  return std::none_of(flags_.begin(), flags_.end(), [](std::uint8_t f) { return f != 0; });
}

std::size_t VirtualUserSet::size() const {
  return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), std::uint8_t{1}));
}

std::vector<VirtualUser> VirtualUserSet::members() const {
  std::vector<VirtualUser> out;
  for (int i = 0; i <= n_; ++i)
    for (int j = 0; j <= n_; ++j)
      if (flags_[index({i, j})]) out.push_back({i, j});
  return out;
}

// ScheduleState --------------------------------------------------------------------

ScheduleState ScheduleState::fresh(int n_users) {
  ScheduleState st;
  st.count_ul.assign(static_cast<std::size_t>(n_users), 0);
  st.count_dl.assign(static_cast<std::size_t>(n_users), 0);
  return st;
}

double ScheduleState::share_ul(int user) const {
  return t > 0 ? static_cast<double>(count_ul[static_cast<std::size_t>(user - 1)]) / static_cast<double>(t) : 0.0;
}

double ScheduleState::share_dl(int user) const {
  return t > 0 ? static_cast<double>(count_dl[static_cast<std::size_t>(user - 1)]) / static_cast<double>(t) : 0.0;
}

void ScheduleState::record(VirtualUser choice, double utility) {
  ++t;
  if (choice.ul > 0) ++count_ul[static_cast<std::size_t>(choice.ul - 1)];
  if (choice.dl > 0) ++count_dl[static_cast<std::size_t>(choice.dl - 1)];
  utility_sum += utility;
  last_choice = choice;
}

bool ScheduleState::invariants_hold() const {
  std::int64_t sum_ul = 0, sum_dl = 0;
  for (std::size_t i = 0; i < count_ul.size(); ++i) {
    if (count_ul[i] < 0 || count_dl[i] < 0) return false;
    if (count_ul[i] + count_dl[i] > t) return false;
    sum_ul += count_ul[i];
    sum_dl += count_dl[i];
  }
  return sum_ul <= t && sum_dl <= t && sum_ul + sum_dl >= t;
}

// Selection --------------------------------------------------------------------------

VirtualUser tbs_select(const PerformanceMatrix& pm, const ThresholdVector& th, const VirtualUserSet& candidates) {
  const int n = pm.n_users();
  VirtualUser best{};
  double best_m = -std::numeric_limits<double>::infinity();
  bool found = false;
  // Row-major scan with strict improvement keeps the lowest (ul, dl) on ties.
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      const VirtualUser v{i, j};
      if (!v.valid(n) || !candidates.contains(v)) continue;
      const double m = th.measure(pm, v);
      if (!found || m > best_m) {
        best = v;
        best_m = m;
        found = true;
      }
    }
  }
  if (!found) throw EmptyCandidateSet("no candidate virtual user to select");
  return best;
}

ScheduleState state_update(ScheduleState st, VirtualUser choice, const PerformanceMatrix& pm) {
  st.record(choice, pm.utility(choice));
  return st;
}

WindowTargets WindowTargets::from(const TemporalDemands& d, int window) {
  d.validate();
  if (window < 1) throw std::invalid_argument("window must be at least 1");
  WindowTargets w;
  w.window = window;
  const double s = window;
  auto up = [s](double x) { return static_cast<std::int64_t>(std::ceil(s * x - 1e-9)); };
  auto down = [s](double x) { return static_cast<std::int64_t>(std::floor(s * x + 1e-9)); };
  for (std::size_t i = 0; i < d.lower_ul.size(); ++i) {
    w.need_ul.push_back(up(d.lower_ul[i]));
    w.need_dl.push_back(up(d.lower_dl[i]));
    w.cap_ul.push_back(down(d.upper_ul[i]));
    w.cap_dl.push_back(down(d.upper_dl[i]));
  }
  return w;
}

VirtualUserSet atbs_feasible_set(const ScheduleState& st, const WindowTargets& tg) {
  const int n = st.n_users();
  if (static_cast<int>(tg.need_ul.size()) != n) throw std::invalid_argument("targets/state size mismatch");
  if (st.t >= tg.window) throw std::invalid_argument("window already complete");

  // Slots left after the current one.
  const std::int64_t remaining = tg.window - st.t - 1;

  std::vector<std::int64_t> def_ul(static_cast<std::size_t>(n)), def_dl(static_cast<std::size_t>(n));
  std::int64_t sum_def_ul = 0, sum_def_dl = 0, sum_head = 0;
  for (std::size_t i = 0; i < def_ul.size(); ++i) {
    def_ul[i] = tg.need_ul[i] - st.count_ul[i];
    def_dl[i] = tg.need_dl[i] - st.count_dl[i];
    sum_def_ul += std::max<std::int64_t>(def_ul[i], 0);
    sum_def_dl += std::max<std::int64_t>(def_dl[i], 0);
    sum_head += (tg.cap_ul[i] - st.count_ul[i]) + (tg.cap_dl[i] - st.count_dl[i]);
  }

  VirtualUserSet out(n);
  for (int a = 0; a <= n; ++a) {
    for (int b = 0; b <= n; ++b) {
      const VirtualUser v{a, b};
      if (!v.valid(n)) continue;
      const auto ia = static_cast<std::size_t>(a - 1);
      const auto ib = static_cast<std::size_t>(b - 1);

      // Per-user upper caps: never push a count past floor(s * upper).
      if (a > 0 && st.count_ul[ia] + 1 > tg.cap_ul[ia]) continue;
      if (b > 0 && st.count_dl[ib] + 1 > tg.cap_dl[ib]) continue;

      // (i) and (ii): aggregate lower-demand deficits fit in the remaining slots.
      const std::int64_t du = sum_def_ul - (a > 0 && def_ul[ia] > 0 ? 1 : 0);
      const std::int64_t dd = sum_def_dl - (b > 0 && def_dl[ib] > 0 ? 1 : 0);
      if (du > remaining || dd > remaining) continue;

      // (iii): enough upper headroom to keep activating someone every slot.
      const std::int64_t head = sum_head - (a > 0 ? 1 : 0) - (b > 0 ? 1 : 0);
      if (remaining > head) continue;

      // (iv): no user needs UL and DL in more slots than remain.
      bool ok = true;
      for (int u = 1; u <= n && ok; ++u) {
        const auto k = static_cast<std::size_t>(u - 1);
        const std::int64_t xu = std::max<std::int64_t>(def_ul[k] - (u == a ? 1 : 0), 0);
        const std::int64_t xd = std::max<std::int64_t>(def_dl[k] - (u == b ? 1 : 0), 0);
        ok = xu + xd <= remaining;
      }
      if (ok) out.insert(v);
    }
  }
  return out;
}

VirtualUserSet atbs_feasible_set(const ScheduleState& st, const TemporalDemands& d, int window) {
  return atbs_feasible_set(st, WindowTargets::from(d, window));
}

VirtualUser atbs_select(const PerformanceMatrix& pm, const ThresholdVector& th, const ScheduleState& st,
                        const WindowTargets& targets) {
  const VirtualUserSet set = atbs_feasible_set(st, targets);
  if (set.empty()) throw EmptyCandidateSet("ATBS feasible set is empty: demands infeasible or state corrupted");
  return tbs_select(pm, th, set);
}

VirtualUser atbs_select(const PerformanceMatrix& pm, const ThresholdVector& th, const ScheduleState& st,
                        const TemporalDemands& d, int window) {
  return atbs_select(pm, th, st, WindowTargets::from(d, window));
}

VirtualUser hd_baseline_select(const PerformanceMatrix& pm, const ThresholdVector& th) {
  return tbs_select(pm, th, VirtualUserSet::hd_only(pm.n_users()));
}

}  // namespace fdsched
