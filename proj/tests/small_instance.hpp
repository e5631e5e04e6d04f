#pragma once

// Two-user instance whose six performance-matrix entries each take one of two
// equally likely values, independently: 64 equiprobable matrices. Threshold
// policies can be evaluated exactly by enumeration.

#include <array>
#include <cstdint>
#include <random>

#include "fdsched/scheduler.hpp"
#include "fdsched/threshopt.hpp"

namespace small_instance {

using fdsched::PerformanceMatrix;
using fdsched::TemporalDemands;
using fdsched::ThresholdVector;
using fdsched::VirtualUser;

struct Entry {
  VirtualUser v;
  double low;
  double high;
};

inline const std::array<Entry, 6>& entries() {
  static const std::array<Entry, 6> e = {{
      {{0, 1}, 1.0, 5.0},
      {{0, 2}, 2.0, 3.0},
      {{1, 0}, 0.5, 4.5},
      {{2, 0}, 3.0, 3.5},
      {{1, 2}, 4.0, 9.0},
      {{2, 1}, 2.0, 6.0},
  }};
  return e;
}

inline TemporalDemands demands() {
  TemporalDemands d = TemporalDemands::uniform(2, 0.0, 0.0);
  d.lower_ul = {0.3, 0.25};
  d.lower_dl = {0.2, 0.35};
  return d;
}

inline PerformanceMatrix atom(unsigned mask) {
  PerformanceMatrix pm(2);
  for (std::size_t k = 0; k < entries().size(); ++k) {
    const Entry& e = entries()[k];
    pm.set_utility(e.v.ul, e.v.dl, (mask >> k) & 1U ? e.high : e.low);
  }
  return pm;
}

struct Outcome {
  double utility = 0.0;
  std::array<double, 2> share_ul{};
  std::array<double, 2> share_dl{};

  bool meets(const TemporalDemands& d, double tol) const {
    for (std::size_t i = 0; i < 2; ++i)
      if (share_ul[i] < d.lower_ul[i] - tol || share_dl[i] < d.lower_dl[i] - tol) return false;
    return true;
  }
};

/// Exact long-run utility and shares of TBS with fixed thresholds.
inline Outcome evaluate(const ThresholdVector& th) {
  static const auto all = fdsched::VirtualUserSet::all(2);
  static const auto atoms = [] {
    std::array<PerformanceMatrix, 64> a;
    for (unsigned m = 0; m < 64; ++m) a[m] = atom(m);
    return a;
  }();
  Outcome out;
  for (const auto& pm : atoms) {
    const VirtualUser v = fdsched::tbs_select(pm, th, all);
    out.utility += pm.utility(v) / 64.0;
    if (v.ul) out.share_ul[static_cast<std::size_t>(v.ul - 1)] += 1.0 / 64.0;
    if (v.dl) out.share_dl[static_cast<std::size_t>(v.dl - 1)] += 1.0 / 64.0;
  }
  return out;
}

/// Best demand-meeting TBS over thresholds on {0, step, ..., top}^4.
inline Outcome grid_search(double step, double top) {
  const TemporalDemands d = demands();
  Outcome best;
  best.utility = -1.0;
  const int k = static_cast<int>(top / step + 0.5);
  ThresholdVector th = ThresholdVector::zeros(2);
  for (int a = 0; a <= k; ++a)
    for (int b = 0; b <= k; ++b)
      for (int c = 0; c <= k; ++c)
        for (int e = 0; e <= k; ++e) {
          th.lambda_ul = {a * step, b * step};
          th.lambda_dl = {c * step, e * step};
          const Outcome o = evaluate(th);
          if (o.meets(d, 1e-12) && o.utility > best.utility) best = o;
        }
  return best;
}

/// Online learning on i.i.d. atoms; returns the run's empirical outcome.
inline Outcome learn(std::uint64_t seed, std::int64_t slots, fdsched::OptimizerState* final_state = nullptr) {
  const TemporalDemands d = demands();
  std::mt19937_64 rng(seed);
  std::array<PerformanceMatrix, 64> atoms;
  for (unsigned m = 0; m < 64; ++m) atoms[m] = atom(m);
  fdsched::OptimizerState st = fdsched::OptimizerState::initial(2);
  const auto all = fdsched::VirtualUserSet::all(2);
  double sum = 0.0;
  for (std::int64_t t = 0; t < slots; ++t) {
    const PerformanceMatrix& pm = atoms[rng() & 63U];
    sum += pm.utility(fdsched::opt_step_inplace(st, pm, d, all));
  }
  Outcome out;
  out.utility = sum / static_cast<double>(slots);
  out.share_ul = {st.share_ul[0], st.share_ul[1]};
  out.share_dl = {st.share_dl[0], st.share_dl[1]};
  if (final_state) *final_state = st;
  return out;
}

}  // namespace small_instance
