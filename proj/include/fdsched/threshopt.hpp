#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fdsched/feasibility.hpp"
#include "fdsched/scheduler.hpp"

namespace fdsched {

/// Online threshold learner: running temporal shares plus thresholds.
struct OptimizerState {
  ThresholdVector th;
  std::vector<double> share_ul;
  std::vector<double> share_dl;
  std::int64_t t = 0;
  double c = 0.001;         // step size
  double min_tol = 1e-9;    // tolerance for "threshold equals the minimum"

  static OptimizerState initial(int n_users, double step_size = 0.001);
  int n_users() const { return th.n_users(); }
};

/// One slot: select with the current thresholds, update running shares, then
/// apply the multiplicative threshold update and the repair rules for
/// thresholds sitting at the minimum.
std::pair<OptimizerState, VirtualUser> opt_step(OptimizerState st, const PerformanceMatrix& pm,
                                                const TemporalDemands& d);

/// In-place variant with an explicit candidate set (e.g. HD-only baseline).
VirtualUser opt_step_inplace(OptimizerState& st, const PerformanceMatrix& pm, const TemporalDemands& d,
                             const VirtualUserSet& candidates);

struct SlacknessEntry {
  bool uplink = true;
  int user = 0;             // 1-based
  double lambda = 0.0;
  double share = 0.0;
  double lower = 0.0;
  double upper = 1.0;
  double product = 0.0;     // |lambda * (share - lower)|
  double lower_gap = 0.0;   // max(0, lower - share)
  double upper_gap = 0.0;   // max(0, share - upper)
};

struct SlacknessReport {
  std::vector<SlacknessEntry> entries;
  double max_product = 0.0;
  double max_abs_lambda = 0.0;
  double max_violation = 0.0;
  bool converged = false;
};

/// Complementary-slackness and demand check on a finished run: converged iff
/// every |lambda * (A - lower)| < tol and every share lies in
/// [lower - tol, upper + tol].
SlacknessReport check_slackness(const OptimizerState& st, const TemporalDemands& d, double tol);

}  // namespace fdsched
