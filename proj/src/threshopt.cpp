#include "fdsched/threshopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fdsched {

OptimizerState OptimizerState::initial(int n_users, double step_size) {
  OptimizerState st;
  st.th = ThresholdVector::zeros(n_users);
  st.share_ul.assign(static_cast<std::size_t>(n_users), 0.0);
  st.share_dl.assign(static_cast<std::size_t>(n_users), 0.0);
  st.c = step_size;
  return st;
}

VirtualUser opt_step_inplace(OptimizerState& st, const PerformanceMatrix& pm, const TemporalDemands& d,
                             const VirtualUserSet& candidates) {
  const VirtualUser sel = tbs_select(pm, st.th, candidates);
  const auto n = static_cast<std::size_t>(st.n_users());

  // Running means: A_{t+1} = A_t + (1{selected} - A_t) / (t + 1).
  const double step = 1.0 / static_cast<double>(st.t + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const int user = static_cast<int>(i) + 1;
    st.share_ul[i] += step * ((sel.ul == user ? 1.0 : 0.0) - st.share_ul[i]);
    st.share_dl[i] += step * ((sel.dl == user ? 1.0 : 0.0) - st.share_dl[i]);
  }
  ++st.t;

  double lambda_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    lambda_min = std::min({lambda_min, st.th.lambda_ul[i], st.th.lambda_dl[i]});

  auto update = [&](std::vector<double>& lambda, const std::vector<double>& share,
                    const std::vector<double>& lower, int selected) {
    for (std::size_t i = 0; i < n; ++i) {
      const double old = lambda[i];
      const double hit = selected == static_cast<int>(i) + 1 ? 1.0 : 0.0;
      double next = old - st.c * (old - lambda_min) * (hit - lower[i]);
      const bool at_min = std::abs(old - lambda_min) <= st.min_tol;
      if (at_min && share[i] < lower[i]) next = old + st.c * (lower[i] - share[i]);
      if (at_min && lambda_min < 0.0) next += st.c;
      lambda[i] = next;
    }
  };
  update(st.th.lambda_ul, st.share_ul, d.lower_ul, sel.ul);
  update(st.th.lambda_dl, st.share_dl, d.lower_dl, sel.dl);
  return sel;
}

std::pair<OptimizerState, VirtualUser> opt_step(OptimizerState st, const PerformanceMatrix& pm,
                                                const TemporalDemands& d) {
  const VirtualUser v = opt_step_inplace(st, pm, d, VirtualUserSet::all(pm.n_users()));
  return {std::move(st), v};
}

SlacknessReport check_slackness(const OptimizerState& st, const TemporalDemands& d, double tol) {
  SlacknessReport rep;
  const int n = st.n_users();
  auto add = [&](bool uplink, int user, double lambda, double share, double lower, double upper) {
    SlacknessEntry e;
    e.uplink = uplink;
    e.user = user;
    e.lambda = lambda;
    e.share = share;
    e.lower = lower;
    e.upper = upper;
    e.product = std::abs(lambda * (share - lower));
    e.lower_gap = std::max(0.0, lower - share);
    e.upper_gap = std::max(0.0, share - upper);
    rep.max_product = std::max(rep.max_product, e.product);
    rep.max_abs_lambda = std::max(rep.max_abs_lambda, std::abs(lambda));
    rep.max_violation = std::max({rep.max_violation, e.lower_gap, e.upper_gap});
    rep.entries.push_back(e);
  };
  for (int u = 1; u <= n; ++u) {
    const auto k = static_cast<std::size_t>(u - 1);
    add(true, u, st.th.lambda_ul[k], st.share_ul[k], d.lower_ul[k], d.upper_ul[k]);
  }
  for (int u = 1; u <= n; ++u) {
    const auto k = static_cast<std::size_t>(u - 1);
    add(false, u, st.th.lambda_dl[k], st.share_dl[k], d.lower_dl[k], d.upper_dl[k]);
  }
  rep.converged = rep.max_product < tol && rep.max_violation <= tol;
  return rep;
}

}  // namespace fdsched
