#include "fdsched/ratemodel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fdsched {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative slack when testing candidate points against the max-min target;
// candidates come from closed-form inversions and may land a few ulps short.
constexpr double kTargetSlack = 1e-9;
constexpr double kTieTol = 1e-12;

double ratio(double num, double den) {
  if (den > 0.0) return num / den;
  return num > 0.0 ? kInf : 0.0;
}

/// SINRs of an FD virtual user written in a form that exposes the power
/// coupling:
///   UL branch r:  p_ul * a[r] / (p_dl * b[r] + c[r])   (UL SINR = min over r)
///   DL:           p_dl * e / (p_ul * f + k)
struct FdCoupling {
  std::array<double, 2> a{};
  std::array<double, 2> b{};
  std::array<double, 2> c{};
  int branches = 1;
  double e = 0.0;
  double f = 0.0;
  double k = 0.0;

  double sinr_ul(double pu, double pd) const {
    double s = kInf;
    for (int r = 0; r < branches; ++r) s = std::min(s, ratio(pu * a[r], pd * b[r] + c[r]));
    return s;
  }
  double sinr_dl(double pu, double pd) const { return ratio(pd * e, pu * f + k); }
};

FdCoupling coupling(VirtualUser v, Mode mode, const ChannelRealization& ch, const LinkBudget& lb) {
  const double gi = ch.g(v.ul - 1);
  const double gj = ch.g(v.dl - 1);
  const double hij = ch.h(v.ul - 1, v.dl - 1);
  FdCoupling cp;
  cp.a[0] = gi;
  cp.b[0] = lb.psi_b;
  cp.c[0] = lb.noise_ul;
  cp.e = gj;
  cp.k = lb.noise_dl;
  if (mode == Mode::FdIn) {
    cp.f = hij;
  } else {
    // The DL user must decode the UL signal before cancelling it.
    cp.branches = 2;
    cp.a[1] = hij;
    cp.b[1] = gj;
    cp.c[1] = lb.noise_dl;
    cp.f = 0.0;
  }
  return cp;
}

/// Positive root of A x^2 + B x - Q = 0 with A, B >= 0, Q >= 0, in a form
/// that stays accurate when A -> 0.
double positive_root(double quad, double lin, double q) {
  if (q <= 0.0) return 0.0;
  const double disc = lin * lin + 4.0 * quad * q;
  const double den = lin + std::sqrt(disc);
  return den > 0.0 ? 2.0 * q / den : kInf;
}

void check_fd(VirtualUser v, Mode mode, const ChannelRealization& ch) {
  if (!v.is_fd() || v.ul == v.dl) throw std::invalid_argument("FD mode requires two distinct users");
  if (v.ul > ch.n_users || v.dl > ch.n_users || v.ul < 0 || v.dl < 0)
    throw std::invalid_argument("virtual user index out of range");
  if (mode != Mode::FdIn && mode != Mode::FdSic) throw std::invalid_argument("not an FD mode");
}

struct Candidate {
  double pu = 0.0;
  double pd = 0.0;
};

}  // namespace

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::HdUl: return "HD-UL";
    case Mode::HdDl: return "HD-DL";
    case Mode::FdIn: return "FD-IN";
    case Mode::FdSic: return "FD-SIC";
  }
  return "?";
}

LinkBudget LinkBudget::from(const ChannelParams& ch, const CellDrop& drop) {
  LinkBudget lb;
  lb.noise_ul = ch.noise_ul_w();
  lb.noise_dl = ch.noise_dl_w();
  lb.psi_b = ch.psi_b();
  lb.gamma_max = ch.gamma_max;
  lb.p_max_ul = drop.p_max_ul;
  lb.p_max_dl = drop.p_max_dl;
  return lb;
}

SicCapability sic_none(int n_users) { return SicCapability(static_cast<std::size_t>(n_users), 0); }
SicCapability sic_all(int n_users) { return SicCapability(static_cast<std::size_t>(n_users), 1); }

double truncated_rate(double sinr, double gamma_max) {
  if (!(sinr >= 0.0)) throw std::invalid_argument("SINR must be non-negative");
  return std::min(std::log2(1.0 + sinr), gamma_max);
}

SinrPair mode_sinrs(VirtualUser v, Mode mode, const ChannelRealization& ch, double p_ul, double p_dl,
                    const LinkBudget& lb) {
  if (p_ul < 0.0 || p_dl < 0.0) throw std::invalid_argument("powers must be non-negative");
  switch (mode) {
    case Mode::HdUl:
      if (v.ul < 1 || v.dl != 0) throw std::invalid_argument("HD-UL requires v_{i,0}");
      return {ratio(p_ul * ch.g(v.ul - 1), lb.noise_ul), 0.0};
    case Mode::HdDl:
      if (v.dl < 1 || v.ul != 0) throw std::invalid_argument("HD-DL requires v_{0,j}");
      return {0.0, ratio(p_dl * ch.g(v.dl - 1), lb.noise_dl)};
    case Mode::FdIn:
    case Mode::FdSic: {
      check_fd(v, mode, ch);
      const FdCoupling cp = coupling(v, mode, ch, lb);
      return {cp.sinr_ul(p_ul, p_dl), cp.sinr_dl(p_ul, p_dl)};
    }
  }
  throw std::invalid_argument("unknown mode");
}

ModeRates hd_rates(VirtualUser v, const ChannelRealization& ch, const LinkBudget& lb) {
  ModeRates r;
  if (v.ul >= 1 && v.dl == 0) {
    r.mode = Mode::HdUl;
    r.p_ul = lb.p_max_ul;
    r.rate_ul = truncated_rate(mode_sinrs(v, Mode::HdUl, ch, r.p_ul, 0.0, lb).ul, lb.gamma_max);
  } else if (v.dl >= 1 && v.ul == 0) {
    r.mode = Mode::HdDl;
    r.p_dl = lb.p_max_dl;
    r.rate_dl = truncated_rate(mode_sinrs(v, Mode::HdDl, ch, 0.0, r.p_dl, lb).dl, lb.gamma_max);
  } else {
    throw std::invalid_argument("hd_rates requires a single-user virtual user");
  }
  return r;
}

// At a max-min optimum at least one power sits at its cap: scaling both
// powers up never lowers any SINR. So the search runs along the two edges
// p_ul = Pu and p_dl = Pd, where the UL SINR and the DL SINR move in opposite
// directions and the best point is their crossing (clipped to the edge).
// Ties are resolved over the same edges: the optimal set meets each edge in
// an interval, and the sum rate on that interval peaks at an endpoint or at a
// truncation kink.
ModeRates maxmin_power(VirtualUser v, Mode mode, const ChannelRealization& ch, const LinkBudget& lb,
                       const SicCapability& sic) {
  check_fd(v, mode, ch);
  if (mode == Mode::FdSic && !sic.at(static_cast<std::size_t>(v.dl - 1)))
    throw std::invalid_argument("FD-SIC requested for a DL user without SIC capability");

  const FdCoupling cp = coupling(v, mode, ch, lb);
  const double pu_max = lb.p_max_ul;
  const double pd_max = lb.p_max_dl;

  auto min_sinr = [&](double pu, double pd) { return std::min(cp.sinr_ul(pu, pd), cp.sinr_dl(pu, pd)); };

  // Edge p_ul = Pu: UL SINR falls with pd, DL SINR rises.
  double pd_cross = kInf;
  for (int r = 0; r < cp.branches; ++r) {
    const double q = pu_max * cp.a[r] * (pu_max * cp.f + cp.k);
    pd_cross = std::min(pd_cross, positive_root(cp.e * cp.b[r], cp.e * cp.c[r], q));
  }
  const Candidate edge_ul{pu_max, std::clamp(pd_cross, 0.0, pd_max)};

  // Edge p_dl = Pd: UL SINR rises with pu, DL SINR falls.
  double pu_cross = 0.0;
  for (int r = 0; r < cp.branches; ++r) {
    const double q = pd_max * cp.e * (pd_max * cp.b[r] + cp.c[r]);
    pu_cross = std::max(pu_cross, positive_root(cp.a[r] * cp.f, cp.a[r] * cp.k, q));
  }
  const Candidate edge_dl{std::clamp(pu_cross, 0.0, pu_max), pd_max};

  const double best = std::max(min_sinr(edge_ul.pu, edge_ul.pd), min_sinr(edge_dl.pu, edge_dl.pd));
  const double sat = std::exp2(lb.gamma_max) - 1.0;
  const double target = std::min(best, sat);

  // Tie-break candidates: interval endpoints and saturation kinks on both edges.
  std::array<Candidate, 12> cand{};
  std::size_t nc = 0;
  cand[nc++] = edge_ul;
  cand[nc++] = edge_dl;
  cand[nc++] = {pu_max, pd_max};
  for (double x : {target, sat}) {
    if (!(x > 0.0)) continue;
    // On p_ul = Pu: DL SINR = x at pd_lo; UL SINR = x at pd_hi.
    const double pd_lo = x * (pu_max * cp.f + cp.k) / cp.e;
    double pd_hi = kInf;
    for (int r = 0; r < cp.branches; ++r)
      if (cp.b[r] > 0.0) pd_hi = std::min(pd_hi, (pu_max * cp.a[r] / x - cp.c[r]) / cp.b[r]);
    for (double pd : {pd_lo, pd_hi})
      if (std::isfinite(pd) && pd >= 0.0 && pd <= pd_max) cand[nc++] = {pu_max, pd};
    // On p_dl = Pd: UL SINR = x at pu_lo; DL SINR = x at pu_hi.
    double pu_lo = 0.0;
    for (int r = 0; r < cp.branches; ++r) pu_lo = std::max(pu_lo, x * (pd_max * cp.b[r] + cp.c[r]) / cp.a[r]);
    const double pu_hi = cp.f > 0.0 ? (pd_max * cp.e / x - cp.k) / cp.f : kInf;
    for (double pu : {pu_lo, pu_hi})
      if (std::isfinite(pu) && pu >= 0.0 && pu <= pu_max) cand[nc++] = {pu, pd_max};
  }

  // Compare sum rates through the product of truncated (1 + SINR) terms.
  const double cap = sat + 1.0;
  Candidate chosen = best == min_sinr(edge_ul.pu, edge_ul.pd) ? edge_ul : edge_dl;
  double chosen_prod = -1.0;
  for (std::size_t i = 0; i < nc; ++i) {
    const Candidate& c = cand[i];
    const double su = cp.sinr_ul(c.pu, c.pd);
    const double sd = cp.sinr_dl(c.pu, c.pd);
    if (std::min(su, sd) < target * (1.0 - kTargetSlack)) continue;
    const double prod = std::min(1.0 + su, cap) * std::min(1.0 + sd, cap);
    const bool better = prod > chosen_prod * (1.0 + kTieTol) ||
                        (prod >= chosen_prod * (1.0 - kTieTol) && c.pd > chosen.pd);
    if (chosen_prod < 0.0 || better) {
      chosen = c;
      chosen_prod = prod;
    }
  }

  ModeRates out;
  out.mode = mode;
  out.p_ul = chosen.pu;
  out.p_dl = chosen.pd;
  out.rate_ul = truncated_rate(cp.sinr_ul(chosen.pu, chosen.pd), lb.gamma_max);
  out.rate_dl = truncated_rate(cp.sinr_dl(chosen.pu, chosen.pd), lb.gamma_max);
  return out;
}

PerformanceMatrix::PerformanceMatrix(int n_users) { resize(n_users); }

void PerformanceMatrix::resize(int n_users) {
  n_ = n_users;
  const std::size_t d = dim();
  utility_.assign(d * d, 0.0);
  chosen_.assign(d * d, ModeRates{});
}

void PerformanceMatrix::set_utility(int ul, int dl, double value) {
  ModeRates r;
  if (dl == 0) {
    r.mode = Mode::HdUl;
    r.rate_ul = value;
  } else if (ul == 0) {
    r.mode = Mode::HdDl;
    r.rate_dl = value;
  } else {
    r.mode = Mode::FdIn;
    r.rate_ul = value;
  }
  set(ul, dl, r);
}

void PerformanceMatrix::shift(double c) {
  for (int i = 0; i <= n_; ++i)
    for (int j = 0; j <= n_; ++j)
      if (VirtualUser{i, j}.valid(n_)) utility_[index(i, j)] += c;
}

void performance_matrix_into(const ChannelRealization& ch, const LinkBudget& lb, const SicCapability& sic,
                             PerformanceMatrix& out) {
  const int n = ch.n_users;
  if (out.n_users() != n) out.resize(n);
  for (int u = 1; u <= n; ++u) {
    out.set(u, 0, hd_rates({u, 0}, ch, lb));
    out.set(0, u, hd_rates({0, u}, ch, lb));
  }
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      if (i == j) continue;
      ModeRates best = maxmin_power({i, j}, Mode::FdIn, ch, lb, sic);
      if (sic[static_cast<std::size_t>(j - 1)]) {
        const ModeRates with_sic = maxmin_power({i, j}, Mode::FdSic, ch, lb, sic);
        if (with_sic.sum() > best.sum()) best = with_sic;
      }
      out.set(i, j, best);
    }
  }
}

PerformanceMatrix performance_matrix(const ChannelRealization& ch, const LinkBudget& lb,
                                     const SicCapability& sic) {
  PerformanceMatrix pm(ch.n_users);
  performance_matrix_into(ch, lb, sic, pm);
  return pm;
}

}  // namespace fdsched
