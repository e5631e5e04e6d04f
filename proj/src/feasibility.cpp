#include "fdsched/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "maxflow.hpp"

namespace fdsched {

namespace {

constexpr double kEps = 1e-9;

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

void check_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("UL and DL demand vectors differ in length");
}

// Transportation network: source -> UL rows {0..n} -> DL columns {0..n} -> sink.
// Row 0 carries HD-DL slots, column 0 HD-UL slots. Forbidden cells: (0,0)
// and the diagonal (half-duplex users).
struct Transport {
  std::size_t n;
  std::size_t source() const { return 0; }
  std::size_t row(int i) const { return 1 + static_cast<std::size_t>(i); }
  std::size_t col(int j) const { return 2 + n + static_cast<std::size_t>(j); }
  std::size_t sink() const { return 3 + 2 * n; }
  std::size_t nodes() const { return 4 + 2 * n; }
};

template <typename T>
detail::DenseMaxFlow<T> build_transport(const Transport& net, std::span<const T> row_supply,
                                        std::span<const T> col_demand, T arc_cap, T eps) {
  detail::DenseMaxFlow<T> mf(net.nodes(), eps);
  const int n = static_cast<int>(net.n);
  for (int i = 0; i <= n; ++i) mf.add_capacity(net.source(), net.row(i), row_supply[static_cast<std::size_t>(i)]);
  for (int j = 0; j <= n; ++j) mf.add_capacity(net.col(j), net.sink(), col_demand[static_cast<std::size_t>(j)]);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j)
      if (i != j) mf.add_capacity(net.row(i), net.col(j), arc_cap);
  return mf;
}

}  // namespace

// TemporalDemands ------------------------------------------------------------

TemporalDemands TemporalDemands::lower_only(std::vector<double> lower_ul, std::vector<double> lower_dl) {
  check_same_size(lower_ul.size(), lower_dl.size());
  TemporalDemands d;
  d.upper_ul.assign(lower_ul.size(), 1.0);
  d.upper_dl.assign(lower_dl.size(), 1.0);
  d.lower_ul = std::move(lower_ul);
  d.lower_dl = std::move(lower_dl);
  return d;
}

TemporalDemands TemporalDemands::uniform(int n_users, double lower_ul, double lower_dl) {
  const auto n = static_cast<std::size_t>(n_users);
  return lower_only(std::vector<double>(n, lower_ul), std::vector<double>(n, lower_dl));
}

TemporalDemands TemporalDemands::equality(std::vector<double> w_ul, std::vector<double> w_dl) {
  check_same_size(w_ul.size(), w_dl.size());
  TemporalDemands d;
  d.lower_ul = w_ul;
  d.upper_ul = std::move(w_ul);
  d.lower_dl = w_dl;
  d.upper_dl = std::move(w_dl);
  return d;
}

void TemporalDemands::validate() const {
  const std::size_t n = lower_ul.size();
  if (upper_ul.size() != n || lower_dl.size() != n || upper_dl.size() != n)
    throw std::invalid_argument("demand vectors must have equal length");
  auto check = [](const std::vector<double>& lo, const std::vector<double>& hi, const char* dir) {
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (!(lo[i] >= 0.0 && lo[i] <= 1.0 && hi[i] >= 0.0 && hi[i] <= 1.0))
        throw std::invalid_argument(std::string(dir) + " demands must lie in [0,1]");
      if (lo[i] > hi[i]) throw std::invalid_argument(std::string(dir) + " lower demand exceeds upper demand");
    }
  };
  check(lower_ul, upper_ul, "UL");
  check(lower_dl, upper_dl, "DL");
}

// Long-term --------------------------------------------------------------------

bool feasible_longterm(std::span<const double> w_ul, std::span<const double> w_dl) {
  check_same_size(w_ul.size(), w_dl.size());
  const double su = sum(w_ul);
  const double sd = sum(w_dl);
  if (su > 1.0 + kEps || sd > 1.0 + kEps || su + sd < 1.0 - kEps) return false;
  for (std::size_t i = 0; i < w_ul.size(); ++i)
    if (w_ul[i] + w_dl[i] > 1.0 + kEps) return false;
  return true;
}

bool feasible_longterm_box(const TemporalDemands& d) {
  d.validate();
  const auto n = static_cast<std::size_t>(d.n_users());
  // Lower bounds are the cheapest point for the three "at most" inequalities.
  if (!feasible_longterm(d.lower_ul, d.lower_dl)) {
    const double su = sum(d.lower_ul);
    const double sd = sum(d.lower_dl);
    if (su > 1.0 + kEps || sd > 1.0 + kEps) return false;
    for (std::size_t i = 0; i < n; ++i)
      if (d.lower_ul[i] + d.lower_dl[i] > 1.0 + kEps) return false;
  } else {
    return true;
  }
  // Only the "at least 1 in total" bound is violated: raise shares as far as
  // the remaining bounds allow. Max-flow over increments:
  //   S -> UL (1 - sum lo_ul), S -> DL (1 - sum lo_dl),
  //   UL -> user i (hi - lo), DL -> user i (hi - lo), user i -> T (1 - lo_ul - lo_dl).
  const std::size_t s_node = 0, ul_node = 1, dl_node = 2, t_node = 3 + n;
  detail::DenseMaxFlow<double> mf(4 + n, 1e-12);
  mf.add_capacity(s_node, ul_node, std::max(0.0, 1.0 - sum(d.lower_ul)));
  mf.add_capacity(s_node, dl_node, std::max(0.0, 1.0 - sum(d.lower_dl)));
  for (std::size_t i = 0; i < n; ++i) {
    mf.add_capacity(ul_node, 3 + i, d.upper_ul[i] - d.lower_ul[i]);
    mf.add_capacity(dl_node, 3 + i, d.upper_dl[i] - d.lower_dl[i]);
    mf.add_capacity(3 + i, t_node, std::max(0.0, 1.0 - d.lower_ul[i] - d.lower_dl[i]));
  }
  const double extra = mf.run(s_node, t_node);
  return sum(d.lower_ul) + sum(d.lower_dl) + extra >= 1.0 - kEps;
}

// SlotAllocation -----------------------------------------------------------------

SlotAllocation::SlotAllocation(int n_users, int window)
    : n_(n_users), s_(window), a_((static_cast<std::size_t>(n_users) + 1) * (static_cast<std::size_t>(n_users) + 1), 0) {}

int SlotAllocation::total() const { return std::accumulate(a_.begin(), a_.end(), 0); }

int SlotAllocation::ul_count(int user) const {
  int c = 0;
  for (int j = 0; j <= n_; ++j) c += at(user, j);
  return c;
}

int SlotAllocation::dl_count(int user) const {
  int c = 0;
  for (int i = 0; i <= n_; ++i) c += at(i, user);
  return c;
}

double FractionalAllocation::total() const { return std::accumulate(a.begin(), a.end(), 0.0); }

// Short-term ---------------------------------------------------------------------

ShortTermResult feasible_shortterm_counts(int s, std::span<const int> k_ul, std::span<const int> k_dl) {
  check_same_size(k_ul.size(), k_dl.size());
  if (s < 1) throw std::invalid_argument("window must be at least 1");
  const int n = static_cast<int>(k_ul.size());

  ShortTermResult res;
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (k_ul[k] < 0 || k_ul[k] > s || k_dl[k] < 0 || k_dl[k] > s) {
      res.diagnosis = "slot count of user " + std::to_string(i + 1) + " outside [0, s]";
      return res;
    }
  }
  const int sum_ul = std::accumulate(k_ul.begin(), k_ul.end(), 0);
  const int sum_dl = std::accumulate(k_dl.begin(), k_dl.end(), 0);
  const int hd_dl = s - sum_ul;  // slots with no UL user
  const int hd_ul = s - sum_dl;  // slots with no DL user
  if (hd_dl < 0) {
    res.diagnosis = "UL demands exceed the window";
    return res;
  }
  if (hd_ul < 0) {
    res.diagnosis = "DL demands exceed the window";
    return res;
  }

  std::vector<int> rows(static_cast<std::size_t>(n) + 1), cols(static_cast<std::size_t>(n) + 1);
  rows[0] = hd_dl;
  cols[0] = hd_ul;
  for (int i = 0; i < n; ++i) {
    rows[static_cast<std::size_t>(i) + 1] = k_ul[static_cast<std::size_t>(i)];
    cols[static_cast<std::size_t>(i) + 1] = k_dl[static_cast<std::size_t>(i)];
  }

  const Transport net{static_cast<std::size_t>(n)};
  auto mf = build_transport<int>(net, rows, cols, s, 0);
  const int flow = mf.run(net.source(), net.sink());
  if (flow != s) {
    res.diagnosis = "no slot allocation meets the demands (max assignable " + std::to_string(flow) + " of " +
                    std::to_string(s) + " slots)";
    return res;
  }

  SlotAllocation alloc(n, s);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j)
      if (i != j) alloc.at(i, j) = mf.flow(net.row(i), net.col(j));
  res.status = ShortTermStatus::Feasible;
  res.allocation = std::move(alloc);
  return res;
}

ShortTermResult feasible_shortterm(int s, std::span<const double> w_ul, std::span<const double> w_dl) {
  check_same_size(w_ul.size(), w_dl.size());
  if (s < 1) throw std::invalid_argument("window must be at least 1");
  std::vector<int> k_ul(w_ul.size()), k_dl(w_dl.size());
  auto snap = [s](double w, int& k) {
    const double x = w * s;
    const double r = std::round(x);
    if (std::abs(x - r) > kEps) return false;
    k = static_cast<int>(r);
    return true;
  };
  for (std::size_t i = 0; i < w_ul.size(); ++i) {
    if (!snap(w_ul[i], k_ul[i]) || !snap(w_dl[i], k_dl[i])) {
      ShortTermResult res;
      res.status = ShortTermStatus::NonIntegral;
      res.diagnosis = "s * w is not integral for user " + std::to_string(i + 1);
      return res;
    }
  }
  return feasible_shortterm_counts(s, k_ul, k_dl);
}

bool satisfies_slot_conditions(const SlotAllocation& a, std::span<const int> k_ul, std::span<const int> k_dl) {
  const int n = a.n_users();
  if (static_cast<int>(k_ul.size()) != n || static_cast<int>(k_dl.size()) != n) return false;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j)
      if (a.at(i, j) < 0) return false;
  if (a.at(0, 0) != 0) return false;
  for (int i = 1; i <= n; ++i)
    if (a.at(i, i) != 0) return false;
  for (int i = 1; i <= n; ++i) {
    if (a.ul_count(i) != k_ul[static_cast<std::size_t>(i - 1)]) return false;
    if (a.dl_count(i) != k_dl[static_cast<std::size_t>(i - 1)]) return false;
  }
  return a.total() == a.window();
}

std::vector<VirtualUser> witness_schedule(const SlotAllocation& alloc) {
  std::vector<VirtualUser> seq;
  seq.reserve(static_cast<std::size_t>(std::max(0, alloc.total())));
  const int n = alloc.n_users();
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j)
      for (int r = 0; r < alloc.at(i, j); ++r) seq.push_back({i, j});
  return seq;
}

FractionalAllocation longterm_witness(std::span<const double> w_ul, std::span<const double> w_dl) {
  if (!feasible_longterm(w_ul, w_dl)) throw std::invalid_argument("demands are not long-term feasible");
  const int n = static_cast<int>(w_ul.size());

  FractionalAllocation out;
  out.n_users = n;
  out.a.assign((static_cast<std::size_t>(n) + 1) * (static_cast<std::size_t>(n) + 1), 0.0);

  std::vector<double> ul(w_ul.begin(), w_ul.end());
  std::vector<double> dl(w_dl.begin(), w_dl.end());
  double alpha = std::max(0.0, sum(w_ul) + sum(w_dl) - 1.0);

  // FD share, greedy pairing in lexicographic order.
  for (int i = 1; i <= n && alpha > kEps; ++i) {
    for (int j = 1; j <= n && alpha > kEps; ++j) {
      if (i == j) continue;
      auto& ri = ul[static_cast<std::size_t>(i - 1)];
      auto& rj = dl[static_cast<std::size_t>(j - 1)];
      const double a = std::min({alpha, ri, rj});
      if (a <= 0.0) continue;
      out.at(i, j) = a;
      alpha -= a;
      ri -= a;
      rj -= a;
    }
  }

  if (alpha > kEps) {
    // The lexicographic sweep can strand the FD share on a single user that
    // still has both UL and DL residuals. Fall back to the fractional
    // transportation solution, which exists whenever the region test passes.
    std::vector<double> rows(static_cast<std::size_t>(n) + 1), cols(static_cast<std::size_t>(n) + 1);
    rows[0] = std::max(0.0, 1.0 - sum(w_ul));
    cols[0] = std::max(0.0, 1.0 - sum(w_dl));
    for (int i = 0; i < n; ++i) {
      rows[static_cast<std::size_t>(i) + 1] = w_ul[static_cast<std::size_t>(i)];
      cols[static_cast<std::size_t>(i) + 1] = w_dl[static_cast<std::size_t>(i)];
    }
    const Transport net{static_cast<std::size_t>(n)};
    auto mf = build_transport<double>(net, rows, cols, 1.0, 1e-12);
    mf.run(net.source(), net.sink());
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j)
        out.at(i, j) = (i != j) ? mf.flow(net.row(i), net.col(j)) : 0.0;
    return out;
  }

  // HD fractions for what is left.
  for (int i = 1; i <= n; ++i) {
    out.at(i, 0) = std::max(0.0, ul[static_cast<std::size_t>(i - 1)]);
    out.at(0, i) = std::max(0.0, dl[static_cast<std::size_t>(i - 1)]);
  }
  return out;
}

}  // namespace fdsched
