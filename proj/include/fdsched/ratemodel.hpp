#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "fdsched/geomchan.hpp"

namespace fdsched {

/// Simultaneous activation of one UL user and one DL user. User numbers are
/// 1-based; 0 means the direction is idle (the BS operates in HD). v_{0,0}
/// and v_{i,i} are not virtual users.
struct VirtualUser {
  int ul = 0;
  int dl = 0;

  bool is_hd() const { return ul == 0 || dl == 0; }
  bool is_fd() const { return ul != 0 && dl != 0; }
  /// Member of the virtual-user set for n users.
  bool valid(int n_users) const {
    return ul >= 0 && dl >= 0 && ul <= n_users && dl <= n_users && !(ul == 0 && dl == 0) && ul != dl;
  }

  friend auto operator<=>(const VirtualUser&, const VirtualUser&) = default;
};

enum class Mode : std::uint8_t { HdUl, HdDl, FdIn, FdSic };

const char* mode_name(Mode m);

struct ModeRates {
  Mode mode = Mode::HdUl;
  double rate_ul = 0.0;  // bps/Hz
  double rate_dl = 0.0;  // bps/Hz
  double p_ul = 0.0;     // watts
  double p_dl = 0.0;     // watts

  double sum() const { return rate_ul + rate_dl; }
};

struct SinrPair {
  double ul = 0.0;
  double dl = 0.0;
};

/// Everything the per-slot rate computations need beyond the channel.
struct LinkBudget {
  double noise_ul = 0.0;  // watts
  double noise_dl = 0.0;  // watts
  double psi_b = 0.0;     // linear
  double gamma_max = 6.0;
  double p_max_ul = 0.0;
  double p_max_dl = 0.0;

  static LinkBudget from(const ChannelParams& ch, const CellDrop& drop);
};

/// Per-user flag (0-based user id): can the user act as an SIC receiver in DL.
using SicCapability = std::vector<std::uint8_t>;

SicCapability sic_none(int n_users);
SicCapability sic_all(int n_users);

/// min(log2(1 + sinr), gamma_max). Throws std::invalid_argument on negative
/// or NaN input.
double truncated_rate(double sinr, double gamma_max);

/// SINRs of both directions of `v` operated in `mode` at the given powers.
/// HD modes report 0 for the idle direction.
SinrPair mode_sinrs(VirtualUser v, Mode mode, const ChannelRealization& ch, double p_ul, double p_dl,
                    const LinkBudget& lb);

/// Full-power single-direction rates of an HD virtual user.
ModeRates hd_rates(VirtualUser v, const ChannelRealization& ch, const LinkBudget& lb);

/// Max-min power allocation for a two-user virtual user in an FD mode. Among
/// max-min optimal points the higher sum rate wins, then the higher DL power.
ModeRates maxmin_power(VirtualUser v, Mode mode, const ChannelRealization& ch, const LinkBudget& lb,
                       const SicCapability& sic);

/// Utilities R_{i,j} of all virtual users for one slot, indexed by
/// (ul, dl) in {0..n}^2. Entries for (0,0) and (i,i) are unused and zero.
class PerformanceMatrix {
 public:
  PerformanceMatrix() = default;
  explicit PerformanceMatrix(int n_users);

  int n_users() const { return n_; }
  std::size_t dim() const { return static_cast<std::size_t>(n_) + 1; }

  double utility(int ul, int dl) const { return utility_[index(ul, dl)]; }
  double utility(VirtualUser v) const { return utility(v.ul, v.dl); }
  const ModeRates& chosen(int ul, int dl) const { return chosen_[index(ul, dl)]; }
  const ModeRates& chosen(VirtualUser v) const { return chosen(v.ul, v.dl); }

  void set(int ul, int dl, const ModeRates& r) {
    chosen_[index(ul, dl)] = r;
    utility_[index(ul, dl)] = r.sum();
  }
  /// Direct utility assignment for synthetic matrices; the chosen mode is
  /// derived from the index pattern and the whole value goes to one side.
  void set_utility(int ul, int dl, double value);

  /// Adds `c` to every virtual-user entry.
  void shift(double c);

  void resize(int n_users);

 private:
  std::size_t index(int ul, int dl) const {
    return static_cast<std::size_t>(ul) * dim() + static_cast<std::size_t>(dl);
  }

  int n_ = 0;
  std::vector<double> utility_;
  std::vector<ModeRates> chosen_;
};

PerformanceMatrix performance_matrix(const ChannelRealization& ch, const LinkBudget& lb,
                                     const SicCapability& sic);

/// Hot-loop variant that reuses `out`.
void performance_matrix_into(const ChannelRealization& ch, const LinkBudget& lb, const SicCapability& sic,
                             PerformanceMatrix& out);

}  // namespace fdsched
