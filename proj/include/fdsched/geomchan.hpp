#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <variant>
#include <vector>

namespace fdsched {

// Placement models ----------------------------------------------------------

struct UniformPlacement {};

struct HotspotPlacement {
  int n_hotspots = 1;
  double hotspot_radius = 10.0;  // meters
};

using Placement = std::variant<UniformPlacement, HotspotPlacement>;

// LOS models -----------------------------------------------------------------

struct AllNlos {};

struct FixedLosProbability {
  double p = 0.0;
};

using LosMode = std::variant<AllNlos, FixedLosProbability>;

/// Square cell with the base station at the origin.
struct CellConfig {
  double cell_side = 50.0;        // meters
  double exclusion_radius = 5.0;  // meters
  int n_users = 4;
  Placement placement = UniformPlacement{};
  LosMode los_mode = AllNlos{};

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;
};

/// PL(d) = intercept + slope * log10(d_km).
struct PathlossModel {
  double intercept_db;
  double slope_db;

  double operator()(double distance_m) const;
};

struct ChannelParams {
  double bandwidth_hz = 10e6;
  double noise_psd_dbm_hz = -174.0;
  double nf_bs_db = 8.0;
  double nf_user_db = 9.0;
  double sim_db = 80.0;
  double shadow_std_los_db = 3.0;
  double shadow_std_nlos_db = 4.0;
  PathlossModel pathloss_los{89.5, 16.9};
  PathlossModel pathloss_nlos{147.4, 43.3};
  double gamma_max = 6.0;  // bps/Hz
  // Path-loss formulas diverge as d -> 0; user pairs closer than this are
  // evaluated at this distance.
  double min_link_distance = 1.0;  // meters

  void validate() const;

  /// Receiver noise power in dBm: PSD + 10 log10(B) + NF.
  double noise_ul_dbm() const;
  double noise_dl_dbm() const;
  double noise_ul_w() const;
  double noise_dl_w() const;
  /// Residual self-interference leakage, linear.
  double psi_b() const;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Large-scale state of one random placement.
struct CellDrop {
  int n_users = 0;
  std::vector<Point> positions;
  std::vector<double> bs_distance;    // meters
  std::vector<double> bs_shadow_db;   // drawn shadowing
  std::vector<double> bs_pathloss_db; // path loss + shadowing
  std::vector<double> user_distance;    // n x n, row-major
  std::vector<double> user_shadow_db;   // n x n, symmetric
  std::vector<double> user_pathloss_db; // n x n, symmetric, zero diagonal
  std::vector<std::uint8_t> bs_los;     // per user
  std::vector<std::uint8_t> user_los;   // n x n
  double p_max_ul = 0.0;  // watts
  double p_max_dl = 0.0;  // watts

  double user_pathloss(int a, int b) const {
    return user_pathloss_db[static_cast<std::size_t>(a) * n_users + b];
  }
};

/// Small-scale state of one slot: squared channel magnitudes.
struct ChannelRealization {
  int n_users = 0;
  std::vector<double> g_sq;  // user <-> BS
  std::vector<double> h_sq;  // n x n, symmetric, zero diagonal

  double g(int user) const { return g_sq[static_cast<std::size_t>(user)]; }
  double h(int a, int b) const { return h_sq[static_cast<std::size_t>(a) * n_users + b]; }
};

class PlacementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PowerCap {
  double p_max_ul = 0.0;  // watts
  double p_max_dl = 0.0;  // watts
};

double db_to_linear(double db);
double linear_to_db(double lin);
double dbm_to_watts(double dbm);
double watts_to_dbm(double w);

/// Reference distance for power calibration (50 * sqrt(2) m).
inline constexpr double kCalibrationDistance = 70.71067811865476;

/// Powers giving an average SNR of exactly 0 dB for a lone user over an NLOS
/// link at kCalibrationDistance.
PowerCap calibrate_pmax(const ChannelParams& ch);

/// Draws positions, LOS states and shadowing for one drop. Deterministic in
/// `seed`. Throws PlacementError if rejection sampling exceeds its cap.
CellDrop make_drop(const CellConfig& cfg, const ChannelParams& ch, std::uint64_t seed);

/// Rayleigh block fading for one slot. Deterministic in (seed, slot).
ChannelRealization draw_realization(const CellDrop& drop, std::uint64_t seed, std::uint64_t slot);

/// In-place variant for hot loops; reuses `out`'s storage.
void draw_realization_into(const CellDrop& drop, std::uint64_t seed, std::uint64_t slot,
                           ChannelRealization& out);

}  // namespace fdsched
