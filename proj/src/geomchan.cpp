#include "fdsched/geomchan.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "fdsched/rng.hpp"

namespace fdsched {

namespace {

constexpr int kMaxPlacementAttempts = 100000;

bool inside_square(const Point& p, double half) {
  return std::abs(p.x) <= half && std::abs(p.y) <= half;
}

double norm(const Point& p) { return std::hypot(p.x, p.y); }

Point uniform_in_square(StreamRng& rng, double half) {
  return {(2.0 * rng.uniform() - 1.0) * half, (2.0 * rng.uniform() - 1.0) * half};
}

Point uniform_in_disk(StreamRng& rng, const Point& center, double radius) {
  const double r = radius * std::sqrt(rng.uniform());
  const double theta = 2.0 * std::numbers::pi * rng.uniform();
  return {center.x + r * std::cos(theta), center.y + r * std::sin(theta)};
}

std::vector<Point> place_users(const CellConfig& cfg, StreamRng& rng) {
  const double half = cfg.cell_side / 2.0;
  auto admissible = [&](const Point& p) {
    return inside_square(p, half) && norm(p) >= cfg.exclusion_radius;
  };

  std::vector<Point> pos;
  pos.reserve(static_cast<std::size_t>(cfg.n_users));

  if (std::holds_alternative<UniformPlacement>(cfg.placement)) {
    for (int u = 0; u < cfg.n_users; ++u) {
      int attempts = 0;
      Point p;
      do {
        if (++attempts > kMaxPlacementAttempts)
          throw PlacementError("uniform placement: rejection cap exceeded for user " + std::to_string(u));
        p = uniform_in_square(rng, half);
      } while (!admissible(p));
      pos.push_back(p);
    }
    return pos;
  }

  const auto& hs = std::get<HotspotPlacement>(cfg.placement);
  const int per_spot = cfg.n_users / hs.n_hotspots;
  for (int h = 0; h < hs.n_hotspots; ++h) {
    const Point center = uniform_in_square(rng, half);
    for (int k = 0; k < per_spot; ++k) {
      int attempts = 0;
      Point p;
      do {
        if (++attempts > kMaxPlacementAttempts)
          throw PlacementError("hotspot placement: rejection cap exceeded around hotspot " +
                               std::to_string(h));
        p = uniform_in_disk(rng, center, hs.hotspot_radius);
      } while (!admissible(p));
      pos.push_back(p);
    }
  }
  return pos;
}

double los_probability(const LosMode& mode) {
  if (const auto* f = std::get_if<FixedLosProbability>(&mode)) return f->p;
  return 0.0;
}

double noise_w(const ChannelParams& ch, double nf_db) {
  return dbm_to_watts(ch.noise_psd_dbm_hz + 10.0 * std::log10(ch.bandwidth_hz) + nf_db);
}

}  // namespace

void CellConfig::validate() const {
  if (!(cell_side > 0.0)) throw std::invalid_argument("cell_side must be positive");
  if (!(exclusion_radius >= 0.0 && exclusion_radius < cell_side / 2.0))
    throw std::invalid_argument("exclusion_radius must lie in [0, cell_side/2)");
  if (n_users < 1) throw std::invalid_argument("n_users must be at least 1");
  if (const auto* hs = std::get_if<HotspotPlacement>(&placement)) {
    if (hs->n_hotspots < 1) throw std::invalid_argument("n_hotspots must be at least 1");
    if (n_users % hs->n_hotspots != 0)
      throw std::invalid_argument("n_users must be divisible by n_hotspots");
    if (!(hs->hotspot_radius > 0.0)) throw std::invalid_argument("hotspot_radius must be positive");
  }
  if (const auto* f = std::get_if<FixedLosProbability>(&los_mode)) {
    if (!(f->p >= 0.0 && f->p <= 1.0)) throw std::invalid_argument("LOS probability must lie in [0, 1]");
  }
}

double PathlossModel::operator()(double distance_m) const {
  return intercept_db + slope_db * std::log10(distance_m / 1000.0);
}

void ChannelParams::validate() const {
  for (double v : {bandwidth_hz, noise_psd_dbm_hz, nf_bs_db, nf_user_db, sim_db, shadow_std_los_db,
                   shadow_std_nlos_db, gamma_max, min_link_distance}) {
    if (!std::isfinite(v)) throw std::invalid_argument("channel parameters must be finite");
  }
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  if (sim_db < 0.0) throw std::invalid_argument("sim_db must be non-negative");
  if (!(gamma_max > 0.0)) throw std::invalid_argument("gamma_max must be positive");
  if (shadow_std_los_db < 0.0 || shadow_std_nlos_db < 0.0)
    throw std::invalid_argument("shadowing standard deviation must be non-negative");
  if (!(min_link_distance > 0.0)) throw std::invalid_argument("min_link_distance must be positive");
}

double ChannelParams::noise_ul_dbm() const {
  return noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz) + nf_bs_db;
}
double ChannelParams::noise_dl_dbm() const {
  return noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz) + nf_user_db;
}
double ChannelParams::noise_ul_w() const { return noise_w(*this, nf_bs_db); }
double ChannelParams::noise_dl_w() const { return noise_w(*this, nf_user_db); }
double ChannelParams::psi_b() const { return db_to_linear(-sim_db); }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

PowerCap calibrate_pmax(const ChannelParams& ch) {
  // P * 10^(-PL/10) / N = 1.
  const double gain = db_to_linear(-ch.pathloss_nlos(kCalibrationDistance));
  return {ch.noise_ul_w() / gain, ch.noise_dl_w() / gain};
}

CellDrop make_drop(const CellConfig& cfg, const ChannelParams& ch, std::uint64_t seed) {
  cfg.validate();
  ch.validate();

  const int n = cfg.n_users;
  const auto nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);

  CellDrop drop;
  drop.n_users = n;

  StreamRng place_rng(derive_seed(seed, {kTagPlacement}));
  drop.positions = place_users(cfg, place_rng);

  const double p_los = los_probability(cfg.los_mode);
  StreamRng los_rng(derive_seed(seed, {kTagLos}));
  StreamRng shadow_rng(derive_seed(seed, {kTagShadowing}));
  std::normal_distribution<double> std_normal(0.0, 1.0);

  auto link = [&](double distance, double& shadow, double& pathloss, std::uint8_t& los) {
    // Always consume the LOS draw so that toggling the mode keeps the
    // shadowing stream aligned.
    const double u = los_rng.uniform();
    los = (p_los > 0.0 && u < p_los) ? 1 : 0;
    const double z = std_normal(shadow_rng);
    shadow = z * (los ? ch.shadow_std_los_db : ch.shadow_std_nlos_db);
    pathloss = (los ? ch.pathloss_los(distance) : ch.pathloss_nlos(distance)) + shadow;
  };

  drop.bs_distance.resize(static_cast<std::size_t>(n));
  drop.bs_shadow_db.resize(static_cast<std::size_t>(n));
  drop.bs_pathloss_db.resize(static_cast<std::size_t>(n));
  drop.bs_los.resize(static_cast<std::size_t>(n));
  for (int u = 0; u < n; ++u) {
    const auto k = static_cast<std::size_t>(u);
    drop.bs_distance[k] = norm(drop.positions[k]);
    link(drop.bs_distance[k], drop.bs_shadow_db[k], drop.bs_pathloss_db[k], drop.bs_los[k]);
  }

  drop.user_distance.assign(nn, 0.0);
  drop.user_shadow_db.assign(nn, 0.0);
  drop.user_pathloss_db.assign(nn, 0.0);
  drop.user_los.assign(nn, 0);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const auto ab = static_cast<std::size_t>(a) * n + b;
      const auto ba = static_cast<std::size_t>(b) * n + a;
      const Point& pa = drop.positions[static_cast<std::size_t>(a)];
      const Point& pb = drop.positions[static_cast<std::size_t>(b)];
      const double d = std::hypot(pa.x - pb.x, pa.y - pb.y);
      drop.user_distance[ab] = drop.user_distance[ba] = d;
      link(std::max(d, ch.min_link_distance), drop.user_shadow_db[ab], drop.user_pathloss_db[ab],
           drop.user_los[ab]);
      drop.user_shadow_db[ba] = drop.user_shadow_db[ab];
      drop.user_pathloss_db[ba] = drop.user_pathloss_db[ab];
      drop.user_los[ba] = drop.user_los[ab];
    }
  }

  const PowerCap cap = calibrate_pmax(ch);
  drop.p_max_ul = cap.p_max_ul;
  drop.p_max_dl = cap.p_max_dl;
  return drop;
}

void draw_realization_into(const CellDrop& drop, std::uint64_t seed, std::uint64_t slot,
                           ChannelRealization& out) {
  const int n = drop.n_users;
  out.n_users = n;
  out.g_sq.resize(static_cast<std::size_t>(n));
  out.h_sq.assign(static_cast<std::size_t>(n) * n, 0.0);

  StreamRng rng(derive_seed(seed, {kTagFading, slot}));
  // |CN(0,1)|^2 ~ Exp(1).
  auto exp1 = [&rng] { return -std::log1p(-rng.uniform()); };

  for (int u = 0; u < n; ++u) {
    const auto k = static_cast<std::size_t>(u);
    out.g_sq[k] = db_to_linear(-drop.bs_pathloss_db[k]) * exp1();
  }
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const auto ab = static_cast<std::size_t>(a) * n + b;
      const double v = db_to_linear(-drop.user_pathloss_db[ab]) * exp1();
      out.h_sq[ab] = v;
      out.h_sq[static_cast<std::size_t>(b) * n + a] = v;
    }
  }
}

ChannelRealization draw_realization(const CellDrop& drop, std::uint64_t seed, std::uint64_t slot) {
  ChannelRealization out;
  draw_realization_into(drop, seed, slot, out);
  return out;
}

}  // namespace fdsched
