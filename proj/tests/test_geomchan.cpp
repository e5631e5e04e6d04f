#include <cmath>
#include <numeric>

#include "doctest.h"
#include "fdsched/geomchan.hpp"

using namespace fdsched;

namespace {

double sample_std(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

bool same_drop(const CellDrop& a, const CellDrop& b) {
  if (a.positions.size() != b.positions.size()) return false;
  for (std::size_t i = 0; i < a.positions.size(); ++i)
    if (a.positions[i].x != b.positions[i].x || a.positions[i].y != b.positions[i].y) return false;
  return a.bs_pathloss_db == b.bs_pathloss_db && a.user_pathloss_db == b.user_pathloss_db &&
         a.bs_los == b.bs_los && a.user_los == b.user_los && a.p_max_ul == b.p_max_ul && a.p_max_dl == b.p_max_dl;
}

}  // namespace

TEST_CASE("noise powers and calibrated transmit powers") {
  const ChannelParams ch;
  CHECK(ch.noise_ul_dbm() == doctest::Approx(-96.0).epsilon(1e-12));
  CHECK(ch.noise_dl_dbm() == doctest::Approx(-95.0).epsilon(1e-12));

  // Independent evaluation: 147.4 + 43.3 log10(0.0707...) dB path loss.
  const double pl = 147.4 + 43.3 * std::log10(50.0 * std::sqrt(2.0) / 1000.0);
  CHECK(pl == doctest::Approx(97.58).epsilon(1e-4));
  CHECK(ch.pathloss_nlos(kCalibrationDistance) == doctest::Approx(pl).epsilon(1e-12));

  const PowerCap cap = calibrate_pmax(ch);
  CHECK(watts_to_dbm(cap.p_max_ul) == doctest::Approx(-96.0 + pl).epsilon(1e-12));
  CHECK(watts_to_dbm(cap.p_max_dl) == doctest::Approx(-95.0 + pl).epsilon(1e-12));
  CHECK(watts_to_dbm(cap.p_max_ul) == doctest::Approx(1.6).epsilon(0.02));
  CHECK(watts_to_dbm(cap.p_max_dl) == doctest::Approx(2.6).epsilon(0.02));

  // Average SNR at the calibration point is exactly 0 dB.
  CHECK(cap.p_max_ul * db_to_linear(-pl) / ch.noise_ul_w() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cap.p_max_dl * db_to_linear(-pl) / ch.noise_dl_w() == doctest::Approx(1.0).epsilon(1e-12));

  ChannelParams wide = ch;
  wide.bandwidth_hz *= 2.0;
  const PowerCap cap2 = calibrate_pmax(wide);
  CHECK(watts_to_dbm(cap2.p_max_ul) - watts_to_dbm(cap.p_max_ul) == doctest::Approx(10.0 * std::log10(2.0)));
  CHECK(watts_to_dbm(cap2.p_max_dl) - watts_to_dbm(cap.p_max_dl) == doctest::Approx(3.0103).epsilon(1e-4));
}

TEST_CASE("path loss formulas") {
  const ChannelParams ch;
  CHECK(ch.pathloss_nlos(1000.0) == doctest::Approx(147.4));
  CHECK(ch.pathloss_los(1000.0) == doctest::Approx(89.5));
  CHECK(ch.pathloss_los(100.0) == doctest::Approx(89.5 - 16.9));
  CHECK(ch.psi_b() == doctest::Approx(1e-8));
}

TEST_CASE("config validation") {
  CellConfig c;
  CHECK_NOTHROW(c.validate());
  c.cell_side = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = CellConfig{};
  c.exclusion_radius = 25.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = CellConfig{};
  c.n_users = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = CellConfig{};
  c.placement = HotspotPlacement{3, 10.0};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = CellConfig{};
  c.los_mode = FixedLosProbability{1.5};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);

  ChannelParams ch;
  ch.sim_db = -1.0;
  CHECK_THROWS_AS(ch.validate(), std::invalid_argument);
  ch = ChannelParams{};
  ch.gamma_max = 0.0;
  CHECK_THROWS_AS(ch.validate(), std::invalid_argument);
  ch = ChannelParams{};
  ch.nf_bs_db = std::nan("");
  CHECK_THROWS_AS(ch.validate(), std::invalid_argument);
}

TEST_CASE("uniform placement stays in the square and outside the exclusion disk") {
  CellConfig cfg;
  const ChannelParams ch;
  const CellDrop d7 = make_drop(cfg, ch, 7);
  REQUIRE(d7.positions.size() == 4);
  for (double dist : d7.bs_distance) {
    CHECK(dist >= 5.0);
    CHECK(dist <= 25.0 * std::sqrt(2.0));
  }
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const CellDrop d = make_drop(cfg, ch, seed);
    for (std::size_t u = 0; u < d.positions.size(); ++u) {
      const Point& p = d.positions[u];
      REQUIRE(std::abs(p.x) <= 25.0);
      REQUIRE(std::abs(p.y) <= 25.0);
      REQUIRE(std::hypot(p.x, p.y) >= 5.0);
      REQUIRE(d.bs_distance[u] == std::hypot(p.x, p.y));
    }
  }
}

TEST_CASE("hotspot placement clusters users") {
  CellConfig cfg;
  cfg.placement = HotspotPlacement{1, 10.0};
  const ChannelParams ch;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const CellDrop d = make_drop(cfg, ch, seed);
    // All users within 10 m of one center means pairwise distances <= 20 m.
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) REQUIRE(d.user_distance[static_cast<std::size_t>(a * 4 + b)] <= 20.0 + 1e-9);
    for (const Point& p : d.positions) {
      REQUIRE(std::abs(p.x) <= 25.0);
      REQUIRE(std::abs(p.y) <= 25.0);
      REQUIRE(std::hypot(p.x, p.y) >= 5.0);
    }
  }

  cfg.placement = HotspotPlacement{2, 10.0};
  const CellDrop d = make_drop(cfg, ch, 3);
  CHECK(d.user_distance[0 * 4 + 1] <= 20.0);
  CHECK(d.user_distance[2 * 4 + 3] <= 20.0);
}

TEST_CASE("pathological placement reports a placement failure") {
  CellConfig cfg;
  cfg.exclusion_radius = 24.99;
  cfg.placement = HotspotPlacement{1, 1e-3};
  const ChannelParams ch;
  int failures = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    try {
      make_drop(cfg, ch, seed);
    } catch (const PlacementError&) {
      ++failures;
    }
  }
  CHECK(failures > 0);
}

TEST_CASE("drops are deterministic and reciprocal") {
  CellConfig cfg;
  cfg.n_users = 6;
  cfg.los_mode = FixedLosProbability{0.5};
  const ChannelParams ch;
  const CellDrop a = make_drop(cfg, ch, 42);
  const CellDrop b = make_drop(cfg, ch, 42);
  CHECK(same_drop(a, b));
  CHECK_FALSE(same_drop(a, make_drop(cfg, ch, 43)));

  for (int i = 0; i < 6; ++i) {
    CHECK(a.user_pathloss(i, i) == 0.0);
    for (int j = 0; j < 6; ++j) {
      CHECK(a.user_pathloss(i, j) == a.user_pathloss(j, i));
      CHECK(a.user_los[static_cast<std::size_t>(i * 6 + j)] == a.user_los[static_cast<std::size_t>(j * 6 + i)]);
    }
  }

  const ChannelRealization r1 = draw_realization(a, 42, 5);
  const ChannelRealization r2 = draw_realization(a, 42, 5);
  const ChannelRealization r3 = draw_realization(a, 42, 6);
  CHECK(r1.g_sq == r2.g_sq);
  CHECK(r1.h_sq == r2.h_sq);
  CHECK(r1.g_sq != r3.g_sq);
  for (int i = 0; i < 6; ++i) {
    CHECK(r1.h(i, i) == 0.0);
    CHECK(r1.g(i) >= 0.0);
    for (int j = 0; j < 6; ++j) CHECK(r1.h(i, j) == r1.h(j, i));
  }
}

TEST_CASE("path loss of a drop matches the formulas") {
  CellConfig cfg;
  cfg.los_mode = FixedLosProbability{0.5};
  const ChannelParams ch;
  const CellDrop d = make_drop(cfg, ch, 11);
  for (int u = 0; u < 4; ++u) {
    const auto k = static_cast<std::size_t>(u);
    const double base = d.bs_los[k] ? 89.5 + 16.9 * std::log10(d.bs_distance[k] / 1000.0)
                                    : 147.4 + 43.3 * std::log10(d.bs_distance[k] / 1000.0);
    CHECK(d.bs_pathloss_db[k] == doctest::Approx(base + d.bs_shadow_db[k]).epsilon(1e-12));
  }
}

TEST_CASE("LOS toggling keeps the shadowing stream aligned") {
  CellConfig nlos;
  CellConfig mixed;
  mixed.los_mode = FixedLosProbability{0.5};
  const ChannelParams ch;
  const CellDrop a = make_drop(nlos, ch, 9);
  const CellDrop b = make_drop(mixed, ch, 9);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(a.bs_distance[k] == b.bs_distance[k]);
    const double za = a.bs_shadow_db[k] / 4.0;
    const double zb = b.bs_shadow_db[k] / (b.bs_los[k] ? 3.0 : 4.0);
    CHECK(za == doctest::Approx(zb).epsilon(1e-12));
  }
}

TEST_CASE("shadowing standard deviation") {
  CellConfig cfg;
  cfg.n_users = 1;
  const ChannelParams ch;
  std::vector<double> nlos;
  nlos.reserve(100000);
  for (std::uint64_t seed = 0; seed < 100000; ++seed) nlos.push_back(make_drop(cfg, ch, seed).bs_shadow_db[0]);
  CHECK(std::abs(sample_std(nlos) - 4.0) < 0.02 * 4.0);

  cfg.los_mode = FixedLosProbability{1.0};
  std::vector<double> los;
  los.reserve(100000);
  for (std::uint64_t seed = 0; seed < 100000; ++seed) los.push_back(make_drop(cfg, ch, seed).bs_shadow_db[0]);
  CHECK(std::abs(sample_std(los) - 3.0) < 0.02 * 3.0);
}

TEST_CASE("Rayleigh fading has unit mean power") {
  CellConfig cfg;
  cfg.n_users = 2;
  const ChannelParams ch;
  const CellDrop d = make_drop(cfg, ch, 5);
  double sum_g = 0.0, sum_h = 0.0;
  ChannelRealization r;
  const int slots = 1000000;
  for (int t = 0; t < slots; ++t) {
    draw_realization_into(d, 5, static_cast<std::uint64_t>(t), r);
    sum_g += r.g(0);
    sum_h += r.h(0, 1);
  }
  CHECK(sum_g / slots / db_to_linear(-d.bs_pathloss_db[0]) == doctest::Approx(1.0).epsilon(0.01));
  CHECK(sum_h / slots / db_to_linear(-d.user_pathloss(0, 1)) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("user-user path loss is clamped at the minimum link distance") {
  CellConfig cfg;
  cfg.n_users = 2;
  cfg.placement = HotspotPlacement{1, 0.01};
  cfg.los_mode = AllNlos{};
  ChannelParams ch;
  ch.shadow_std_nlos_db = 0.0;
  const CellDrop d = make_drop(cfg, ch, 1);
  REQUIRE(d.user_distance[1] < 1.0);
  CHECK(d.user_pathloss(0, 1) == doctest::Approx(ch.pathloss_nlos(1.0)));
}
